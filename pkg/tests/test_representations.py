"""Matrix families: clock/shift pairs, twist gluing, fibered evaluation."""

import cmath
import math

import numpy as np
import pytest

from conftest import bands_of, ctx_of

from nctorus.algebra import (
    RationalTheta,
    ThetaMismatchError,
    element_mul,
    hofstadter_element,
    monomial,
    random_element,
    unit,
)
from nctorus.representations import (
    check_pseudoperiodicity,
    clock_matrix,
    evaluate_at_k,
    evaluate_on_grid,
    reference_fibered_rep,
    shift_matrix,
    shift_matrix_power,
    twist_matrix,
    twist_transport,
    unitary_power,
    weyl_fibered_rep,
)
from nctorus.spectral import spectral_hausdorff

CONTEXTS = [(1, 3, 1, 0), (1, 3, 2, 1), (2, 5, 3, 1), (2, 5, 3, 2),
            (3, 7, 3, 2), (1, 2, 1, 0), (1, 5, 3, -1), (1, 7, 2, 1)]


def frob(A):
    return float(np.linalg.norm(A))


def test_clock_shift_small_matrices():
    assert np.allclose(clock_matrix(2), np.diag([1, -1]))
    assert np.allclose(shift_matrix(2), [[0, 1], [1, 0]])
    assert np.allclose(clock_matrix(1), [[1]])
    assert np.allclose(shift_matrix(1, 0.5j), [[0.5j]])


@pytest.mark.parametrize("q", [1, 2, 3, 5])
def test_clock_shift_power_and_commutation(q, rng):
    lam = cmath.exp(2j * cmath.pi * rng.random())
    lam2 = cmath.exp(2j * cmath.pi * rng.random())
    C, S = clock_matrix(q, lam), shift_matrix(q, lam2)
    assert frob(np.linalg.matrix_power(C, q) - lam ** q * np.eye(q)) < 1e-13
    assert frob(np.linalg.matrix_power(S, q) - lam2 * np.eye(q)) < 1e-13
    w = cmath.exp(2j * cmath.pi / q)
    assert frob(C @ S - w * S @ C) < 1e-13


def test_shift_cube_with_imaginary_corner():
    S = shift_matrix(3, 1j)
    assert frob(np.linalg.matrix_power(S, 3) - 1j * np.eye(3)) < 1e-15


@pytest.mark.parametrize("p", range(-7, 8))
def test_shift_matrix_power_closed_form(p, rng):
    lam = cmath.exp(2j * cmath.pi * rng.random())
    got = shift_matrix_power(5, lam, p)
    want = unitary_power(shift_matrix(5, lam), p)
    assert frob(got - want) < 1e-13


def test_twist_matrix_layout():
    ctx = ctx_of(1, 2, 1, 0)
    assert np.allclose(twist_matrix(ctx, 0.0), [[0, 1], [1, 0]])
    ctx = ctx_of(1, 5, 2, 1)
    k1 = 0.37
    G = twist_matrix(ctx, k1)
    lam = cmath.exp(2j * cmath.pi * ctx.q * k1)
    assert frob(G - shift_matrix(5, lam).T) < 1e-15
    assert frob(np.linalg.matrix_power(G, 5) - lam * np.eye(5)) < 1e-13
    assert frob(np.linalg.matrix_power(twist_matrix(ctx, 0.0), 5) - np.eye(5)) < 1e-13
    assert frob(twist_transport(ctx, k1, 1) - G.conj()) < 1e-15


def test_weyl_rep_at_origin_is_clock_shift():
    rep = weyl_fibered_rep(ctx_of(1, 3, 1, 0))
    assert frob(rep.U_at((0.0, 0.0)) - clock_matrix(3)) < 1e-15
    assert frob(rep.V_at((0.0, 0.0)) - shift_matrix(3)) < 1e-15


def test_reference_rep_at_origin_and_periodicity():
    rep = reference_fibered_rep(ctx_of(1, 3, 1, 0))
    assert frob(rep.U_at((0.0, 0.0)) - clock_matrix(3)) < 1e-15
    assert frob(rep.V_at((0.0, 0.0)) - shift_matrix(3)) < 1e-15
    k = (0.21, 0.73)
    k_shift = (k[0] + 1.0, k[1] + 1.0)
    assert frob(rep.U_at(k) - rep.U_at(k_shift)) < 1e-12
    assert frob(rep.V_at(k) - rep.V_at(k_shift)) < 1e-12


@pytest.mark.parametrize("spec", CONTEXTS)
def test_family_identities_random_k(spec, rng):
    M, N, q, r = spec
    ctx = ctx_of(M, N, q, r)
    phase = cmath.exp(2j * cmath.pi * M / N)
    eye = np.eye(N)
    reps = [weyl_fibered_rep(ctx), reference_fibered_rep(ctx),
            reference_fibered_rep(ctx, conjugated=True)]
    for rep in reps:
        for k in rng.random((25, 2)):
            U, V = rep.U_at(k), rep.V_at(k)
            assert frob(U @ V - phase * V @ U) < 1e-12
            assert frob(U @ U.conj().T - eye) < 1e-13
            assert frob(V @ V.conj().T - eye) < 1e-13
            assert frob(np.linalg.matrix_power(U, N) - rep.u_power_scalar(k) * eye) < 1e-12
            assert frob(np.linalg.matrix_power(V, N) - rep.v_power_scalar(k) * eye) < 1e-12


def test_power_scalars_by_kind():
    ctx = ctx_of(1, 3, 2, 1)
    k = (0.3, 0.6)
    wy = weyl_fibered_rep(ctx)
    rf = reference_fibered_rep(ctx)
    rc = reference_fibered_rep(ctx, conjugated=True)
    assert wy.u_power_scalar(k) == pytest.approx(cmath.exp(2j * cmath.pi * ctx.M0 * k[1]))
    assert wy.v_power_scalar(k) == pytest.approx(cmath.exp(2j * cmath.pi * k[0]))
    assert rf.u_power_scalar(k) == pytest.approx(cmath.exp(2j * cmath.pi * 3 * k[1]))
    assert rf.v_power_scalar(k) == pytest.approx(cmath.exp(2j * cmath.pi * k[0]))
    assert rc.v_power_scalar(k) == pytest.approx(cmath.exp(2j * cmath.pi * 3 * k[0]))


def test_evaluate_hofstadter_two_band_at_origin():
    # N=2, rep (1,0) at k=0: [[2, 2], [2, -2]], eigenvalues +-2*sqrt(2)
    ctx = ctx_of(1, 2, 1, 0)
    H = evaluate_at_k(weyl_fibered_rep(ctx), hofstadter_element(ctx.theta), (0.0, 0.0))
    assert np.allclose(H, [[2, 2], [2, -2]], atol=1e-14)
    vals = np.linalg.eigvalsh(H)
    assert vals == pytest.approx([-2 * math.sqrt(2), 2 * math.sqrt(2)], abs=1e-13)


def test_evaluate_unit_and_commutator_scalar(rng):
    ctx = ctx_of(2, 5, 3, 1)
    rep = weyl_fibered_rep(ctx)
    k = tuple(rng.random(2))
    assert frob(evaluate_at_k(rep, unit(ctx.theta), k) - np.eye(5)) < 1e-15
    uv = evaluate_at_k(rep, element_mul(monomial(ctx.theta, 1, 0), monomial(ctx.theta, 0, 1)), k)
    vu = evaluate_at_k(rep, element_mul(monomial(ctx.theta, 0, 1), monomial(ctx.theta, 1, 0)), k)
    assert frob(uv - cmath.exp(2j * cmath.pi * 2 / 5) * vu) < 1e-13


def test_evaluate_is_multiplicative(rng):
    ctx = ctx_of(1, 3, 2, 1)
    for rep in (weyl_fibered_rep(ctx), reference_fibered_rep(ctx),
                reference_fibered_rep(ctx, conjugated=True)):
        for _ in range(10):
            a = random_element(ctx.theta, 4, rng)
            b = random_element(ctx.theta, 4, rng)
            k = tuple(rng.random(2))
            lhs = evaluate_at_k(rep, element_mul(a, b), k)
            rhs = evaluate_at_k(rep, a, k) @ evaluate_at_k(rep, b, k)
            assert frob(lhs - rhs) < 1e-11


def test_evaluate_theta_mismatch():
    ctx = ctx_of(1, 3, 1, 0)
    with pytest.raises(ThetaMismatchError):
        evaluate_at_k(weyl_fibered_rep(ctx), monomial(RationalTheta(2, 5), 1, 0), (0, 0))


@pytest.mark.parametrize("spec", CONTEXTS)
def test_pseudoperiodicity(spec, rng):
    M, N, q, r = spec
    ctx = ctx_of(M, N, q, r)
    h = hofstadter_element(ctx.theta)
    wy, rf = weyl_fibered_rep(ctx), reference_fibered_rep(ctx)
    assert check_pseudoperiodicity(wy, unit(ctx.theta), (0.1, 0.2)) < 1e-14
    for _ in range(5):
        k = tuple(rng.random(2))
        assert check_pseudoperiodicity(wy, h, k) < 1e-12
        assert check_pseudoperiodicity(rf, h, k) < 1e-12
        a = random_element(ctx.theta, 3, rng)
        assert check_pseudoperiodicity(wy, a, k) < 1e-12


def test_evaluate_on_grid_matches_single_point(rng):
    ctx = ctx_of(2, 5, 3, 2)
    a = random_element(ctx.theta, 4, rng)
    k1s = np.arange(5) / 5
    k2s = np.arange(4) / 4
    for rep in (weyl_fibered_rep(ctx), reference_fibered_rep(ctx),
                reference_fibered_rep(ctx, conjugated=True)):
        grid = evaluate_on_grid(rep, a, k1s, k2s)
        for i in range(5):
            for j in range(4):
                single = evaluate_at_k(rep, a, (k1s[i], k2s[j]))
                assert frob(grid[i, j] - single) < 1e-12


def test_collapsed_twist_rejected():
    from nctorus.arithmetic import DegenerateRepresentationError

    ctx = ctx_of(0, 1, 1, 0)        # integer theta, untwisted rep: M0 = 0
    assert ctx.M0 == 0
    with pytest.raises(DegenerateRepresentationError):
        weyl_fibered_rep(ctx)
    rep = reference_fibered_rep(ctx)   # the reference family stays faithful
    assert rep.dim == 1
    assert rep.V_at((0.25, 0.0))[0, 0] == pytest.approx(cmath.exp(0.5j * cmath.pi))


def test_matrix_debug_json():
    import json

    from nctorus.representations import matrix_to_json

    m = np.array([[1.0, 1j], [0.0, -0.5 - 2j]])
    rows = matrix_to_json(m)
    assert rows == [[[1.0, 0.0], [0.0, 1.0]], [[0.0, 0.0], [-0.5, -2.0]]]
    json.dumps(rows)


def test_isospectrality_weyl_vs_reference():
    haus = spectral_hausdorff(bands_of(1, 3, 2, 1, "weyl", 64),
                              bands_of(1, 3, 2, 1, "reference", 64))
    assert haus < 1e-6
