"""Full invariant suite for one (theta, q, r) context.

Bundles every machine-checkable identity of the build into named checks
with pass/fail results: matrix-family algebra, gluing rules,
isospectrality, projector-field health, the conductance identities on
every detected gap, the full-field anchor, the pullback scaling, and the
symbolic/numeric consistency of trace and character.  Deterministic
(fixed RNG seed) so reports are byte-stable across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .algebra import (
    element_mul,
    hofstadter_element,
    random_element,
    random_selfadjoint_element,
)
from .arithmetic import WeylContext
from .chern import (
    ambient_chern_analytic,
    fhs_chern,
    fhs_chern_twisted,
    gap_certificates,
    pullback_field,
    symbolic_numeric_crosscheck,
    VerificationError,
)
from .representations import (
    check_pseudoperiodicity,
    evaluate_at_k,
    reference_fibered_rep,
    shift_matrix,
    twist_matrix,
    twist_transport,
    weyl_fibered_rep,
)
from .spectral import (
    bands_on_grid,
    detect_gaps_refined,
    fermi_projector_field,
    identity_field,
    spectral_hausdorff,
)

SEED = 20240601


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    value: float
    threshold: float
    detail: str

    def to_json_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "value": self.value,
                "threshold": self.threshold, "detail": self.detail}


def _frob(A) -> float:
    return float(np.linalg.norm(A))


def isospectral_grid(ctx: WeylContext, G: int) -> int:
    """Smallest G' >= G whose sampled central characters coincide across kinds.

    The k-grid sweeps the characters (e^{i2pi M0 j/G}, e^{i2pi j/G}) for
    the weyl family and (e^{i2pi N j/G}, e^{i2pi j/G}) for the reference
    one; the two sets coincide exactly iff gcd(G, N) = gcd(G, |M0|) = 1.
    """
    Gp = G
    while math.gcd(Gp, ctx.N) != 1 or math.gcd(Gp, abs(ctx.M0)) != 1:
        Gp += 1
    return Gp


def run_invariant_suite(ctx: WeylContext, G: int = 32, tol: float = 1e-8) -> List[CheckResult]:
    rng = np.random.default_rng(SEED)
    out: List[CheckResult] = []

    def check(name, value, threshold, detail=""):
        out.append(CheckResult(name, bool(value <= threshold), float(value),
                               float(threshold), detail))

    theta = ctx.theta
    h = hofstadter_element(theta)
    collapsed = ctx.M0 == 0     # theta = r/q: no faithful twisted family
    reps = {
        "reference": reference_fibered_rep(ctx),
        "reference-conjugated": reference_fibered_rep(ctx, conjugated=True),
    }
    if not collapsed:
        reps["weyl"] = weyl_fibered_rep(ctx)

    # exact integer identities of the context
    exact_ok = (
        ctx.beta * ctx.q - ctx.alpha * ctx.r == 1
        and ctx.nu * ctx.q + ctx.mu * ctx.r * ctx.N == ctx.r
        and ctx.q * ctx.d_r + ctx.n_r * ctx.N == 1
        and ctx.M0 == ctx.q * ctx.M - ctx.r * ctx.N
    )
    check("context-constants", 0.0 if exact_ok else 1.0, 0.5, ctx.label())

    # matrix-family identities at random k
    ks = rng.random((100, 2))
    comm = unit = powu = powv = 0.0
    phase = np.exp(2j * np.pi * ctx.M / ctx.N)
    eye = np.eye(ctx.N)
    for name, rep in reps.items():
        for k in ks:
            U, V = rep.U_at(k), rep.V_at(k)
            comm = max(comm, _frob(U @ V - phase * V @ U))
            unit = max(unit, _frob(U @ U.conj().T - eye), _frob(V @ V.conj().T - eye))
            powu = max(powu, _frob(np.linalg.matrix_power(U, ctx.N) - rep.u_power_scalar(k) * eye))
            powv = max(powv, _frob(np.linalg.matrix_power(V, ctx.N) - rep.v_power_scalar(k) * eye))
    check("commutation", comm, 1e-12, "UV = e^{i2pi M/N} VU, 100 random k, all kinds")
    check("unitarity", unit, 1e-13)
    check("power-identity-u", powu, 1e-12)
    check("power-identity-v", powv, 1e-12)

    # twist layout and transport
    k1 = float(rng.random())
    lam = np.exp(2j * np.pi * ctx.q * k1)
    tw = twist_matrix(ctx, k1)
    layout = _frob(tw - shift_matrix(ctx.N, lam).T)
    layout = max(layout, _frob(np.linalg.matrix_power(tw, ctx.N) - lam * eye))
    layout = max(layout, _frob(twist_transport(ctx, k1, 1) - tw.conj()))
    check("twist-layout", layout, 1e-13, "G = shift^T, G^N = e^{i2pi q k1} I, transport = conj(G)")

    # pseudo-periodic gluing of operator fields
    elems = [h] + [random_selfadjoint_element(theta, 3, rng) for _ in range(2)]
    pp = 0.0
    for rep in reps.values():
        if rep.conjugated:
            continue
        for a in elems:
            for k in rng.random((20, 2)):
                pp = max(pp, check_pseudoperiodicity(rep, a, k))
    check("pseudo-periodicity", pp, 1e-12)

    # evaluation is multiplicative
    hom = 0.0
    for _ in range(10):
        a = random_element(theta, 4, rng)
        b = random_element(theta, 4, rng)
        k = rng.random(2)
        for rep in reps.values():
            AB = evaluate_at_k(rep, element_mul(a, b), k)
            hom = max(hom, _frob(AB - evaluate_at_k(rep, a, k) @ evaluate_at_k(rep, b, k)))
    check("homomorphism", hom, 1e-11, "pi_k(ab) = pi_k(a) pi_k(b), random degree <= 4")

    # isospectrality across kinds (vs the conjugated form when no twisted family)
    if collapsed:
        Gi = G
        other = reps["reference-conjugated"]
    else:
        Gi = isospectral_grid(ctx, G)
        other = reps["weyl"]
    haus = spectral_hausdorff(
        bands_on_grid(other, h, Gi),
        bands_on_grid(reps["reference"], h, Gi),
    )
    check("isospectrality", haus, 1e-6, f"Hausdorff at grid {Gi}^2")

    # gap structure
    report, bd_r = detect_gaps_refined(reps["reference"], h, G, tol)
    expected_bands = ctx.N if ctx.N % 2 == 1 else ctx.N - 1
    check("band-count", abs(report.bands - expected_bands), 0.5,
          f"{report.bands} merged bands (expected {expected_bands})")
    dd = [g.d for g in report.gaps]
    check("gap-labels-increasing", 0.0 if dd == sorted(set(dd)) else 1.0, 0.5, str(dd))

    # projector-field health on the widest internal gap (when one exists)
    internal = report.internal()
    field_defect = 0.0
    seam = 0.0
    detail = "no internal gap"
    if internal and not collapsed:
        gap = max(internal, key=lambda gg: gg.upper - gg.lower)
        bd_w = bands_on_grid(reps["weyl"], h, G)
        f_w = fermi_projector_field(bd_w, gap.fermi, tol)
        dft = f_w.defects()
        field_defect = max(dft["idempotency"], dft["hermiticity"], dft["trace"])
        for i in range(0, G, max(1, G // 8)):
            k1 = bd_w.k1s[i]
            T = twist_transport(ctx, k1, 1)
            w, v = np.linalg.eigh(evaluate_at_k(reps["weyl"], h, (k1, 1.0)))
            occ = v[:, : f_w.rank]
            P1 = occ @ occ.conj().T
            seam = max(seam, _frob(P1 - T @ f_w.P[i, 0] @ T.conj().T))
        detail = f"gap d={gap.d}"
    check("projector-field", field_defect, 1e-8, detail)
    check("projector-seam-transport", seam, 1e-10, detail)

    # ambient anchor
    if collapsed:
        check("ambient-anchor", 0.0, 1e-3, "not applicable: theta = r/q")
    else:
        anchor = fhs_chern_twisted(identity_field(reps["weyl"], max(16, G // 2)), ctx)
        ok = anchor.value == ambient_chern_analytic(ctx.N, ctx.q)
        check("ambient-anchor", anchor.residual if ok else 1.0, 1e-3,
              f"t(identity) = {anchor.value}, expected {ctx.q}")

    # conductance identities on every gap
    worst = 0.0
    detail = ""
    try:
        certs = gap_certificates(ctx, G, tol)
        for c in certs:
            worst = max(worst, c["rhs_residual"])
            rec = c["record"]
            if c["solver_match"] is False:
                raise VerificationError(f"gap d={rec.d}: solver disagrees with measured (t,s)")
            if ctx.q == 1 and not (2 * abs(rec.s) < ctx.N):
                raise VerificationError(f"gap d={rec.d}: |s|={abs(rec.s)} violates 2|s| < N")
        detail = f"{len(certs)} gaps verified"
    except VerificationError as exc:
        worst = float("inf")
        detail = str(exc)
    check("tknn-gaps", worst, 1e-3, detail)

    # pullback lemma on the widest internal gap of the reference field
    pb = 0.0
    detail = "no internal gap"
    if internal:
        gap = max(internal, key=lambda gg: gg.upper - gg.lower)
        f_r = fermi_projector_field(bd_r, gap.fermi, tol)
        base = fhs_chern(f_r).value
        for (n1, n2) in ((2, 1), (1, 3)):
            scaled = fhs_chern(pullback_field(f_r, n1, n2)).value
            pb = max(pb, abs(scaled - n1 * n2 * base))
        detail = f"base Chern {base}"
    check("pullback-lemma", pb, 0.5, detail)

    # symbolic vs numeric trace/character
    Gx = max(G, 32)
    cross = max(
        symbolic_numeric_crosscheck(random_element(theta, 4, rng), ctx, Gx)
        for _ in range(5)
    )
    check("symbolic-numeric", cross, 1e-10, f"5 random degree-4 elements at G={Gx}")

    return out
