"""Fibered matrix families over the Brillouin torus.

Two kinds of N x N unitary pairs (U(k), V(k)) realizing u, v at each
quasi-momentum k:

  weyl        U(k) = e^{i2pi (M0/N) k2} C^{qM}
              V(k) = e^{i2pi n_r k1} S(e^{i2pi q k1})^{d_r}
  reference   U(k) = e^{i2pi k2} C^{qM}            (default, fully periodic)
              V(k) = e^{i2pi n_r k1} S(e^{i2pi q k1})^{d_r}
  reference, conjugated=True
              U(k) = e^{i2pi k2} C^{qM}
              V(k) = e^{i2pi k1} S(1)^{d_r}

with C, S the N x N clock and shift matrices.  The weyl family is
k1-periodic and pseudo-periodic in k2: translating k2 by one conjugates
every operator by the transport unitary conj(G(k1)) = S(e^{i2pi q k1})^{-1}
(see `twist_transport`; `twist_matrix` returns G itself, whose N-th power
is e^{i2pi q k1} I).  Both reference forms are fully periodic; only the
conjugated form intertwines the algebra derivations with d/dk2, d/dk1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, RationalTheta, ThetaMismatchError
from .arithmetic import DegenerateRepresentationError, WeylContext

TWO_PI = 2.0 * np.pi


# -- elementary matrices -----------------------------------------------------


def clock_matrix(q: int, lam: complex = 1.0 + 0j) -> np.ndarray:
    """lam * diag(1, w, ..., w^{q-1}) with w = e^{i2pi/q}; (C)^q = lam^q I."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return lam * np.diag(np.exp(1j * TWO_PI * np.arange(q) / q))


def shift_matrix(q: int, lam: complex = 1.0 + 0j) -> np.ndarray:
    """Cyclic shift: ones on the subdiagonal, lam in the top-right corner.

    S e_j = e_{j+1} for j < q-1 and S e_{q-1} = lam e_0, so S^q = lam I and
    C S = e^{i2pi/q} S C.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    S = np.zeros((q, q), dtype=complex)
    for j in range(q - 1):
        S[j + 1, j] = 1.0
    S[0, q - 1] = lam
    return S


def shift_matrix_power(q: int, lam: complex, p: int) -> np.ndarray:
    """S(q, lam)^p for any integer p, via the reduction S^q = lam I."""
    wraps, p0 = divmod(p, q)
    out = np.zeros((q, q), dtype=complex)
    for j in range(q):
        i = j + p0
        out[i % q, j] = lam if i >= q else 1.0
    if wraps:
        out *= lam ** wraps
    return out


def _shift_power_grid(q: int, lam: np.ndarray, p: int) -> np.ndarray:
    """Batched S(q, lam_g)^p over a vector of corner phases: (G, q, q)."""
    wraps, p0 = divmod(p, q)
    G = lam.shape[0]
    out = np.zeros((G, q, q), dtype=complex)
    for j in range(q):
        i = j + p0
        out[:, i % q, j] = lam if i >= q else 1.0
    if wraps:
        out *= (lam ** wraps)[:, None, None]
    return out


def twist_matrix(ctx: WeylContext, k1: float) -> np.ndarray:
    """Gluing unitary G(k1): superdiagonal ones, e^{i2pi q k1} lower-left.

    G(k1)^N = e^{i2pi q k1} I, and G(k1) is the transpose of
    shift_matrix(N, e^{i2pi q k1}).  Operator fields transport across the
    k2 seam by conj(G) (see `twist_transport`), not by G itself.
    """
    return shift_matrix(ctx.N, np.exp(1j * TWO_PI * ctx.q * k1)).T.copy()


def twist_transport(ctx: WeylContext, k1: float, m: int = 1) -> np.ndarray:
    """Unitary T with pi_{(k1, k2+m)}(a) = T pi_{(k1, k2)}(a) T^dagger.

    T = conj(G(k1))^m = S(e^{i2pi q k1})^{-m}; T^N is the scalar
    e^{-i2pi q k1 m} I, which is why weyl projector fields are exactly
    periodic over k2 in [0, N).
    """
    lam = np.exp(1j * TWO_PI * ctx.q * k1)
    return shift_matrix_power(ctx.N, lam, -m)


def unitary_power(A: np.ndarray, p: int) -> np.ndarray:
    """A^p for unitary A, negative powers through the adjoint."""
    if p >= 0:
        return np.linalg.matrix_power(A, p)
    return np.linalg.matrix_power(A.conj().T, -p)


# -- fibered representations -------------------------------------------------


@dataclass(frozen=True)
class FiberedRep:
    """Rule k -> (U(k), V(k)) with periodicity/twist metadata."""

    ctx: WeylContext
    kind: str                 # "weyl" | "reference"
    conjugated: bool = False  # reference only: derivative-friendly form

    def __post_init__(self):
        if self.kind not in ("weyl", "reference"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.conjugated and self.kind != "reference":
            raise ValueError("conjugated form exists only for the reference kind")
        if self.kind == "weyl" and self.ctx.M0 == 0:
            # theta = r/q: the symmetry lattice constant M0/(Nq) vanishes and the
            # twisted family stops being faithful (only possible when N = 1)
            raise DegenerateRepresentationError(
                f"theta = {self.ctx.M}/{self.ctx.N} equals r/q = {self.ctx.r}/{self.ctx.q}: "
                "the twisted family collapses; use the reference family"
            )

    @property
    def dim(self) -> int:
        return self.ctx.N

    @property
    def periodic(self) -> bool:
        """True when the family is honestly periodic in both directions."""
        return self.kind == "reference"

    def _u_const_diag(self, n: int = 1) -> np.ndarray:
        """Diagonal of C^{qM n} with exact residue reduction."""
        N = self.ctx.N
        j = np.arange(N)
        return np.exp(1j * TWO_PI * ((self.ctx.q * self.ctx.M * n % N) * j % N) / N)

    def _u_rate(self) -> float:
        # scalar phase rate: U(k) = e^{i 2 pi rate k2} * C^{qM}
        if self.kind == "weyl":
            return self.ctx.M0 / self.ctx.N
        return 1.0

    def U_at(self, k) -> np.ndarray:
        k1, k2 = k
        return np.exp(1j * TWO_PI * self._u_rate() * k2) * np.diag(self._u_const_diag())

    def V_at(self, k) -> np.ndarray:
        k1, k2 = k
        ctx = self.ctx
        if self.conjugated:
            return np.exp(1j * TWO_PI * k1) * shift_matrix_power(ctx.N, 1.0 + 0j, ctx.d_r)
        lam = np.exp(1j * TWO_PI * ctx.q * k1)
        return np.exp(1j * TWO_PI * ctx.n_r * k1) * shift_matrix_power(ctx.N, lam, ctx.d_r)

    # expected scalars of the N-th powers, used by the invariant checks
    def u_power_scalar(self, k) -> complex:
        k1, k2 = k
        if self.kind == "weyl":
            return np.exp(1j * TWO_PI * self.ctx.M0 * k2)
        return np.exp(1j * TWO_PI * self.ctx.N * k2)

    def v_power_scalar(self, k) -> complex:
        k1, k2 = k
        if self.conjugated:
            return np.exp(1j * TWO_PI * self.ctx.N * k1)
        return np.exp(1j * TWO_PI * k1)


def weyl_fibered_rep(ctx: WeylContext) -> FiberedRep:
    return FiberedRep(ctx, "weyl")


def reference_fibered_rep(ctx: WeylContext, conjugated: bool = False) -> FiberedRep:
    return FiberedRep(ctx, "reference", conjugated)


# -- evaluation ---------------------------------------------------------------


def _check_element(rep: FiberedRep, a: AlgebraElement):
    th = a.theta
    if not isinstance(th, RationalTheta) or (th.M, th.N) != (rep.ctx.M, rep.ctx.N):
        raise ThetaMismatchError(
            f"element over {th} cannot be evaluated in a context with "
            f"theta={rep.ctx.M}/{rep.ctx.N}"
        )


def evaluate_at_k(rep: FiberedRep, a: AlgebraElement, k) -> np.ndarray:
    """sum a_{n,m} U(k)^n V(k)^m, u-powers to the left of v-powers."""
    _check_element(rep, a)
    U, V = rep.U_at(k), rep.V_at(k)
    upow, vpow = {}, {}
    out = np.zeros((rep.dim, rep.dim), dtype=complex)
    for (n, m), c in a.coeffs.items():
        if n not in upow:
            upow[n] = unitary_power(U, n)
        if m not in vpow:
            vpow[m] = unitary_power(V, m)
        out += c * (upow[n] @ vpow[m])
    return out


def evaluate_on_grid(rep: FiberedRep, a: AlgebraElement,
                     k1s: np.ndarray, k2s: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over a k1 x k2 grid: (G1, G2, N, N) array.

    Uses the closed forms U(k)^n = phase * C^{qMn} (constant matrix) and
    V(k)^m = phase * S(lam(k1))^{d_r m} so no per-point matrix powers are
    taken; agrees with evaluate_at_k to machine precision.
    """
    _check_element(rep, a)
    ctx = rep.ctx
    N = ctx.N
    G1, G2 = len(k1s), len(k2s)
    out = np.zeros((G1, G2, N, N), dtype=complex)
    if not a.coeffs:
        return out

    lam = np.exp(1j * TWO_PI * ctx.q * k1s)
    urate = rep._u_rate()

    vcache = {}
    for (n, m), c in a.coeffs.items():
        if m not in vcache:
            if rep.conjugated:
                base = shift_matrix_power(N, 1.0 + 0j, ctx.d_r * m)
                vm = np.exp(1j * TWO_PI * m * k1s)[:, None, None] * base[None, :, :]
            else:
                vm = _shift_power_grid(N, lam, ctx.d_r * m)
                vm *= np.exp(1j * TWO_PI * ctx.n_r * m * k1s)[:, None, None]
            vcache[m] = vm
        term = rep._u_const_diag(n)[None, :, None] * vcache[m]   # diag(C^{qMn}) @ V^m
        uphase = c * np.exp(1j * TWO_PI * urate * n * k2s)
        out += term[:, None, :, :] * uphase[None, :, None, None]
    return out


def matrix_to_json(m: np.ndarray) -> list:
    """Row-major debug serialization: nested lists of [re, im] pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def check_pseudoperiodicity(rep: FiberedRep, a: AlgebraElement, k) -> float:
    """Frobenius residual of the gluing rules at k for n = (1,0) and (0,1).

    weyl kind: pi_{k+(0,1)}(a) = T pi_k(a) T^dagger with T = twist_transport;
    reference kind: plain periodicity in both directions.
    """
    k1, k2 = k
    A = evaluate_at_k(rep, a, (k1, k2))
    A10 = evaluate_at_k(rep, a, (k1 + 1.0, k2))
    A01 = evaluate_at_k(rep, a, (k1, k2 + 1.0))
    res = np.linalg.norm(A10 - A)
    if rep.kind == "weyl":
        T = twist_transport(rep.ctx, k1, 1)
        res = max(res, np.linalg.norm(A01 - T @ A @ T.conj().T))
    else:
        res = max(res, np.linalg.norm(A01 - A))
    return float(res)
