"""Benchmark the plaquette-flux kernel: numba lane vs pure-numpy fallback.

Builds realistic occupied frames (a flux-operator Fermi projector on the
reference family) at several grid sizes and times both backends on the
same arrays.  The numba timing excludes JIT compilation (one warmup
call).  Run from the repository root:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from nctorus import _kernels
from nctorus.algebra import RationalTheta, hofstadter_element
from nctorus.arithmetic import make_weyl_context
from nctorus.representations import reference_fibered_rep
from nctorus.spectral import bands_on_grid, detect_gaps, fermi_projector_field


def frames_for(G: int, M: int = 2, N: int = 5, gap_index: int = 1) -> np.ndarray:
    ctx = make_weyl_context(RationalTheta(M, N), 1, 0)
    rep = reference_fibered_rep(ctx)
    bd = bands_on_grid(rep, hofstadter_element(ctx.theta), G)
    gap = detect_gaps(bd).internal()[gap_index]
    return fermi_projector_field(bd, gap.fermi).occupied_frames()


def timed(fn, frames, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(frames)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    print(f"numba available: {_kernels.HAVE_NUMBA}   "
          f"active backend: {_kernels.active_backend()}")
    header = f"{'grid':>6} {'dim':>4} {'rank':>4} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    workloads = [(G, 2, 5, 1) for G in (32, 64, 96, 128)]
    workloads.append((64, 13, 21, 7))      # high-rank case, LAPACK determinant path
    for (G, M, N, gi) in workloads:
        frames = frames_for(G, M, N, gi)
        t_np = timed(_kernels.plaquette_flux_numpy, frames)
        if _kernels.HAVE_NUMBA:
            _kernels.plaquette_flux_numba(frames)   # JIT warmup
            t_nb = timed(_kernels.plaquette_flux_numba, frames)
            s_np, _ = _kernels.plaquette_flux_numpy(frames)
            s_nb, _ = _kernels.plaquette_flux_numba(frames)
            assert abs(s_np - s_nb) < 1e-9, "backends disagree"
            print(f"{G:>6} {frames.shape[-2]:>4} {frames.shape[-1]:>4} {1e3 * t_np:>12.3f} "
                  f"{1e3 * t_nb:>12.3f} {t_np / t_nb:>8.2f}x")
        else:
            print(f"{G:>6} {frames.shape[-2]:>4} {frames.shape[-1]:>4} "
                  f"{1e3 * t_np:>12.3f} {'n/a':>12} {'':>8}")


if __name__ == "__main__":
    main()
