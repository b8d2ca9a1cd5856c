"""Timing study for the frequency-domain solve kernel.

Compares the batched numpy route used by the solver (chunked einsum plus
batched inversion) against a naive per-mode Python loop, to document that the
hot loop already runs at BLAS speed and a compiled extension would buy
nothing at the scales this package targets.

Run:  python benchmarks/multiplier_kernel.py [N]
"""

import sys
import time

import numpy as np

from diraclab import build_clifford
from diraclab.solver import (
    _batch_L1,
    _batch_sigma0,
    _mode_chunks,
    apply_spectral,
    make_bump,
    solve_d0,
)


def naive_solve_kernel(rep, k, n, N, L, flat):
    """Per-mode Python loop building and applying the recovery multiplier."""
    out = np.empty((flat.shape[0], rep.s_dim), dtype=complex)
    scale = 2 * np.pi / L
    pos = 0
    for idx, modes in _mode_chunks(k * n, N, chunk=1):
        xi = (-scale * modes).reshape(1, k, n)
        s0 = _batch_sigma0(rep, k, xi)[0]
        if np.linalg.norm(modes) == 0:
            out[pos] = 0.0
        else:
            L1 = _batch_L1(rep, k, xi)[0]
            mult = s0.conj().T @ s0 @ s0.conj().T @ np.linalg.inv(L1)
            out[pos] = mult @ flat[pos]
        pos += 1
    return out


def main():
    N = int(sys.argv[1]) if len(sys.argv) > 1 else 16
    k = n = 2
    L = float(2 * np.pi)
    rep = build_clifford(n)
    phi = make_bump(rep, k, n, N, L, np.full(k * n, np.pi), 0.6)
    f = apply_spectral("d0", phi, rep)

    t0 = time.perf_counter()
    u, _ = solve_d0(f, rep, certify=False)
    t_batched = time.perf_counter() - t0

    fh = np.fft.fftn(f.values, axes=range(k * n)).reshape(-1, f.dim)
    t0 = time.perf_counter()
    uh = naive_solve_kernel(rep, k, n, N, L, fh)
    t_naive = time.perf_counter() - t0
    u_naive = np.fft.ifftn(
        uh.reshape((N,) * (k * n) + (rep.s_dim,)), axes=range(k * n)
    )
    agree = np.abs(u_naive - u.values).max()

    total = N ** (k * n)
    print(f"grid {N}^{k * n} = {total} modes")
    print(f"batched kernel : {t_batched:8.3f} s  ({total / t_batched:,.0f} modes/s)")
    print(f"per-mode loop  : {t_naive:8.3f} s  ({total / t_naive:,.0f} modes/s)")
    print(f"speedup x{t_naive / t_batched:,.0f}, results agree to {agree:.2e}")


if __name__ == "__main__":
    main()
