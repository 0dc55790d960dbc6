#!/usr/bin/env python3
"""Numba vs pure-numpy timing for the hot kernels.

Each row checks that both paths agree before reporting the speedup.
Run from the repository root: python3 benchmarks/bench_kernels.py
"""
import time

import numpy as np

from quadtomo import kernels

if not kernels.HAVE_NUMBA:
    raise SystemExit("numba is not installed; only the numpy path is available")

nb, npy = kernels.numba_impl, kernels.numpy_impl


def best_of(fn, *args, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def random_adjacency(rng, graphs, n, p=0.4):
    adj = np.zeros((graphs, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            on = rng.random(graphs) < p
            adj[on, i] |= 1 << j
            adj[on, j] |= 1 << i
    return adj


def main():
    rng = np.random.default_rng(0)
    freqs = rng.uniform(-5, 5, 32)
    amps = rng.normal(size=32) + 1j * rng.normal(size=32)
    times = np.linspace(0, 200, 20000)
    energies = rng.uniform(0.1, 3, 16)
    adj = random_adjacency(rng, 2000, 8)
    c, g, b = rng.normal(size=9), rng.uniform(-1, 1, 9), rng.normal(size=10)

    cases = [
        ("synthesize 32 modes x 20000 samples", "synthesize", (freqs, amps, times)),
        ("many_body_levels N=16", "many_body_levels", (energies, 0.0)),
        ("closure_all_subsets 2000 graphs, n=8", "closure_all_subsets", (adj,)),
        ("xy_chain_hamiltonian N=10", "xy_chain_hamiltonian", (c, g, b)),
    ]

    print("Warming up numba compilation...")
    t0 = time.perf_counter()
    for _, name, args in cases:
        getattr(nb, name)(*args)
    print(f"warmup: {time.perf_counter() - t0:.1f} s\n")

    print(f"{'kernel':<40} {'numpy (s)':>10} {'numba (s)':>10} {'speedup':>8} {'agree':>6}")
    print("-" * 78)
    for label, name, args in cases:
        t_np, out_np = best_of(getattr(npy, name), *args)
        t_nb, out_nb = best_of(getattr(nb, name), *args)
        if name == "many_body_levels":
            out_np, out_nb = np.sort(out_np), np.sort(out_nb)
        agree = np.allclose(out_np, out_nb, atol=1e-10)
        print(f"{label:<40} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x {'ok' if agree else 'FAIL':>6}")


if __name__ == "__main__":
    main()
