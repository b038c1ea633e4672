"""Benchmark the compiled dual kernel against the pure-Python twin on the
workloads that dominate the verification suite: raw chained arithmetic,
16-dimensional gradients of a constraint-like field, nested second
derivatives, and a full Dirac-bracket evaluation.

Run:  python benchmarks/bench_dual_backend.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from geored import _dual_py

try:
    from geored import _dual_cy

    BACKENDS = {"python": _dual_py.Dual, "compiled": _dual_cy.Dual}
except ImportError:
    BACKENDS = {"python": _dual_py.Dual}


def constraint_like(z):
    # same shape as the two-particle mass-shell function: dot products,
    # a quotient, and a quadratic interaction term
    eta = (1.0, -1.0, -1.0, -1.0)

    def dot(u, v):
        return sum(e * a * b for e, a, b in zip(eta, u, v))

    x1, p1 = z[0:4], z[4:8]
    x2, p2 = z[8:12], z[12:16]
    r = [(a - b) / 2.0 for a, b in zip(x1, x2)]
    P = [a + b for a, b in zip(p1, p2)]
    xi = dot(r, r) - dot(P, r) ** 2 / dot(P, P)
    return dot(p1, p1) - 1.0 + 0.1 * xi


def bench_chain(Dual, n_iter):
    u = Dual(1.3, 1.0)
    v = Dual(0.7, 0.0)
    acc = Dual(0.0, 0.0)
    start = time.perf_counter()
    for _ in range(n_iter):
        acc = acc + (u * v - 3.0) / (v * v + 1.0) + u * u - 2.0 / u
    return time.perf_counter() - start


def bench_gradient(Dual, n_iter):
    z = list(np.random.default_rng(0).uniform(0.5, 1.5, 16))
    z[4] += 2.0
    z[12] += 2.0
    start = time.perf_counter()
    for _ in range(n_iter):
        for i in range(16):
            seeded = [Dual(z[j], 1.0 if j == i else 0.0) for j in range(16)]
            constraint_like(seeded)
    return time.perf_counter() - start


def bench_nested(Dual, n_iter):
    z = list(np.random.default_rng(1).uniform(0.5, 1.5, 16))
    z[4] += 2.0
    z[12] += 2.0
    start = time.perf_counter()
    for _ in range(n_iter):
        for i in range(8):
            seeded = [
                Dual(Dual(z[j], 1.0 if j == i else 0.0), Dual(1.0 if j == i else 0.0, 0.0))
                for j in range(16)
            ]
            constraint_like(seeded)
    return time.perf_counter() - start


def bench_dirac_bracket(n_iter):
    """End-to-end bracket timing under whichever backend is active."""
    from geored import dirac
    from geored.dualnum import DUAL_BACKEND

    cset, space = dirac.two_particle_model(1.0, 2.0, dirac.linear_potential(0.1))
    rng = np.random.default_rng(2)
    z = dirac.sample_on_shell(cset, rng, (1.0, 2.0))
    f = dirac.coordinate_fn(space, "x", 0, 1)
    g = dirac.coordinate_fn(space, "p", 1, 2)
    start = time.perf_counter()
    for _ in range(n_iter):
        dirac.dirac_bracket(cset, f, g, z)
    return DUAL_BACKEND, time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    workloads = [
        ("chained arithmetic x20000", bench_chain, 20000),
        ("16-dim gradient x200", bench_gradient, 200),
        ("nested second derivative x200", bench_nested, 200),
    ]
    print(f"available backends: {', '.join(BACKENDS)}")
    results = {}
    for label, fn, n_iter in workloads:
        for name, Dual in BACKENDS.items():
            best = min(fn(Dual, n_iter) for _ in range(args.repeat))
            results[(label, name)] = best
        line = f"{label:34s}"
        for name in BACKENDS:
            line += f"  {name}: {results[(label, name)] * 1e3:8.1f} ms"
        if "compiled" in BACKENDS:
            speedup = results[(label, "python")] / results[(label, "compiled")]
            line += f"  speedup: {speedup:4.1f}x"
        print(line)

    backend, elapsed = bench_dirac_bracket(50)
    print(f"dirac bracket x50 (active backend = {backend}): {elapsed * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
