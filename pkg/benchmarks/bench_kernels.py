"""Wall-clock comparison of the compiled and numpy kernel paths.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is called once
to trigger compilation, then timed over several repeats; the two paths are
also checked to agree before any timing is reported.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from fracmech import _kernels


def _cases(size: int, rng: np.random.Generator) -> dict[str, tuple]:
    w = _kernels.gl_weights(0.5, size)
    g = rng.standard_normal(size)
    T = np.linspace(0.0, 20.0, size)
    r = np.linspace(0.01, 30.0, 256)
    c = rng.standard_normal(256) * np.exp(-r)
    V = 0.5 * 0.5 ** np.arange(size)
    V[0] = 1.0
    W = rng.standard_normal(size)
    x = np.linspace(0.0, 1.0, size)
    coef = 1.0 / np.arange(1, 513) ** 2
    return {
        "gl_convolve": ((w, g), _kernels.gl_convolve_numba, _kernels.gl_convolve_numpy),
        "exp_sum": ((T, r, c), _kernels.exp_sum_numba, _kernels.exp_sum_numpy),
        "toeplitz_solve": ((V, W), _kernels.toeplitz_solve_numba, _kernels.toeplitz_solve_numpy),
        "sine_sum": ((x, coef, 1.0), _kernels.sine_sum_numba, _kernels.sine_sum_numpy),
    }


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(12345)
    print(f"{'kernel':16s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, (inputs, fast, slow) in _cases(args.size, rng).items():
        a, b = fast(*inputs), slow(*inputs)
        diff = float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))
        t_fast = min(timeit.repeat(lambda: fast(*inputs), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*inputs), number=1, repeat=args.repeat))
        print(f"{name:16s} {1e3 * t_fast:11.3f} {1e3 * t_slow:11.3f} {t_slow / t_fast:8.2f} {diff:10.2e}")


if __name__ == "__main__":
    main()
