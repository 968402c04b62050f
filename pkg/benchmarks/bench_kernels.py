"""Compare the compiled and numpy backends on the split-step kernels.

    python benchmarks/bench_kernels.py [--n 4096] [--steps 200] [--repeat 5]

Reports the best wall time per call and the max deviation between backends.
"""

import argparse
import time

import numpy as np

from sg_edr import kernels


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    n = args.n
    z = (np.arange(n) - n // 2) * (40.0 / n)
    psi0 = np.exp(-z * z + 0.3j * z).astype(np.complex128)
    psi0 /= np.linalg.norm(psi0)
    half = np.exp(-0.01j * z)
    k = 2 * np.pi * np.fft.fftfreq(n, d=40.0 / n)
    kin = np.exp(-0.01j * k * k)
    noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)

    backends = sorted(kernels.BACKENDS)
    print(f"backends available: {', '.join(backends)} (default {kernels.BACKEND})")
    print(f"{'kernel':<10} {'backend':<8} {'seconds':>12}")
    results = {}
    for name in backends:
        t_fft = best_time(lambda: kernels.fft(noise, backend=name), args.repeat)

        def strang():
            psi = psi0.copy()
            kernels.strang_evolve(psi, half, kin, args.steps, backend=name)
            return psi

        t_strang = best_time(strang, args.repeat)
        results[name] = (kernels.fft(noise, backend=name), strang())
        print(f"{'fft':<10} {name:<8} {t_fft:12.3e}")
        print(f"{'strang':<10} {name:<8} {t_strang:12.3e}  ({args.steps} steps)")

    if len(results) == 2:
        (fa, sa), (fb, sb) = results.values()
        print(f"max |fft difference|    {np.max(np.abs(fa - fb)):.3e}")
        print(f"max |strang difference| {np.max(np.abs(sa - sb)):.3e}")


if __name__ == "__main__":
    main()
