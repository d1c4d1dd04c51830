"""Benchmark the compiled kernel core against the pure numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Times the four hot kernels on workloads shaped like the verification suite
(small dense matrices, long products, fine quadrature grids), plus one
end-to-end series evaluation through the public API on each backend.
"""

import argparse
import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from signet._kernels import backends  # noqa: E402


def timeit(func, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - start)
    return best


def workloads(rng):
    cases = []
    for n in (2, 4, 6, 12):
        mat = rng.normal(size=(n, n))
        cases.append((f"expm {n}x{n} x2000", "expm", (mat,), 2000))
    gens = rng.normal(size=(100, 6, 6)) * 0.8
    dts = rng.uniform(0.2, 1.0, size=100)
    cases.append(("chain_product 100 intervals 6x6", "chain_product", (gens, dts), 20))
    m, n = 500, 4
    steps = rng.uniform(0.0, 0.1, size=(m, n, n))
    for k in range(m):
        steps[k] += np.eye(n)
    widths = np.full(m, 1e-3)
    couplings = np.abs(rng.normal(size=(m, n, n)))
    cases.append(
        ("series_levels order 12, 500 steps", "series_levels",
         (steps, widths, couplings, 12), 10)
    )
    stack = np.abs(rng.normal(size=(m + 1, n, n)))
    cases.append(
        ("trapezoid_triple 500 steps", "trapezoid_triple",
         (stack, couplings, stack, widths), 20)
    )
    cases.append(("forward_states 500 steps", "forward_states", (steps, np.eye(n)), 20))
    return cases


def end_to_end():
    from signet.transition import peano_baker_truncated
    from signet.verify import ScenarioSpec, generate_scenario

    _, signal = generate_scenario(
        ScenarioSpec(
            seed=1000,
            sign_policy="free",
            n_range=(4, 4),
            m_range=(2, 2),
            weight_range=(0.3, 1.2),
            tau_min=0.3,
            dwell_range=(0.3, 0.8),
            horizon=4.0,
        )
    )
    t = signal.t0 + 0.5
    return lambda: peano_baker_truncated(signal, signal.t0, t, 12, 1e-3)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)

    found = backends()
    if "compiled" not in found:
        print("compiled backend not built; run: python setup.py build_ext --inplace")
    names = sorted(found)
    rng = np.random.default_rng(0)
    cases = workloads(rng)

    header = f"{'workload':<36}" + "".join(f"{name:>12}" for name in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, attr, call_args, inner in cases:
        row = f"{label:<36}"
        timings = {}
        for name in names:
            func = getattr(found[name], attr)

            def loop():
                for _ in range(inner):
                    func(*call_args)

            timings[name] = timeit(loop, args.repeats)
            row += f"{timings[name] * 1e3:>10.2f}ms"
        if len(names) == 2:
            row += f"{timings['python'] / timings['compiled']:>9.1f}x"
        print(row)

    # One series evaluation through the public API per backend selection.
    import importlib
    import os

    for name in names:
        os.environ["SIGNET_PURE_PYTHON"] = "1" if name == "python" else "0"
        for module in list(sys.modules):
            if module.startswith("signet"):
                del sys.modules[module]
        importlib.invalidate_caches()
        run = end_to_end()
        best = timeit(run, args.repeats)
        print(f"{'series oracle end-to-end':<36}{name:>12}: {best * 1e3:.2f}ms")
    os.environ.pop("SIGNET_PURE_PYTHON", None)
    return 0


if __name__ == "__main__":
    sys.exit(main())
