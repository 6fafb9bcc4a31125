"""Time the numba kernels against the pure numpy fallback.

Each path runs in its own interpreter because the fallback is chosen at
import time by SIQRCTL_DISABLE_JIT.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def workloads():
    import numpy as np

    from siqrctl import control, linalg, model
    from siqrctl.control import DEFAULT_WEIGHTS, LqrTimeVarying
    from siqrctl.model import REFERENCE_PARAMS

    sys_ = control.build_system(REFERENCE_PARAMS)
    sol = control.dre_integrate(sys_, DEFAULT_WEIGHTS, 30.0, 0.01)
    rng = np.random.default_rng(0)
    mats = rng.uniform(-1, 1, (50, 4, 4))

    def eig_batch():
        for m in mats:
            linalg.eigenvalues(m)

    return {
        "simulate T=100 h=0.01": lambda: model.simulate(REFERENCE_PARAMS, (9, 1, 0, 0), 100.0),
        "riccati T=30 h=0.01": lambda: control.dre_integrate(sys_, DEFAULT_WEIGHTS, 30.0, 0.01),
        "lqr closed loop T=30": lambda: control.simulate_controlled(
            REFERENCE_PARAMS, LqrTimeVarying(sol, sys_), (9, 1, 0, 0), 30.0
        ),
        "eigenvalues x50": eig_batch,
    }


def measure(repeat: int) -> dict:
    out = {}
    for name, fn in workloads().items():
        start = time.perf_counter()
        fn()  # first call includes compilation or cache load
        first = time.perf_counter() - start
        best = float("inf")
        for _ in range(repeat):
            start = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - start)
        out[name] = {"first": first, "best": best}
    return out


def run_child(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("SIQRCTL_DISABLE_JIT", None)
    if disable:
        env["SIQRCTL_DISABLE_JIT"] = "1"
    proc = subprocess.run(
        [sys.executable, __file__, "--child", "--repeat", str(repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.child:
        print(json.dumps(measure(args.repeat)))
        return

    jit = run_child(False, args.repeat)
    py = run_child(True, args.repeat)
    print(f"{'workload':<24}{'numba first':>13}{'numba best':>12}{'numpy best':>12}{'speedup':>10}")
    for name in jit:
        j, p = jit[name], py[name]
        print(f"{name:<24}{j['first']:>12.3f}s{j['best']:>11.4f}s{p['best']:>11.4f}s"
              f"{p['best'] / j['best']:>9.1f}x")


if __name__ == "__main__":
    main()
