"""Compare the compiled and pure-Python Mattis-Bardeen kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times single sigma1/sigma2 evaluations at a few operating points and a
cold-cache temperature sweep fit, which is the workload the kernels serve.
"""

import argparse
import importlib
import os
import subprocess
import sys
import timeit

from bridgeloss import _mbkernel_py
from bridgeloss.constants import EV, H, K_B

POINTS = [  # (label, gap J, T K, f Hz)
    ("Al 0.4 K 6 GHz", 181.9e-6 * EV, 0.4, 6e9),
    ("Al 1.0 K 6 GHz", 127.4e-6 * EV, 1.0, 6e9),
    ("Ta 1.0 K 5.4 GHz", 607e-6 * EV, 1.0, 5.4e9),
]


def bench_points(repeat):
    mods = {"python": _mbkernel_py}
    try:
        mods["cython"] = importlib.import_module("bridgeloss._mbkernel")
    except ImportError:
        print("compiled kernel not built; timing the Python fallback only")
    print(f"{'point':<18} {'integral':<8}" + "".join(f"{m:>12}" for m in mods) + "   speed-up")
    for label, gap, T, f in POINTS:
        for name in ("sigma1_integral", "sigma2_integral"):
            times = {}
            for m, mod in mods.items():
                fn = getattr(mod, name)
                n = 20 if m == "python" else 200
                best = min(timeit.repeat(lambda: fn(gap, K_B * T, H * f, 1e-10), number=n, repeat=repeat))
                times[m] = best / n
            cols = "".join(f"{times[m] * 1e6:10.1f}us" for m in mods)
            ratio = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{label:<18} {name[:6]:<8}{cols}   {ratio:8.1f}x")


SWEEP_FIT = """
import time
from bridgeloss import kernels
from bridgeloss.conductivity import AL, TA, clear_cache
from bridgeloss.sweeps import fit_participation
from bridgeloss.synth import device_sweeps
sweeps = device_sweeps(seed=0)
clear_cache()
t0 = time.perf_counter()
for n in (8, 20, 35):
    fit_participation(sweeps[n], TA, AL)
print(kernels.BACKEND, time.perf_counter() - t0)
"""


def bench_sweep_fit():
    print("\ncold-cache participation fits (3 sweeps, separate interpreter each)")
    for env in ({}, {"BRIDGELOSS_PURE_PYTHON": "1"}):
        out = subprocess.run([sys.executable, "-c", SWEEP_FIT], env={**os.environ, **env},
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:<7} {float(out[1]) * 1e3:8.1f} ms")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    bench_points(args.repeat)
    bench_sweep_fit()


if __name__ == "__main__":
    main()
