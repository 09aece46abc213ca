"""Compare the compiled and pure-Python Howell kernels.

    python3 benchmarks/bench_howell.py [--repeat 5] [--json out.json]

Both kernels run on the same random matrices; their outputs are checked for
equality before any timing is reported.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import timeit

import numpy as np

from hkcoeff import _howell_py

try:
    from hkcoeff import _howell
except ImportError:
    _howell = None

SHAPES = [(8, 8), (24, 16), (48, 32), (96, 64), (160, 96)]
MODULI = [4, 9, 27, 64, 729]


def run(repeat: int, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for m in MODULI:
        for r, c in SHAPES:
            A = rng.integers(0, m, (r, c), dtype=np.int64)
            # a few zero-divisor heavy rows so the torsion steps are exercised
            p = 2 if m % 2 == 0 else 3
            A[: r // 4] = A[: r // 4] * p % m
            ref = _howell_py.howell_form(A, m)
            row = {"m": m, "rows": r, "cols": c, "rank_rows": int(ref.shape[0])}
            n = max(1, 200 // r)
            t_py = min(timeit.repeat(lambda: _howell_py.howell_form(A, m), number=n, repeat=repeat)) / n
            row["python_ms"] = 1e3 * t_py
            if _howell is not None:
                out = _howell.howell_form(A, m)
                if not np.array_equal(out, ref):
                    raise SystemExit(f"kernels disagree for m={m}, shape {r}x{c}")
                t_c = min(timeit.repeat(lambda: _howell.howell_form(A, m), number=n * 10, repeat=repeat)) / (n * 10)
                row["compiled_ms"] = 1e3 * t_c
                row["speedup"] = t_py / t_c
            rows.append(row)
    return rows


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="also write the rows as JSON")
    args = p.parse_args(argv)
    if _howell is None:
        print("compiled kernel not built; timing the Python kernel only", file=sys.stderr)
    rows = run(args.repeat, args.seed)
    print(f"{'m':>5} {'shape':>9} {'python ms':>11} {'compiled ms':>12} {'speedup':>8}")
    for r in rows:
        comp = f"{r['compiled_ms']:12.4f}" if "compiled_ms" in r else f"{'-':>12}"
        sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'-':>8}"
        print(f"{r['m']:>5} {r['rows']:>4}x{r['cols']:<4} {r['python_ms']:11.3f} {comp} {sp}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"python": platform.python_version(), "numpy": np.__version__, "rows": rows}, fh, indent=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
