"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--json PATH]

Each kernel is timed on identical inputs for every importable backend and
the outputs are cross-checked before timing.
"""
from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from carleman_lcu.kernels import backends


def _cases(rng):
    def state(n):
        v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        return v / np.linalg.norm(v)

    u = np.array([[0.6, 0.8j], [0.8j, 0.6]])
    m7 = np.ascontiguousarray(rng.normal(size=(128, 128)) + 1j * rng.normal(size=(128, 128)))
    m9 = np.ascontiguousarray(rng.normal(size=(512, 512)) + 0j)
    s16, s20 = state(16), state(20)
    return {
        "pauli 7 qubits": (lambda k: k.pauli_coefficients(m7), None),
        "pauli 9 qubits": (lambda k: k.pauli_coefficients(m9), None),
        "mcx 16 qubits": (lambda k, s=s16: k.apply_mcx(s, 0b1011 << 10, 0b1001 << 10, 3), s16),
        "mcx 20 qubits": (lambda k, s=s20: k.apply_mcx(s, 0b111, 0b101, 19), s20),
        "swap 20 qubits": (lambda k, s=s20: k.apply_swap(s, 2, 17), s20),
        "1q 20 qubits": (lambda k, s=s20: k.apply_1q(s, 5, u), s20),
        "controlled 1q 20 qubits": (lambda k, s=s20: k.apply_1q(s, 5, u, 1 << 12, 1 << 12), s20),
    }


def _crosscheck(found, rng):
    if len(found) < 2:
        return
    m = np.ascontiguousarray(rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64)))
    ref = found["python"].pauli_coefficients(m)
    for name, mod in found.items():
        if np.max(np.abs(mod.pauli_coefficients(m) - ref)) > 1e-12:
            raise SystemExit(f"backend {name} disagrees with the python backend")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", help="also write results to this path")
    args = p.parse_args(argv)

    rng = np.random.default_rng(0)
    found = backends()
    _crosscheck(found, rng)
    results = {}
    for case, (fn, _) in _cases(rng).items():
        results[case] = {}
        for name, mod in found.items():
            number = 3
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
            results[case][name] = best

    names = sorted(found)
    header = f"{'kernel':26s}" + "".join(f"{n:>14s}" for n in names)
    if "compiled" in found:
        header += f"{'speedup':>10s}"
    print(header)
    for case, row in results.items():
        line = f"{case:26s}" + "".join(f"{row[n] * 1e3:12.3f}ms" for n in names)
        if "compiled" in found:
            line += f"{row['python'] / row['compiled']:9.1f}x"
        print(line)
    if "compiled" not in found:
        print("compiled backend not built; only the python backend was timed")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
