"""Compare the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is timed on
both backends with :mod:`timeit` and the outputs are cross-checked.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from tmsv_repeater.kernels import available_backends, get_backend
from tmsv_repeater.single_qubit import OneQubitDesign
from tmsv_repeater.swap import _BELL_TENSOR


def _cases():
    seg = OneQubitDesign.for_probability(0.02, 0.8).density().normalize().data
    yield "bell_branches", lambda k: k.bell_branches(seg, seg, _BELL_TENSOR), 2000
    for p, M in ((0.1, 10), (1e-3, 25), (1e-5, 25)):
        yield f"attempt_moments p={p:g} M={M}", (lambda k, p=p, M=M: k.attempt_moments(p, M, 1e-13, 200_000_000)), 3


def _values(out) -> np.ndarray:
    # moments: compare (mean, inv) only
    return np.asarray(out[:2] if isinstance(out, tuple) else out, dtype=complex).ravel()


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = {name: get_backend(name) for name in available_backends()}
    print(f"backends: {', '.join(backends)}")
    for label, fn, number in _cases():
        best = {}
        outs = {}
        for name, mod in backends.items():
            outs[name] = fn(mod)
            best[name] = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
        ref = _values(outs["python"])
        rel = max(float(np.linalg.norm(_values(o) - ref) / np.linalg.norm(ref)) for o in outs.values())
        line = "  ".join(f"{n} {t * 1e6:10.1f} us" for n, t in best.items())
        speed = f"  speedup x{best['python'] / best['cython']:.2f}" if "cython" in best else ""
        print(f"{label:34s} {line}{speed}  max rel diff {rel:.1e}")


if __name__ == "__main__":
    main()
