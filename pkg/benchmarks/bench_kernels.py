"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-``repeat`` time per call for each
backend and the speedup. Both backends are loaded explicitly, so the
``RPRETURN_PURE_PYTHON`` switch does not matter here.
"""

import argparse
import timeit

import numpy as np

from rpreturn import _backend
from rpreturn.reinforce import PolicyNetwork, n_params
from rpreturn.servo_env import MotorParams


def cases(k):
    rng = np.random.default_rng(0)
    motor = MotorParams().as_tuple()
    state = np.array([0.0, 0.0, 0.3, 0.0, -0.7])
    h1, h2 = 64, 64
    net = PolicyNetwork.initialize(rng)
    net.params[-66:-1] = rng.uniform(-0.1, 0.1, 65)
    params = net.params.copy()
    z = np.zeros(n_params(h1, h2))
    work = np.empty(params.size + h1 + 2 * h2)
    x = np.array([0.2, -0.1, 0.5])
    a = rng.normal(0.0, 1.0, 10_000)
    b = rng.normal(0.0, 1.0, 10_000)

    # one decision at the 120 ms target interval is 1200 Euler substeps
    return {
        "servo_advance (1200 substeps)": lambda: k.servo_advance(
            state.copy(), 3.0, 1200, 1e-4, *motor, 1.306, False, 1.0, 0.99986, -1.0),
        "policy_forward (64x64)": lambda: k.policy_forward(params, h1, h2, x, k.STD_SOFTPLUS),
        "trace_step (64x64)": lambda: k.trace_step(params.copy(), z.copy(), h1, h2, x, 0.3,
                                                   k.STD_SOFTPLUS, 1e-6, 0.85, work),
        "compensated_product_sum (1e4)": lambda: k.compensated_product_sum(a, b, 3e-4),
    }


def best_time(fn, repeat):
    number, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = {name: _backend.load(name) for name in _backend.available()}
    if "compiled" not in backends:
        print("compiled extension not built; only the Python backend is timed")
    timings = {name: {label: best_time(fn, args.repeat) for label, fn in cases(k).items()}
               for name, k in backends.items()}
    labels = list(timings["python"])
    print(f"{'kernel':34s}{'python':>14s}{'compiled':>14s}{'speedup':>10s}")
    for label in labels:
        py = timings["python"][label]
        line = f"{label:34s}{py * 1e6:12.2f}us"
        if "compiled" in timings:
            cy = timings["compiled"][label]
            line += f"{cy * 1e6:12.2f}us{py / cy:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
