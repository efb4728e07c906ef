"""Fast invariant checks runnable without pytest (``rpreturn selftest``)."""

from __future__ import annotations

import math

import numpy as np

from .. import quadrature as q
from ..reinforce import PolicyNetwork, UpdateRule, agent_step, grad_log_pi, new_trace
from ..rng import stream
from ..servo_env import IntervalNoiseModel, ServoReacher, SimConfig
from ..signals import SignalDomain, sample

DOMAIN = SignalDomain()


def check_proportionality(seed, cases=200):
    rng = stream(seed, "selftest", "prop")
    worst = 0.0
    for _ in range(cases):
        g = sample(rng.choice(["periodic", "gaussian_mixture"]), rng)
        gamma = rng.uniform(0.05, 1.0)
        n = int(rng.integers(1, 101))
        p = q.uniform_partition(DOMAIN, n)
        d = q.DiscountSpec(gamma)
        rp = q.rp_sum(d, g, p)
        dtr = q.dtr_sum(d, g, p)
        scale = q.generalized_rp_sum(d, lambda t: np.abs(g(t)), p)
        worst = max(worst, abs(rp - q.discount_factor(gamma, 3.0 / n) * dtr) / scale)
    return worst < 1e-12, f"max scaled deviation {worst:.2e}"


def check_gamma_one(seed, cases=200):
    rng = stream(seed, "selftest", "gamma1")
    d = q.DiscountSpec(1.0)
    for _ in range(cases):
        g = sample(rng.choice(["periodic", "gaussian_mixture"]), rng)
        p = q.stochastic_partition(DOMAIN, int(rng.integers(1, 101)), rng)
        if q.rp_sum(d, g, p) != q.dtr_sum(d, g, p):
            return False, "rp != dtr at gamma = 1"
    return True, f"{cases} cases bit-identical"


def check_pure_discount(seed):
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))  # noqa: E731
    for gamma in (0.5, 0.75, 0.875):
        exact = q.exact_discount_integral(gamma, DOMAIN)
        d = q.DiscountSpec(gamma)
        for n in (5, 10, 25, 50, 100):
            p = q.uniform_partition(DOMAIN, n)
            if not abs(q.rp_sum(d, one, p) - exact) < abs(q.dtr_sum(d, one, p) - exact):
                return False, f"ordering fails at gamma={gamma}, n={n}"
    return True, "15 cells strictly ordered"


def check_gradient(seed, cases=10):
    rng = stream(seed, "selftest", "grad")
    worst = 0.0
    for _ in range(cases):
        net = PolicyNetwork(rng.normal(0.0, 0.5, 4 * 8 + 8 * 8 + 8 + 8 + 2), hidden=(8, 8))
        net.params[-1] = rng.uniform(0.0, 1.5)
        obs = rng.uniform(-1.3, 1.3, 3)
        a = rng.normal()
        g = grad_log_pi(net, obs, a)
        fd = _finite_difference(net, obs, a)
        worst = max(worst, float(np.max(np.abs(g - fd) / np.maximum(np.abs(fd), 1e-6))))
    return worst < 1e-4, f"max relative error {worst:.2e}"


def _log_pi(net, obs, a):
    from ..reinforce import policy_forward
    mean, std = policy_forward(net, obs)
    return -0.5 * ((a - mean) / std) ** 2 - math.log(std) - 0.5 * math.log(2 * math.pi)


def _finite_difference(net, obs, a, h=1e-5):
    out = np.empty_like(net.params)
    for j in range(net.params.size):
        keep = net.params[j]
        net.params[j] = keep + h
        up = _log_pi(net, obs, a)
        net.params[j] = keep - h
        down = _log_pi(net, obs, a)
        net.params[j] = keep
        out[j] = (up - down) / (2 * h)
    return out


def check_servo(seed, steps=2000):
    rng = stream(seed, "selftest", "servo")
    env = ServoReacher(noise=IntervalNoiseModel(0.02), config=SimConfig(time_limit=1e9), rng=rng)
    env.reset()
    total = 0.0
    for _ in range(steps):
        r = env.step(rng.normal(0.0, 1e6))
        total += r.elapsed
        if abs(env.last_voltage) > 12.0 or abs(r.observation[0]) > env.config.angle_limit:
            return False, "saturation or clamp violated"
    drift = abs(total + env.overshoot - env.episode_substeps * env.config.sim_step)
    return drift < 1e-9, f"time accounting drift {drift:.1e} s"


def check_trace(seed, k=5):
    rng = stream(seed, "selftest", "trace")
    net = PolicyNetwork.initialize(rng, hidden=(8, 8))
    rule = UpdateRule("rp", 0.1, 0.5)
    z = new_trace(net)
    delta = 0.04
    c = q.discount_factor(0.5, delta)
    expected = np.zeros_like(z)
    for _ in range(k):
        obs, a = rng.uniform(-1, 1, 3), rng.normal()
        expected = (expected + grad_log_pi(net, obs, a)) * c
        agent_step(net, z, rule, obs, a, 0.0, delta)
    err = float(np.max(np.abs(z - expected)))
    return err < 1e-12, f"max deviation {err:.1e}"


CHECKS = [
    ("rp = gamma^delta * dtr on uniform partitions", check_proportionality),
    ("rp == dtr at gamma = 1", check_gamma_one),
    ("pure discount: rp error < dtr error", check_pure_discount),
    ("score matches finite differences", check_gradient),
    ("servo clamp / saturation / time accounting", check_servo),
    ("eligibility trace closed form", check_trace),
]


def run_selftest(seed: int = 0, out=None) -> bool:
    import sys
    out = out or sys.stdout
    ok_all = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn(seed)
        except Exception as exc:  # report, don't abort the remaining checks
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=out)
    print(f"selftest {'passed' if ok_all else 'FAILED'}", file=out)
    return ok_all
