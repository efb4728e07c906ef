"""Riemann-sum approximations of the discounted integral return.

Two estimators are compared against a fine mid-point reference:

* ``dtr_sum`` -- what a discrete-time return computes on a discretized
  continuous-time task: discount evaluated at the left end of each interval,
  reward at the right end.
* ``rp_sum`` -- a proper right-point Riemann sum, discount and reward both
  at the right end.

Both are written for an arbitrary weighting signal in ``generalized_*``; the
exponential-discount versions are the special case ``f(tau) = gamma**(tau - t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._backend import kernels
from .signals import Signal, SignalDomain

REFERENCE_INTERVALS = 10_000


@dataclass(frozen=True)
class Partition:
    """Strictly increasing interval endpoints ``tau_0 < ... < tau_n``."""

    endpoints: np.ndarray

    def __post_init__(self):
        e = np.array(self.endpoints, dtype=float)
        if e.ndim != 1 or e.size < 2:
            raise ValueError("a partition needs at least two endpoints")
        if not np.all(np.diff(e) > 0.0):
            raise ValueError("partition endpoints must be strictly increasing")
        e.setflags(write=False)
        object.__setattr__(self, "endpoints", e)

    @property
    def n(self) -> int:
        return self.endpoints.size - 1

    @property
    def start(self) -> float:
        return float(self.endpoints[0])

    @property
    def end(self) -> float:
        return float(self.endpoints[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.endpoints)

    @property
    def left(self) -> np.ndarray:
        return self.endpoints[:-1]

    @property
    def right(self) -> np.ndarray:
        return self.endpoints[1:]


@dataclass(frozen=True)
class DiscountSpec:
    """Per-second discount factor, ``0 < gamma <= 1``."""

    gamma: float

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")

    def weights(self, elapsed):
        """``gamma ** elapsed`` computed as ``exp(elapsed * ln gamma)``."""
        elapsed = np.asarray(elapsed, dtype=float)
        if self.gamma == 1.0:
            out = np.ones_like(elapsed)
        else:
            out = np.exp(elapsed * math.log(self.gamma))
        return float(out) if out.ndim == 0 else out


def discount_factor(gamma: float, elapsed: float) -> float:
    """Scalar ``gamma ** elapsed`` with the same convention as ``DiscountSpec``."""
    if gamma == 1.0:
        return 1.0
    return math.exp(elapsed * math.log(gamma))


@dataclass(frozen=True)
class ApproximationResult:
    value: float
    reference: float

    @property
    def abs_error(self) -> float:
        return abs(self.value - self.reference)


Weighting = Union[Signal, DiscountSpec]


def _weights_at(f: Weighting, tau: np.ndarray, origin: float) -> np.ndarray:
    if isinstance(f, DiscountSpec):
        return f.weights(tau - origin)
    return np.asarray(f(tau), dtype=float)


def uniform_partition(domain: SignalDomain, n: int) -> Partition:
    if n < 1:
        raise ValueError(f"need at least one interval, got n={n}")
    i = np.arange(n + 1)
    endpoints = domain.start + domain.length * (i / n)
    endpoints[-1] = domain.end
    return Partition(endpoints)


def stochastic_partition(domain: SignalDomain, n: int, rng: np.random.Generator) -> Partition:
    """Sort ``n + 1`` uniform draws and stretch them onto ``[start, end]``.

    Draw sets with repeated values are discarded and redrawn.
    """
    if n < 1:
        raise ValueError(f"need at least one interval, got n={n}")
    while True:
        u = np.sort(rng.random(n + 1))
        lo, hi = u[0], u[-1]
        if hi <= lo:
            continue
        endpoints = domain.start + (u - lo) / (hi - lo) * domain.length
        endpoints[0] = domain.start
        endpoints[-1] = domain.end
        if np.all(np.diff(endpoints) > 0.0):
            return Partition(endpoints)


def _product_sum(f_vals, g_vals, widths) -> float:
    return float(np.sum(f_vals * g_vals * widths))


def generalized_dtr_sum(f: Weighting, g: Signal, p: Partition) -> float:
    """``sum_i f(tau_i) g(tau_{i+1}) (tau_{i+1} - tau_i)``."""
    return _product_sum(_weights_at(f, p.left, p.start), np.asarray(g(p.right), dtype=float), p.widths)


def generalized_rp_sum(f: Weighting, g: Signal, p: Partition) -> float:
    """``sum_i f(tau_{i+1}) g(tau_{i+1}) (tau_{i+1} - tau_i)``."""
    return _product_sum(_weights_at(f, p.right, p.start), np.asarray(g(p.right), dtype=float), p.widths)


def dtr_sum(discount: DiscountSpec, g: Signal, p: Partition) -> float:
    return generalized_dtr_sum(discount, g, p)


def rp_sum(discount: DiscountSpec, g: Signal, p: Partition) -> float:
    return generalized_rp_sum(discount, g, p)


def discrete_return(gamma: float, rewards) -> float:
    """Unscaled discrete-time return ``sum_k gamma**k R_{k+1}``.

    Equivalent to ``dtr_sum`` on a partition of unit-width steps without the
    width factor; kept for unit tests only.
    """
    r = np.asarray(rewards, dtype=float)
    return float(np.sum(gamma ** np.arange(r.size) * r))


def midpoints(domain: SignalDomain, intervals: int = REFERENCE_INTERVALS) -> np.ndarray:
    width = domain.length / intervals
    return domain.start + (np.arange(intervals) + 0.5) * width


def midpoint_reference(f: Weighting, g: Signal, domain: SignalDomain,
                       intervals: int = REFERENCE_INTERVALS) -> float:
    """Compensated mid-point sum of ``f * g`` with ``intervals`` equal cells."""
    m = midpoints(domain, intervals)
    return reference_from_values(_weights_at(f, m, domain.start), np.asarray(g(m), dtype=float),
                                 domain, intervals)


def reference_from_values(f_vals: np.ndarray, g_vals: np.ndarray, domain: SignalDomain,
                          intervals: int = REFERENCE_INTERVALS) -> float:
    """Mid-point reference when both factors were already sampled at ``midpoints``."""
    return float(kernels.compensated_product_sum(np.ascontiguousarray(f_vals, dtype=float),
                                                 np.ascontiguousarray(g_vals, dtype=float),
                                                 domain.length / intervals))


def exact_discount_integral(gamma: float, domain: SignalDomain) -> float:
    """Closed form of ``int gamma**(tau - t) dtau`` over the domain."""
    if gamma == 1.0:
        return domain.length
    log_g = math.log(gamma)
    return -math.expm1(domain.length * log_g) / -log_g


def approximate(method: str, f: Weighting, g: Signal, p: Partition, reference: float) -> ApproximationResult:
    fn = {"dtr": generalized_dtr_sum, "rp": generalized_rp_sum}[method]
    return ApproximationResult(fn(f, g, p), reference)
