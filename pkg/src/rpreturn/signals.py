"""Random continuous-time reward signals.

Two families are provided, a sum of six sinusoids at fixed angular
frequencies and a sum of six Gaussian densities, plus pointwise products of
any two signals. All signals are immutable and vectorized over ``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Union

import numpy as np

TWO_PI = 2.0 * math.pi
PERIODIC_FREQUENCIES = (TWO_PI / 4, TWO_PI / 2, TWO_PI, 2 * TWO_PI, 4 * TWO_PI, 8 * TWO_PI)
N_TERMS = 6
_INV_SQRT_2PI = 1.0 / math.sqrt(TWO_PI)

ArrayLike = Union[float, np.ndarray]


class Signal(Protocol):
    def __call__(self, tau: ArrayLike) -> ArrayLike: ...


def _as_result(tau, out):
    if np.ndim(tau) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class SignalDomain:
    start: float = 0.0
    end: float = 3.0

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError(f"empty domain [{self.start}, {self.end}]")

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class PeriodicSignal:
    """``sum_i A_i sin(omega_i tau + phi_i)`` over the six fixed frequencies."""

    amplitudes: tuple[float, ...]
    phases: tuple[float, ...]
    frequencies: tuple[float, ...] = field(default=PERIODIC_FREQUENCIES, repr=False)

    def __post_init__(self):
        if len(self.amplitudes) != N_TERMS or len(self.phases) != N_TERMS:
            raise ValueError("periodic signal needs exactly 6 terms")
        if tuple(self.frequencies) != PERIODIC_FREQUENCIES:
            raise ValueError("frequencies are fixed")
        if not all(0.0 <= p < TWO_PI for p in self.phases):
            raise ValueError("phases must lie in [0, 2*pi)")
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))

    def term(self, i: int, tau: ArrayLike) -> ArrayLike:
        t = np.asarray(tau, dtype=float)
        return _as_result(tau, self.amplitudes[i] * np.sin(self.frequencies[i] * t + self.phases[i]))

    def __call__(self, tau: ArrayLike) -> ArrayLike:
        t = np.asarray(tau, dtype=float)
        out = np.zeros_like(t)
        for a, w, p in zip(self.amplitudes, self.frequencies, self.phases):
            out = out + a * np.sin(w * t + p)
        return _as_result(tau, out)

    def coefficients(self) -> list[float]:
        return [*self.amplitudes, *self.phases]


@dataclass(frozen=True)
class GaussianMixtureSignal:
    """Sum of six Gaussian bumps.

    By default each bump has unit peak height, ``exp(-(tau - mu)^2 / (2 sigma^2))``.
    With ``normalized=True`` it is the normal density instead (the bump divided
    by ``sigma sqrt(2 pi)``). ``weights`` lets tests switch components off.
    """

    means: tuple[float, ...]
    stds: tuple[float, ...]
    weights: tuple[float, ...] = (1.0,) * N_TERMS
    normalized: bool = False

    def __post_init__(self):
        if not (len(self.means) == len(self.stds) == len(self.weights) == N_TERMS):
            raise ValueError("gaussian mixture needs exactly 6 components")
        if not all(s > 0.0 for s in self.stds):
            raise ValueError("standard deviations must be positive")
        for name in ("means", "stds", "weights"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    def __call__(self, tau: ArrayLike) -> ArrayLike:
        t = np.asarray(tau, dtype=float)
        out = np.zeros_like(t)
        for w, mu, sigma in zip(self.weights, self.means, self.stds):
            z = (t - mu) / sigma
            bump = np.exp(-0.5 * z * z)
            if self.normalized:
                bump = bump * (_INV_SQRT_2PI / sigma)
            out = out + w * bump
        return _as_result(tau, out)

    def coefficients(self) -> list[float]:
        return [*self.means, *self.stds]


@dataclass(frozen=True)
class ProductSignal:
    left: Signal
    right: Signal

    def __call__(self, tau: ArrayLike) -> ArrayLike:
        return self.left(tau) * self.right(tau)


@dataclass(frozen=True)
class ConstantSignal:
    value: float = 1.0

    def __call__(self, tau: ArrayLike) -> ArrayLike:
        return _as_result(tau, np.full(np.shape(tau), float(self.value)))


def sample_periodic(rng: np.random.Generator) -> PeriodicSignal:
    amplitudes = rng.standard_normal(N_TERMS)
    phases = rng.uniform(0.0, TWO_PI, N_TERMS)
    # uniform() is half-open in theory but can round up to the bound
    phases = np.where(phases >= TWO_PI, 0.0, phases)
    return PeriodicSignal(tuple(amplitudes), tuple(phases))


def sample_gaussian_mixture(rng: np.random.Generator, domain: SignalDomain = SignalDomain(),
                            normalized: bool = False) -> GaussianMixtureSignal:
    means = rng.uniform(domain.start, domain.end, N_TERMS)
    stds = np.empty(N_TERMS)
    half = domain.length / 2.0
    for i in range(N_TERMS):
        s = 0.0
        while s <= 0.0:
            s = half * (1.0 - rng.random())  # (0, half]
        stds[i] = s
    return GaussianMixtureSignal(tuple(means), tuple(stds), normalized=normalized)


FAMILIES = {
    "periodic": sample_periodic,
    "gaussian_mixture": sample_gaussian_mixture,
}


def sample(family: str, rng: np.random.Generator) -> Signal:
    try:
        return FAMILIES[family](rng)
    except KeyError:
        raise ValueError(f"unknown signal family {family!r}") from None


def dump_record(signal: Signal) -> str:
    """One-line text record: a type tag followed by the coefficients.

    Products are written as ``product(<left>|<right>)``.
    """
    if isinstance(signal, PeriodicSignal):
        return "periodic " + " ".join(repr(c) for c in signal.coefficients())
    if isinstance(signal, GaussianMixtureSignal):
        tag = "gaussian_density" if signal.normalized else "gaussian_mixture"
        body = signal.coefficients()
        if any(w != 1.0 for w in signal.weights):
            body = body + list(signal.weights)
            tag += "_weighted"
        return tag + " " + " ".join(repr(c) for c in body)
    if isinstance(signal, ProductSignal):
        return f"product({dump_record(signal.left)}|{dump_record(signal.right)})"
    if isinstance(signal, ConstantSignal):
        return f"constant {signal.value!r}"
    raise TypeError(f"cannot dump {type(signal).__name__}")


def load_record(line: str) -> Signal:
    line = line.strip()
    if line.startswith("product(") and line.endswith(")"):
        inner = line[len("product("):-1]
        depth = 0
        for pos, ch in enumerate(inner):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "|" and depth == 0:
                return ProductSignal(load_record(inner[:pos]), load_record(inner[pos + 1:]))
        raise ValueError(f"malformed product record: {line!r}")
    tag, _, rest = line.partition(" ")
    values = [float(v) for v in rest.split()]
    if tag == "periodic":
        return PeriodicSignal(tuple(values[:6]), tuple(values[6:12]))
    if tag == "constant":
        return ConstantSignal(values[0])
    if tag.startswith("gaussian_"):
        weighted = tag.endswith("_weighted")
        base = tag[:-len("_weighted")] if weighted else tag
        weights = tuple(values[12:18]) if weighted else (1.0,) * N_TERMS
        return GaussianMixtureSignal(tuple(values[:6]), tuple(values[6:12]), weights,
                                     normalized=(base == "gaussian_density"))
    raise ValueError(f"unknown signal record tag {tag!r}")
