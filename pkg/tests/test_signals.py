import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rpreturn.rng import stream
from rpreturn.signals import (
    PERIODIC_FREQUENCIES,
    ConstantSignal,
    GaussianMixtureSignal,
    PeriodicSignal,
    ProductSignal,
    SignalDomain,
    dump_record,
    load_record,
    sample_gaussian_mixture,
    sample_periodic,
)

ZERO6 = (0.0,) * 6


class _ZeroNormal:
    """Stands in for a Generator whose normal draws are all zero."""

    def __init__(self, rng):
        self._rng = rng

    def standard_normal(self, size=None):
        return np.zeros(size)

    def uniform(self, *args, **kwargs):
        return self._rng.uniform(*args, **kwargs)


def test_frequencies_are_the_fixed_set():
    assert PERIODIC_FREQUENCIES == (math.pi / 2, math.pi, 2 * math.pi, 4 * math.pi, 8 * math.pi, 16 * math.pi)


def test_zero_amplitudes_give_zero_signal():
    s = sample_periodic(_ZeroNormal(np.random.default_rng(3)))
    tau = np.linspace(0.0, 3.0, 101)
    assert np.all(s(tau) == 0.0)
    assert s(1.7) == 0.0


def test_single_sinusoid_quarter_period():
    s = PeriodicSignal((1.0, 0, 0, 0, 0, 0), ZERO6)
    assert s(1.0) == pytest.approx(1.0, abs=1e-15)


def test_sampling_is_reproducible():
    a = sample_periodic(stream(42, "t"))
    b = sample_periodic(stream(42, "t"))
    assert a == b
    tau = np.linspace(0, 3, 50)
    assert np.array_equal(a(tau), b(tau))
    assert sample_gaussian_mixture(stream(42, "g")) == sample_gaussian_mixture(stream(42, "g"))


def test_sampled_parameters_respect_ranges():
    rng = stream(0, "ranges")
    for _ in range(500):
        p = sample_periodic(rng)
        assert all(0.0 <= ph < 2 * math.pi for ph in p.phases)
        g = sample_gaussian_mixture(rng)
        assert all(0.0 <= mu <= 3.0 for mu in g.means)
        assert all(0.0 < s <= 1.5 for s in g.stds)


def test_identical_components_peak():
    g = GaussianMixtureSignal((1.5,) * 6, (0.5,) * 6, normalized=True)
    expected = 6.0 / (0.5 * math.sqrt(2.0 * math.pi))
    assert g(1.5) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(4.7873, abs=5e-5)


def test_single_standard_normal_component():
    g = GaussianMixtureSignal((0.0,) * 6, (1.0,) * 6, weights=(1, 0, 0, 0, 0, 0), normalized=True)
    assert g(0.0) == pytest.approx(0.3989422804014327, rel=1e-15)


def test_unit_peak_bumps():
    g = GaussianMixtureSignal((1.0,) * 6, (0.3,) * 6, weights=(1, 0, 0, 0, 0, 0))
    assert g(1.0) == 1.0


def test_tail_decay():
    for normalized in (False, True):
        g = GaussianMixtureSignal((1.5,) * 6, (0.01,) * 6, normalized=normalized)
        assert g(0.0) < 1e-300


def test_product_of_identical_signals_is_square():
    s = sample_periodic(stream(1, "sq"))
    tau = np.linspace(0, 3, 77)
    assert np.array_equal(ProductSignal(s, s)(tau), s(tau) ** 2)


def test_constant_signal_scalar_and_array():
    c = ConstantSignal(2.5)
    assert c(0.3) == 2.5
    assert np.array_equal(c(np.zeros(4)), np.full(4, 2.5))


def test_invalid_construction():
    with pytest.raises(ValueError):
        PeriodicSignal((1.0,) * 5, (0.0,) * 5)
    with pytest.raises(ValueError):
        PeriodicSignal((1.0,) * 6, (7.0,) * 6)
    with pytest.raises(ValueError):
        GaussianMixtureSignal((1.0,) * 6, (0.0,) * 6)
    with pytest.raises(ValueError):
        SignalDomain(3.0, 3.0)


def test_dump_and_load_round_trip():
    rng = stream(5, "dump")
    p, g = sample_periodic(rng), sample_gaussian_mixture(rng)
    for s in (p, g, ProductSignal(p, g), ProductSignal(ProductSignal(g, p), p), ConstantSignal(3.0),
              GaussianMixtureSignal(g.means, g.stds, weights=(1, 0, 1, 0, 1, 0), normalized=True)):
        line = dump_record(s)
        assert "\n" not in line
        assert load_record(line) == s


amplitudes = st.lists(st.floats(-5, 5), min_size=6, max_size=6)
phases = st.lists(st.floats(0.0, 6.28), min_size=6, max_size=6)
taus = st.floats(0.0, 3.0)


@settings(max_examples=200, deadline=None)
@given(amplitudes, phases, taus)
def test_periodic_is_sum_of_terms(a, ph, tau):
    s = PeriodicSignal(tuple(a), tuple(ph))
    assert abs(s(tau) - sum(s.term(i, tau) for i in range(6))) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, 3.0), min_size=6, max_size=6),
       st.lists(st.floats(0.1, 1.5), min_size=6, max_size=6), taus)
def test_mixture_is_strictly_positive(mu, sigma, tau):
    assert GaussianMixtureSignal(tuple(mu), tuple(sigma))(tau) > 0.0
    assert GaussianMixtureSignal(tuple(mu), tuple(sigma), normalized=True)(tau) > 0.0


@settings(max_examples=100, deadline=None)
@given(amplitudes, phases, amplitudes, phases, taus)
def test_product_matches_factors_exactly(a1, p1, a2, p2, tau):
    f, g = PeriodicSignal(tuple(a1), tuple(p1)), PeriodicSignal(tuple(a2), tuple(p2))
    assert ProductSignal(f, g)(tau) == f(tau) * g(tau)
