import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rpreturn import quadrature as q
from rpreturn.rng import stream
from rpreturn.signals import (
    PERIODIC_FREQUENCIES,
    ConstantSignal,
    PeriodicSignal,
    SignalDomain,
    sample,
    sample_periodic,
)

D = SignalDomain()
ONE = ConstantSignal(1.0)


def test_uniform_partition_examples():
    assert np.array_equal(q.uniform_partition(D, 3).endpoints, [0.0, 1.0, 2.0, 3.0])
    assert np.array_equal(q.uniform_partition(D, 1).endpoints, [0.0, 3.0])
    p = q.uniform_partition(D, 5)
    np.testing.assert_allclose(p.endpoints, [0.0, 0.6, 1.2, 1.8, 2.4, 3.0], rtol=1e-15)
    np.testing.assert_allclose(p.widths, 0.6, rtol=1e-15)


def test_uniform_partition_rejects_zero():
    with pytest.raises(ValueError):
        q.uniform_partition(D, 0)


def test_partition_invariants_enforced():
    with pytest.raises(ValueError):
        q.Partition(np.array([0.0, 1.0, 1.0, 3.0]))
    with pytest.raises(ValueError):
        q.Partition(np.array([0.0]))


def test_stochastic_partition_single_interval():
    for seed in range(20):
        p = q.stochastic_partition(D, 1, stream(seed, "p"))
        assert np.array_equal(p.endpoints, [0.0, 3.0])


def test_stochastic_partition_reproducible_and_width_sum():
    a = q.stochastic_partition(D, 5, stream(9, "p"))
    b = q.stochastic_partition(D, 5, stream(9, "p"))
    assert np.array_equal(a.endpoints, b.endpoints)
    assert a.start == 0.0 and a.end == 3.0
    assert abs(a.widths.sum() - 3.0) <= 1e-12


def test_stochastic_partition_mean_width():
    # each partition's mean width is (T - t) / n exactly; the Monte Carlo check is
    # on the pooled widths of the interior intervals
    rng = stream(0, "mean-width")
    widths = np.concatenate([q.stochastic_partition(D, 10, rng).widths for _ in range(100_000)])
    assert widths.mean() == pytest.approx(0.3, rel=1e-12)
    assert widths.std() > 0.1


def test_stochastic_partition_rejects_duplicates():
    class Stuck:
        def __init__(self):
            self.calls = 0

        def random(self, size):
            self.calls += 1
            if self.calls == 1:
                return np.array([0.2, 0.2, 0.9])
            return np.array([0.1, 0.5, 0.9])

    rng = Stuck()
    p = q.stochastic_partition(D, 2, rng)
    assert rng.calls == 2
    np.testing.assert_allclose(p.endpoints, [0.0, 1.5, 3.0])


def test_dtr_examples():
    assert q.dtr_sum(q.DiscountSpec(1.0), ONE, q.uniform_partition(D, 3)) == 3.0
    assert q.dtr_sum(q.DiscountSpec(0.5), ONE, q.uniform_partition(D, 1)) == 3.0
    assert q.dtr_sum(q.DiscountSpec(0.5), ONE, q.uniform_partition(D, 3)) == pytest.approx(1.75, rel=1e-15)


def test_dtr_gamma_one_any_partition():
    rng = stream(1, "dtr1")
    for n in (1, 2, 7, 50, 100):
        p = q.stochastic_partition(D, n, rng)
        assert q.dtr_sum(q.DiscountSpec(1.0), ONE, p) == pytest.approx(3.0, abs=4 * np.spacing(3.0))


def test_rp_examples():
    p3 = q.uniform_partition(D, 3)
    assert q.rp_sum(q.DiscountSpec(0.5), ONE, p3) == pytest.approx(0.875, rel=1e-15)
    assert q.rp_sum(q.DiscountSpec(0.5), ONE, p3) == pytest.approx(0.5 * 1.75, rel=1e-15)
    assert q.rp_sum(q.DiscountSpec(0.25), ONE, q.uniform_partition(D, 1)) == pytest.approx(0.046875, rel=1e-15)


def test_rp_equals_dtr_at_gamma_one():
    g = sample_periodic(stream(2, "g1"))
    p = q.stochastic_partition(D, 17, stream(2, "p1"))
    assert q.rp_sum(q.DiscountSpec(1.0), g, p) == q.dtr_sum(q.DiscountSpec(1.0), g, p)


def test_discount_spec_rejects_zero():
    with pytest.raises(ValueError):
        q.DiscountSpec(0.0)
    with pytest.raises(ValueError):
        q.DiscountSpec(1.5)


def test_generalized_with_unit_weight():
    g = sample_periodic(stream(3, "u"))
    p = q.uniform_partition(D, 10)
    assert q.generalized_dtr_sum(ONE, g, p) == q.generalized_rp_sum(ONE, g, p)


def test_generalized_constant_product():
    c = ConstantSignal(1.7)
    for n in (1, 5, 10):
        p = q.uniform_partition(D, n)
        assert q.generalized_dtr_sum(c, c, p) == pytest.approx(3 * 1.7 ** 2, rel=1e-14)
        assert q.generalized_rp_sum(c, c, p) == pytest.approx(3 * 1.7 ** 2, rel=1e-14)


def _loop_eval(sig, tau):
    total = 0.0
    for a, w, ph in zip(sig.amplitudes, PERIODIC_FREQUENCIES, sig.phases):
        total += a * math.sin(w * tau + ph)
    return total


def test_generalized_sums_match_straight_loop():
    rng = stream(7, "pair")
    f, g = sample_periodic(rng), sample_periodic(rng)
    n = 10
    tau = [3.0 * i / n for i in range(n + 1)]
    want_rp = sum(_loop_eval(f, tau[i + 1]) * _loop_eval(g, tau[i + 1]) * (tau[i + 1] - tau[i]) for i in range(n))
    want_dtr = sum(_loop_eval(f, tau[i]) * _loop_eval(g, tau[i + 1]) * (tau[i + 1] - tau[i]) for i in range(n))
    p = q.uniform_partition(D, n)
    assert q.generalized_rp_sum(f, g, p) == pytest.approx(want_rp, rel=1e-12, abs=1e-12)
    assert q.generalized_dtr_sum(f, g, p) == pytest.approx(want_dtr, rel=1e-12, abs=1e-12)


def test_midpoint_reference_examples():
    assert q.midpoint_reference(ONE, ONE, D) == pytest.approx(3.0, abs=1e-10)
    assert q.midpoint_reference(q.DiscountSpec(0.5), ONE, D) == pytest.approx(0.875 / math.log(2), abs=1e-6)
    assert 0.875 / math.log(2) == pytest.approx(1.2623582, abs=1e-7)
    sin2pi = PeriodicSignal((0, 0, 1.0, 0, 0, 0), (0.0,) * 6)
    assert abs(q.midpoint_reference(ONE, sin2pi, D)) < 1e-8


def test_midpoint_reference_backends_agree():
    from rpreturn._backend import available, load
    rng = stream(4, "ref")
    a, b = rng.normal(size=10_000), rng.normal(size=10_000)
    values = [load(name).compensated_product_sum(a, b, 3e-4) for name in available()]
    exact = math.fsum((a * b * 3e-4).tolist())
    for v in values:
        assert v == pytest.approx(exact, rel=0, abs=1e-15)


def test_exact_discount_integral():
    assert q.exact_discount_integral(1.0, D) == 3.0
    assert q.exact_discount_integral(0.5, D) == pytest.approx(0.875 / math.log(2), rel=1e-15)


def test_discrete_return_unit_steps():
    assert q.discrete_return(0.5, [1.0, 1.0, 1.0]) == 1.75
    p = q.Partition(np.arange(4.0))
    assert q.dtr_sum(q.DiscountSpec(0.5), ONE, p) == q.discrete_return(0.5, [1.0, 1.0, 1.0])


def test_approximation_result():
    r = q.approximate("rp", q.DiscountSpec(0.5), ONE, q.uniform_partition(D, 3), 1.0)
    assert r.value == pytest.approx(0.875)
    assert r.abs_error == pytest.approx(0.125)


gammas = st.floats(0.01, 0.999)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000), gammas, st.integers(1, 100))
def test_uniform_proportionality(seed, gamma, n):
    rng = stream(seed, "prop")
    g = sample(["periodic", "gaussian_mixture"][seed % 2], rng)
    d = q.DiscountSpec(gamma)
    p = q.uniform_partition(D, n)
    rp, dtr = q.rp_sum(d, g, p), q.dtr_sum(d, g, p)
    # scale by the sum of absolute terms so cancellation in rp does not inflate the ratio
    scale = q.rp_sum(d, lambda t: np.abs(g(t)), p)
    assert abs(rp - q.discount_factor(gamma, 3.0 / n) * dtr) <= 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000), gammas, st.integers(1, 100))
def test_pure_discount_ordering_any_partition(seed, gamma, n):
    p = q.stochastic_partition(D, n, stream(seed, "pd"))
    d = q.DiscountSpec(gamma)
    exact = q.exact_discount_integral(gamma, D)
    rp, dtr = q.rp_sum(d, ONE, p), q.dtr_sum(d, ONE, p)
    assert rp < exact < dtr
    assert exact - rp < dtr - exact
