import math

import numpy as np
import pytest

from critgraphs.bounds import (
    BoundParams,
    InadmissibleParameters,
    ceil_tolerant,
    check_mgf_condition,
    derive_params,
    dominating_law,
    k_from_A,
    tail_bound,
)
from critgraphs.models import ErConfig, IntersectionConfig, NrConfig, RegularPercolationConfig, nr_weights
from critgraphs.offspring import Binomial, Finite, verify_weight_sequence


def test_regular_params():
    p = derive_params(RegularPercolationConfig(4, 1000, 1 / 3))
    assert (p.delta, p.rho, p.epsilon, p.c_precondition) == (1.0, 1.0, 0.0, 0.0)
    assert p.p3 == pytest.approx(1 / 27, abs=1e-15)
    assert p.C == pytest.approx(4.0)
    # subcritical retention uses the same dominating law
    assert derive_params(RegularPercolationConfig(4, 1000, 0.1)).p3 == p.p3


def test_intersection_params():
    p = derive_params(IntersectionConfig(1000, 1.0, 1.0))
    assert (p.delta, p.rho, p.epsilon) == (5.0, 0.5, 0.0)
    q = derive_params(IntersectionConfig(1000, 4.0, 0.5))
    assert (q.delta, q.rho) == (3.0, 1.0)


def test_nr_params():
    cfg = nr_weights(10_000, 5)
    p = derive_params(cfg)
    report = verify_weight_sequence(5, [1_000, 10_000, 100_000, 1_000_000])
    assert p.epsilon == pytest.approx(report.c2_estimate * 10_000**-0.5, rel=1e-12)
    assert p.rho == pytest.approx(1 / (2 * cfg.max_weight))
    assert p.delta == pytest.approx(1 + 5 * report.c1_estimate)
    assert p.c_precondition == 1.0


def test_er_params():
    p = derive_params(ErConfig.critical(1000, 2.0))
    assert p.epsilon == pytest.approx(2.0 * 1000 ** (-1 / 3))
    assert derive_params(ErConfig.critical(1000, -1.0)).epsilon == 0.0


@pytest.mark.parametrize(
    "config",
    [
        RegularPercolationConfig(3, 10, 0.5),
        RegularPercolationConfig(4, 10, 0.5),
        IntersectionConfig(100, 2.0, 1.0),
        NrConfig(np.array([2.0, 1.0, 1.0])),
    ],
)
def test_inadmissible(config):
    with pytest.raises(InadmissibleParameters):
        derive_params(config)


def test_regular_p3_positive_iff_d_above_three():
    for d in range(4, 12):
        assert derive_params(RegularPercolationConfig(d, 100, 1 / (d - 1))).p3 > 0
    assert dominating_law(RegularPercolationConfig(3, 10, 0.5)).p3() == 0.0


def test_bound_value_example():
    params = BoundParams(1.0, 1.0, 0.0, 0.0, 1 / 27)
    tb = tail_bound(10**6, params, k=10**4)
    assert params.C == 4.0
    assert tb.value == pytest.approx(108.0, rel=1e-12)
    assert tb.certified


def test_bound_scaling_in_A():
    params = BoundParams(1.0, 1.0, 0.0, 0.0, 1 / 27)
    a = tail_bound(10**6, params, A=2.0)
    b = tail_bound(10**6, params, A=4.0)
    assert (a.k, b.k) == (20_000, 40_000)
    assert b.value / a.value == pytest.approx(2**-1.5, rel=1e-12)


def test_preconditions():
    params = BoundParams(1.0, 1.0, 0.0, 0.0, 0.5)
    assert tail_bound(10, params, k=1).rho_ok
    weak = BoundParams(1.0, 0.1, 0.5, 1.0, 0.5)
    tb = tail_bound(10, weak, k=16)
    assert not tb.rho_ok and not tb.epsilon_ok and not tb.certified
    assert tb.value > 0
    with pytest.raises(ValueError):
        tail_bound(10, params, k=0)
    with pytest.raises(ValueError):
        tail_bound(10, params, A=1.0)
    with pytest.raises(ValueError):
        tail_bound(10, params)


def test_bound_monotonicity():
    base = BoundParams(2.0, 1.0, 0.0, 0.5, 0.05)
    ks = [tail_bound(10**5, base, k=k).value for k in (10, 100, 1000)]
    assert ks[0] > ks[1] > ks[2]
    assert tail_bound(10**6, base, k=100).value > tail_bound(10**5, base, k=100).value
    lower_p3 = BoundParams(2.0, 1.0, 0.0, 0.5, 0.01)
    assert tail_bound(10**5, lower_p3, k=100).value > tail_bound(10**5, base, k=100).value


@pytest.mark.parametrize("delta,c", [(1.0, 0.0), (5.0, 0.0), (1.5, 1.0), (0.3, 2.5)])
def test_constant(delta, c):
    assert BoundParams(delta, 1.0, 0.0, c, 0.1).C == pytest.approx(1 + 3 * math.exp(delta + 2 * c - 1), rel=1e-12)


def test_params_validation():
    with pytest.raises(ValueError):
        BoundParams(0.0, 1.0, 0.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        BoundParams(1.0, 1.0, -1.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        BoundParams(1.0, 1.0, 0.0, 0.0, 0.0)


def test_tolerant_ceiling():
    assert k_from_A(10**6, 1.0) == 10_000
    assert k_from_A(1000, 1.5) == 150
    assert k_from_A(10**4, 1.0) == 465
    assert ceil_tolerant(2.3) == 3
    assert ceil_tolerant(7.0) == 7


@pytest.mark.parametrize("n", [100, 1000, 10_000])
@pytest.mark.parametrize(
    "make",
    [
        lambda n: RegularPercolationConfig(4, n, 1 / 3),
        lambda n: IntersectionConfig(n, 1.0, 1.0),
        lambda n: nr_weights(n, 5),
    ],
    ids=["regular", "intersection", "nr"],
)
def test_mgf_condition_holds_for_models(make, n):
    cfg = make(n)
    report = check_mgf_condition(dominating_law(cfg), derive_params(cfg))
    assert report.passed()
    assert report.grid.size == 1000
    assert report.grid.min() > 0 and report.grid.max() < derive_params(cfg).rho


def test_mgf_condition_fails_for_mean_two():
    report = check_mgf_condition(Finite({2: 1.0}), BoundParams(0.1, 1.0, 0.0, 0.0, 1.0))
    assert not report.passed()
    assert report.max_violation > 0


def test_mgf_margin_matches_direct_evaluation():
    law = Binomial(3, 1 / 3)
    params = BoundParams(1.0, 1.0, 0.0, 0.0, law.p3())
    report = check_mgf_condition(law, params, grid_size=5)
    r = np.arange(1, 6) / 6
    direct = np.log((2 / 3 + np.exp(r) / 3) ** 3) - (r + r**2)
    assert np.allclose(report.margin, direct, atol=1e-14)


def test_nr_precondition_product_vanishes():
    values = []
    for n in (10**3, 10**4, 10**5, 10**6):
        p = derive_params(nr_weights(n, 5))
        values.append(p.epsilon * math.sqrt(k_from_A(n, 2.0)))
    assert all(a > b for a, b in zip(values, values[1:]))
