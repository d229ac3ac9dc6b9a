import math

import mpmath
import pytest

from beurling.local_l2 import _power_sum_checkpoints, local_l2_demo, tail_estimate


def test_power_sums_against_mpmath():
    p = 1.2
    got = _power_sum_checkpoints(p, [1, 10, 1000, 12345])
    for J, v in zip([1, 10, 1000, 12345], got):
        exact = mpmath.zeta(p) - mpmath.zeta(p, J + 1)
        assert v == pytest.approx(float(exact), rel=1e-13)


def test_tail_estimate_against_hurwitz_zeta():
    for p, J in ((1.2, 10 ** 4), (1.5, 1000), (2.0, 50)):
        assert tail_estimate(p, J) == pytest.approx(float(mpmath.zeta(p, J + 1)), rel=1e-8)


def test_convergent_case_limit():
    d = local_l2_demo(0.2)
    assert d.classification == "CONVERGENT"
    limit = float(mpmath.zeta(1.2) / 0.6)
    assert d.limit_estimate == pytest.approx(limit, rel=1e-9)
    assert d.growth_exponent == pytest.approx(-0.2, abs=0.01)


def test_threshold_and_divergent_cases():
    d = local_l2_demo(0.25)
    assert d.classification == "DIVERGENT" and d.limit_estimate is None
    assert abs(d.growth_exponent) < 0.05
    # S_J = 2 H_J ~ 2 ln J
    assert d.log_slope == pytest.approx(2.0, rel=1e-3)
    assert d.partial_sums[-1] == pytest.approx(2 * float(mpmath.harmonic(10 ** 6)), rel=1e-13)
    d = local_l2_demo(0.3)
    assert d.classification == "DIVERGENT"
    assert d.growth_exponent == pytest.approx(0.2, abs=0.01)
    assert d.predicted_exponent == pytest.approx(0.2)


def test_checkpoints_and_validation():
    d = local_l2_demo(0.1, j_max=5000)
    assert d.checkpoints == (1, 10, 100, 1000, 5000)
    assert d.partial_sums[0] == pytest.approx(1 / 0.8)
    assert all(b > a for a, b in zip(d.partial_sums, d.partial_sums[1:]))
    for bad in (0.0, 0.5, -1, 0.7):
        with pytest.raises(ValueError):
            local_l2_demo(bad)
    with pytest.raises(ValueError):
        local_l2_demo(0.2, j_max=50)
    assert math.isfinite(d.log_slope)
