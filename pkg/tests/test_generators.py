import math
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beurling.generators import (DYADIC_MEASURE_LIMIT, DyadicCertificate, ModelSetSpec, NotFoundUpTo,
                                 PowerScaled, almost_period_quality, almost_period_search,
                                 bessel_blowup_probe, dyadic_measure_bound, dyadic_membership,
                                 frame_shift_transfer, gap_stats, intersection_witness, lattice, model_set,
                                 perturbed_lattice, select_almost_periods)
from beurling.quadratic import QuadraticIrrational


def in_component(x: Fraction, j: int, k: int) -> bool:
    """Definition: |x - k/2^j| < 2^-(j + |k| + 1)."""
    d = abs(x - Fraction(k, 2 ** j))
    P = j + abs(k) + 1
    if d == 0:
        return True
    # d >= 1/denominator, so a radius exponent beyond its bit length cannot fit d
    if P > d.denominator.bit_length():
        return False
    return d < Fraction(1, 2 ** P)


# --- lattices and model sets ----------------------------------------------------


def test_lattice_examples():
    mu = lattice(0.5, (-10, 10))
    assert mu.count == 41 and mu.positions[0] == -10 and mu.positions[-1] == 10
    assert lattice(1, (0.5, 3.5)).positions.tolist() == [1, 2, 3]
    with pytest.raises(ValueError):
        lattice(0, (0, 1))


def test_perturbed_lattice_seeded():
    a = perturbed_lattice(1.0, 0.2, 5, (0, 100))
    b = perturbed_lattice(1.0, 0.2, 5, (0, 100))
    assert np.array_equal(a.positions, b.positions)
    base = np.rint(a.positions)
    assert np.all(np.abs(a.positions - base) <= 0.2)
    assert np.array_equal(perturbed_lattice(1.0, 0.0, 1, (0, 10)).positions, np.arange(11.0))
    with pytest.raises(ValueError):
        perturbed_lattice(1.0, 0.5, 1, (0, 10))


def brute_model_set(a, b):
    """m + n sqrt2 with m - n sqrt2 in [0, 1): m = ceil(n sqrt2) via integer square roots."""
    getcontext().prec = 50
    r = Decimal(2).sqrt()
    out = []
    for n in range(-400, 401):
        fl = math.isqrt(2 * n * n)
        m = 0 if n == 0 else (fl + 1 if n > 0 else -fl)
        x = m + n * r
        if a <= x <= b:
            out.append(float(x))
    return sorted(out)


def test_model_set_matches_high_precision_enumeration():
    spec = ModelSetSpec(QuadraticIrrational.parse("sqrt2"), (0, 1), (0, 200))
    mu = model_set(spec)
    assert mu.positions.tolist() == brute_model_set(0, 200)


def test_model_set_structure():
    spec = ModelSetSpec(QuadraticIrrational.parse("sqrt2"), (0, 1), (0, 1000))
    mu = model_set(spec)
    g = np.diff(mu.positions)
    # a cut-and-project set with an interval window has at most three gap lengths
    assert len(np.unique(np.round(g, 9))) <= 3
    st_ = gap_stats(mu)
    assert st_.min_gap > 1 and st_.max_gap < 5
    assert mu.count / 1000 == pytest.approx(spec.expected_density, rel=0.01)
    assert spec.expected_density == pytest.approx(1 / (2 * math.sqrt(2)))


def test_model_set_exact_boundary():
    # window end exactly at a conjugate value: 1 - sqrt2 * 1 is excluded from [.., 1 - sqrt2)
    th = QuadraticIrrational.parse("sqrt2")
    edge = QuadraticIrrational.parse("1-sqrt2")
    mu_open = model_set(ModelSetSpec(th, (-1, edge), (-5, 5)))
    mu_closed = model_set(ModelSetSpec(th, (edge, 1), (-5, 5)))
    x = 1 + math.sqrt(2)
    assert x not in mu_open.positions.tolist()
    assert x in mu_closed.positions.tolist()


def test_model_set_empty_and_invalid():
    spec = ModelSetSpec(QuadraticIrrational.parse("sqrt2"), (0.5, 0.5), (0, 10))
    assert spec.is_empty and model_set(spec).count == 0
    with pytest.raises(ValueError):
        ModelSetSpec(QuadraticIrrational.parse("2"), (0, 1), (0, 10))


# --- almost periods --------------------------------------------------------------


def test_almost_period_quality_direct(rng):
    mu = lattice(1, (0, 50))
    xs = rng.uniform(0, 3, 20)
    direct = [max(abs(np.exp(-2j * np.pi * mu.positions * x) - 1)) for x in xs]
    assert np.allclose(almost_period_quality(mu, xs), direct, atol=1e-12)
    assert almost_period_quality(mu, 3.0)[0] == pytest.approx(0, abs=1e-9)


def test_almost_period_search_and_selection():
    mu = lattice(1, (0, 50))
    hits = almost_period_search(mu, (0.5, 3.5), 0.25, 0.1)
    assert [x for x, _ in hits] == [1.0, 2.0, 3.0]
    assert select_almost_periods([(1.0, 0), (1.05, 0), (2.0, 0.1)], 2, 0.1) == [(1.0, 0), (2.0, 0.1)]


def test_bessel_probe_single_node_and_lattice():
    mu = lattice(1, (0, 3000))
    p = bessel_blowup_probe(mu, [0.3], 100)
    assert p.ratio == pytest.approx(1.0)
    # integer nodes: |sum_j e^{-2 pi i lam j}|^2 = N^2 on the integers
    p = bessel_blowup_probe(mu, [0, 1, 2, 3], 100)
    assert p.ratio == pytest.approx(4.0)


# --- dyadic set -------------------------------------------------------------------


def test_dyadic_membership_examples():
    assert dyadic_membership(0, 10) == DyadicCertificate(0, 0)
    assert dyadic_membership(0.75, 10) == DyadicCertificate(2, 3)
    assert dyadic_membership(-0.75, 10) == DyadicCertificate(2, -3)
    assert dyadic_membership(0.65, 20) == NotFoundUpTo(20)
    with pytest.raises(ValueError):
        dyadic_membership(0.1, -1)


@settings(max_examples=200)
@given(st.integers(-2000, 2000), st.integers(0, 9))
def test_dyadic_membership_against_definition(num, e):
    x = Fraction(num, 2 ** e)
    j_max = 8
    cert = dyadic_membership(x, j_max)
    expect = None
    for j in range(j_max + 1):
        ks = [k for k in range(-2100 * 2 ** j // 2 ** e - 2, 2100 * 2 ** j // 2 ** e + 3) if in_component(x, j, k)]
        if ks:
            expect = (j, min(ks, key=lambda k: (abs(k), -k)))
            break
    if expect is None:
        assert cert == NotFoundUpTo(j_max)
    else:
        assert (cert.j, cert.k) == expect


def test_measure_bound():
    assert dyadic_measure_bound(0) == 3
    assert dyadic_measure_bound(3) == Fraction(45, 8)
    assert dyadic_measure_bound() == DYADIC_MEASURE_LIMIT == 6
    # each level j has components of total length sum_k 2 * 2^-(j+|k|+1) = 3 / 2^j
    for j in range(4):
        total = sum(Fraction(2, 2 ** (j + abs(k) + 1)) for k in range(-200, 201))
        assert abs(total - Fraction(3, 2 ** j)) < Fraction(1, 2 ** 150)


def test_power_scaled():
    a = PowerScaled(Fraction(3), 10 ** 9)
    b = PowerScaled(Fraction(1), 5)
    assert a < b and not b < a and a.is_positive()
    assert float(PowerScaled(Fraction(3, 2), 2)) == 0.375
    assert float(a) == 0.0
    assert a.log2() == pytest.approx(math.log2(3) - 10 ** 9)


def check_witness(shifts):
    w = intersection_witness(shifts)
    assert w.validate() and all(w.memberships())
    # sample points of J and check the definition directly
    r = Fraction(1, 2 ** w.radius_exponent) if w.radius_exponent < 4000 else None
    pts = [w.center] + ([w.center + r * Fraction(t, 8) for t in (-7, -3, 3, 7)] if r else [])
    for p in pts:
        assert in_component(p, 0, 0)
        for s in w.steps:
            assert in_component(p - Fraction(s.shift), s.j, s.k)
    return w


def test_witness_examples():
    w = check_witness([0.5])
    assert w.z == 0 and w.interval() == (-0.125, 0.125)
    check_witness([])
    check_witness([0.3, -7.2, 9.99])


def test_witness_random_lists(rng):
    for _ in range(100):
        shifts = rng.uniform(-10, 10, int(rng.integers(1, 6))).tolist()
        check_witness(shifts)


def test_shift_transfer_examples():
    assert frame_shift_transfer([0]).eps_max.mantissa * Fraction(1, 2 ** frame_shift_transfer([0]).eps_max.exponent) == 1
    assert float(frame_shift_transfer([0.5]).eps_max) == 0.25


def test_shift_transfer_cubes_fit(rng):
    for _ in range(40):
        shifts = rng.uniform(-10, 10, int(rng.integers(1, 4))).tolist()
        t = frame_shift_transfer(shifts)
        assert t.eps_max.is_positive()
        eps = float(t.eps_max)
        if eps == 0.0:
            continue
        half = Fraction(eps) / 2 * Fraction(999, 1000)
        for p in (t.z, *[Fraction(x) - t.z for x in shifts]):
            for q in (p - half, p + half):
                assert isinstance(dyadic_membership(q, 70), DyadicCertificate)
