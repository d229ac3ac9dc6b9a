import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from beurling.measure import (PointMeasure, PointSetParseError, TrigPolynomial, Window, apply_envelope,
                              lebesgue_approx, load_point_set, load_report, mass, mass_linear_scan,
                              translation_bounded_check, window_masses, write_point_set)


def integers(a, b):
    return PointMeasure.from_atoms(np.arange(a, b + 1, dtype=float))


# --- construction and file format -------------------------------------------------


def test_load_default_weights(tmp_path):
    f = tmp_path / "z.pts"
    f.write_text("0\n1\n2\n")
    mu = load_point_set(f)
    assert mu.count == 3
    assert mu.weights.tolist() == [1.0, 1.0, 1.0]
    assert mu.extent == (0.0, 2.0)
    assert load_report(mu) == {"count": 3, "extent": [0.0, 2.0], "totalMass": 3.0}


def test_load_merges_duplicates(tmp_path):
    f = tmp_path / "d.pts"
    f.write_text("0 2.0\n0 3.0\n")
    mu = load_point_set(f)
    assert mu.count == 1 and mu.weights[0] == 5.0


def test_load_merges_on_decimal_text(tmp_path):
    f = tmp_path / "d.pts"
    f.write_text("# header\n0.10 1\n0.1 2   # same point\n\n1e-1 3\n0.3\n")
    mu = load_point_set(f)
    assert mu.positions.tolist() == [0.1, 0.3]
    assert mu.weights.tolist() == [6.0, 1.0]


@pytest.mark.parametrize("text, line", [("abc", 1), ("0\n1 2 3\n", 2), ("0\n\n1 x\n", 3), ("nan\n", 1)])
def test_load_parse_errors_report_line(tmp_path, text, line):
    f = tmp_path / "bad.pts"
    f.write_text(text)
    with pytest.raises(PointSetParseError) as err:
        load_point_set(f)
    assert err.value.lineno == line
    assert f"line {line}" in str(err.value)


def test_load_rejects_negative_weight(tmp_path):
    f = tmp_path / "neg.pts"
    f.write_text("0 1\n1 -0.5\n")
    with pytest.raises(PointSetParseError, match="negative"):
        load_point_set(f)


def test_planar_load(tmp_path):
    f = tmp_path / "p.pts"
    f.write_text("0 0\n1 0 2\n0 0 1\n")
    mu = load_point_set(f, dimension=2)
    assert mu.dimension == 2
    assert mu.positions.tolist() == [[0.0, 0.0], [1.0, 0.0]]
    assert mu.weights.tolist() == [2.0, 2.0]


def test_write_round_trip(tmp_path):
    mu = PointMeasure.from_atoms([math.sqrt(2), -1 / 3, 5.0], [0.25, 1.0, 3.5])
    f = tmp_path / "rt.pts"
    write_point_set(mu, f, header="round trip")
    back = load_point_set(f)
    assert np.array_equal(back.positions, mu.positions)
    assert np.array_equal(back.weights, mu.weights)


def test_invariants_enforced():
    with pytest.raises(ValueError):
        PointMeasure(np.array([1.0, 0.0]), np.ones(2), (0, 1))
    with pytest.raises(ValueError):
        PointMeasure.from_atoms([0.0], [-1.0])
    with pytest.raises(ValueError):
        PointMeasure.from_atoms([0.0, 5.0], extent=(0, 1))
    mu = integers(0, 3)
    with pytest.raises(ValueError):
        mu.positions[0] = 7.0
    assert np.all(np.diff(mu.prefix) >= 0)
    assert mu.prefix[-1] == mu.total_mass == 4


# --- window mass ------------------------------------------------------------------


def test_mass_examples():
    mu = integers(-100, 100)
    assert mass(mu, Window(0.5, 3.0)) == 3
    assert mass(mu, Window(0.0, 10.0)) == 11
    assert mass(mu, Window(500.0, 3.0)) == 0


def test_window_rejects_nonpositive_side():
    with pytest.raises(ValueError):
        Window(0.0, 0.0)


def test_mass_matches_linear_scan_on_random_windows(rng):
    pos = np.sort(rng.uniform(-50, 50, 3000))
    mu = PointMeasure.from_atoms(pos, rng.exponential(size=3000))
    t = rng.uniform(-60, 60, 10_000)
    h = rng.uniform(0.01, 30, 10_000)
    for ti, hi in zip(t[:2000], h[:2000]):
        w = Window(float(ti), float(hi))
        assert mass(mu, w) == pytest.approx(mass_linear_scan(mu, w), rel=1e-12, abs=1e-12)
    # vectorised path on all 10^4 windows
    direct = np.array([mu.weights[(pos >= a) & (pos <= a + b)].sum() for a, b in zip(t, h)])
    vec = np.array([window_masses(mu, a, b) for a, b in zip(t, h)])
    assert np.allclose(vec, direct, rtol=1e-12, atol=1e-10)


def test_planar_mass(rng):
    pts = rng.uniform(0, 10, (500, 2))
    mu = PointMeasure.from_atoms(pts)
    for _ in range(200):
        w = Window(tuple(rng.uniform(-1, 9, 2)), float(rng.uniform(0.1, 4)))
        assert mass(mu, w) == pytest.approx(mass_linear_scan(mu, w))


def test_mass_additive_over_partition():
    mu = lebesgue_approx(0.013, (0, 10))
    cuts = np.linspace(0, 10, 11)
    # half-open pieces: shift each right end down by less than the spacing
    total = sum(mass(mu, Window(a, b - a - 1e-6)) for a, b in zip(cuts[:-1], cuts[1:]))
    assert total == pytest.approx(mu.total_mass, rel=1e-12)


# --- envelopes --------------------------------------------------------------------


def test_trig_polynomial_sorted_and_merged():
    P = TrigPolynomial.from_terms([(1.0, 2), (0.0, 1), (1.0, -1)])
    assert P.frequencies.tolist() == [0.0, 1.0]
    assert P.coefficients.tolist() == [1, 1]
    with pytest.raises(ValueError):
        TrigPolynomial(np.array([1.0, 0.0]), np.ones(2))


def test_trig_polynomial_evaluation_closed_form():
    P = TrigPolynomial.from_terms([(0.0, 1), (math.sqrt(2), 2j)])
    lam = np.linspace(-5, 5, 101)
    direct = 1 + 2j * np.exp(-2j * np.pi * math.sqrt(2) * lam)
    assert np.allclose(P(lam), direct, atol=1e-13)


def test_envelope_examples():
    mu = integers(-20, 20)
    assert np.array_equal(apply_envelope(mu, TrigPolynomial.constant()).weights, mu.weights)
    killed = apply_envelope(mu, TrigPolynomial.from_terms([(0, 1), (1, -1)]))
    assert np.all(killed.weights == 0) and killed.count == mu.count and killed.zero_weight.all()
    doubled = apply_envelope(mu, TrigPolynomial.from_terms([(0, 1), (1, 1)]))
    assert np.all(doubled.weights == 4)


coeffs = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
freqs = st.floats(-3, 3, allow_nan=False)


@given(st.lists(st.tuples(freqs, coeffs), min_size=1, max_size=4),
       st.lists(st.tuples(freqs, coeffs), min_size=1, max_size=4))
def test_envelope_composition(p_terms, q_terms):
    mu = PointMeasure.from_atoms(np.linspace(-3000.3, 4100.1, 257), np.linspace(0.5, 2, 257))
    P, Q = TrigPolynomial.from_terms(p_terms), TrigPolynomial.from_terms(q_terms)
    twice = apply_envelope(apply_envelope(mu, P), Q).weights
    once = apply_envelope(mu, P * Q).weights
    scale = np.max(np.abs(once))
    if scale > 0:
        assert np.max(np.abs(twice - once)) / scale < 1e-12


def test_phases_against_exact_arithmetic(rng):
    P = TrigPolynomial.from_terms([(math.sqrt(2), 1), (-math.pi, 1)])
    Q = TrigPolynomial.from_terms([(0.1, 1), (1 / 3, 1)])
    PQ = P * Q
    lam = rng.uniform(-1e6, 1e6, 50)
    ph = PQ.phases(lam)
    exact_freqs = sorted(Fraction(a) + Fraction(b) for a in (math.sqrt(2), -math.pi) for b in (0.1, 1 / 3))
    for i, f in enumerate(exact_freqs):
        assert float(PQ.frequencies[i]) + float(PQ.frequency_errors[i]) == float(f)
        for l, got in zip(lam, ph[:, i]):
            t = Fraction(l) * f
            want = float(t - round(t))
            assert abs(got - want) < 1e-15


def test_mean_square():
    assert TrigPolynomial.constant().mean_square() == 1
    assert TrigPolynomial.from_terms([(0, 1), (1, -1)]).mean_square() == 2
    assert TrigPolynomial.from_terms([(5, 3)]).mean_square() == 9


# --- Lebesgue surrogate and translation bound --------------------------------------


def test_lebesgue_approx_examples():
    mu = lebesgue_approx(0.01, (0, 1))
    assert mu.count == 100
    assert mu.total_mass == pytest.approx(1.0, abs=1e-12)
    # closed window just short of 0.5 holds the 50 atoms of [0, 0.5)
    assert mass(mu, Window(0.0, 0.495)) == pytest.approx(0.5)
    mu3 = lebesgue_approx(1, (0, 3))
    assert mu3.positions.tolist() == [0, 1, 2] and mu3.weights.tolist() == [1, 1, 1]
    with pytest.raises(ValueError):
        lebesgue_approx(0, (0, 1))


def test_translation_bounded_examples():
    assert translation_bounded_check(integers(-50, 50)).sup_mass == 2
    tb = translation_bounded_check(lebesgue_approx(0.01, (0, 10)))
    # oracle: brute-force over atom-aligned windows
    mu = lebesgue_approx(0.01, (0, 10))
    brute = max(mu.weights[(mu.positions >= t - 1e-12) & (mu.positions <= t + 1 + 1e-12)].sum() for t in mu.positions)
    assert tb.sup_mass == pytest.approx(brute) and tb.sup_mass == pytest.approx(1.01)
    assert translation_bounded_check(PointMeasure.from_atoms([0, 0.1, 0.2])).sup_mass == 3


def test_translation_bound_is_exact_sup(rng):
    pos = np.sort(rng.uniform(0, 30, 80))
    mu = PointMeasure.from_atoms(pos, rng.uniform(0, 2, 80))
    tb = translation_bounded_check(mu, 1.7)
    ts = rng.uniform(-2, 31, 5000)
    assert max(window_masses(mu, ts, 1.7)) <= tb.sup_mass + 1e-12
    assert mass(mu, tb.window) == pytest.approx(tb.sup_mass)


def test_translation_bound_planar():
    pts = [(0, 0), (0.5, 0.5), (1, 1), (3, 3), (0.9, 0.1)]
    mu = PointMeasure.from_atoms(pts)
    tb = translation_bounded_check(mu, 1.0)
    assert tb.sup_mass == 4
    assert mass(mu, tb.window) == 4


def test_translation_bound_dominates_integer_windows(rng):
    mu = PointMeasure.from_atoms(np.sort(rng.uniform(0, 100, 400)))
    C = translation_bounded_check(mu, 1.0).sup_mass
    for _ in range(300):
        h = int(rng.integers(1, 20))
        t = float(rng.uniform(0, 80))
        assert C >= mass(mu, Window(t, h)) / math.ceil(h) - 1e-12
