import math

import numpy as np
import pytest
from scipy.integrate import quad

from beurling.framebounds import (CubeUnion, epsilon_sweep, frame_bounds, frame_operator_spectrum,
                                  frame_quadratic_form, is_monotone, sandwich_holds)
from beurling.matrix_density import NodeSet, matrix_densities
from beurling.measure import PointMeasure, lebesgue_approx


def integers(a, b):
    return PointMeasure.from_atoms(np.arange(a, b + 1, dtype=float))


def test_cube_union_validation():
    assert CubeUnion((0.0, 1.0), 0.2).measure == pytest.approx(0.4)
    with pytest.raises(ValueError, match="overlap"):
        CubeUnion((0.0, 0.1), 0.2)
    with pytest.raises(ValueError):
        CubeUnion((0.0,), 0.0)
    with pytest.raises(ValueError):
        CubeUnion((), 0.1)


def test_indicator_transform_against_quadrature():
    om = CubeUnion((0.0, 1.0, 2.7), 0.3)
    for xi in (0.0, 0.4, -3.3, 11.1):
        re = sum(quad(lambda x: math.cos(2 * math.pi * x * xi), c - 0.15, c + 0.15)[0] for c in om.centers)
        im = sum(quad(lambda x: -math.sin(2 * math.pi * x * xi), c - 0.15, c + 0.15)[0] for c in om.centers)
        assert om.indicator_transform(xi) == pytest.approx(complex(re, im), abs=1e-12)


def test_single_atom_rank_one():
    mu = PointMeasure.from_atoms([3.0], [2.5], extent=(-100, 100))
    om = CubeUnion((0.0, 1.0), 0.1)
    est = frame_bounds(mu, om, grid_per_cube=16)
    # T T^* is 1x1 and equals w |Omega|
    assert est.bessel_route == "exact-gram"
    assert est.b_eps == pytest.approx(2.5 * 0.2, rel=1e-12)
    assert est.a_eps == pytest.approx(0, abs=1e-12)
    # hats vanish at the cube edges, so the Ritz value approaches w |Omega| from below
    fine = frame_bounds(mu, om, grid_per_cube=64)
    assert est.ritz_b < fine.ritz_b <= est.b_eps * (1 + 1e-12)
    assert fine.ritz_b == pytest.approx(est.b_eps, rel=0.02)


def test_ritz_values_inside_exact_spectrum(rng):
    mu = PointMeasure.from_atoms(np.sort(rng.uniform(-200, 200, 1500)), rng.uniform(0.5, 1.5, 1500))
    om = CubeUnion((0.0, 0.5, 2.0), 0.1)
    form = frame_quadratic_form(mu, om, 16, trunc_radius=200)
    ritz = np.linalg.eigvalsh(form.matrix)
    exact = frame_operator_spectrum(mu, om, trunc_radius=200)
    assert ritz[-1] <= exact[-1] * (1 + 1e-10)
    assert form.hermitian_defect < 1e-10
    assert ritz[0] >= -1e-10 * ritz[-1]


def test_quadratic_form_against_direct_transform(rng):
    mu = PointMeasure.from_atoms(np.sort(rng.uniform(-50, 50, 300)))
    om = CubeUnion((0.0, 1.0), 0.2)
    G = 8
    form = frame_quadratic_form(mu, om, G, trunc_radius=50)
    d = form.step
    # the matrix acts on coefficients of an orthonormal basis; map back to hats
    S = d * (np.diag(np.full(G, 2 / 3)) + np.diag(np.full(G - 1, 1 / 6), 1) + np.diag(np.full(G - 1, 1 / 6), -1))
    L = np.linalg.cholesky(S)
    Linv = np.kron(np.eye(2), np.linalg.inv(L))
    b = rng.normal(size=2 * G) + 1j * rng.normal(size=2 * G)
    a = Linv.conj().T @ b
    lam = mu.positions
    fhat = d * np.sinc(lam * d) ** 2 * (np.exp(-2j * np.pi * np.outer(lam, form.nodes)) @ a)
    direct = np.sum(np.abs(fhat) ** 2)
    assert (b.conj() @ form.matrix @ b).real == pytest.approx(direct, rel=1e-9)
    # cross-cube blocks are nonzero for a non-lattice measure
    assert np.abs(form.matrix[:G, G:]).max() > 1e-6


def test_exact_spectrum_modulation_invariant(rng):
    mu = PointMeasure.from_atoms(np.sort(rng.uniform(-100, 100, 600)), rng.uniform(0.2, 1, 600))
    om = CubeUnion((0.0, 0.7, 1.9), 0.15)
    base = frame_operator_spectrum(mu, om, trunc_radius=1e9)
    top = base[-1]
    for s in (0.5, -13.25, math.pi):
        shifted = frame_operator_spectrum(mu.translate(s), om, trunc_radius=1e9)
        assert np.max(np.abs(shifted - base)) / top < 1e-9


def test_parseval_single_cube():
    mu = integers(-500, 500)
    est = frame_bounds(mu, CubeUnion((0.0,), 1.0), grid_per_cube=64, trunc_radius=500)
    assert est.b_eps == pytest.approx(1.0, abs=1e-9)
    assert 0.97 <= est.a_eps <= 1.0 + 1e-9


@pytest.mark.parametrize("G, floor", [(8, 0.995), (16, 0.99)])
def test_lebesgue_surrogate_is_tight(G, floor):
    mu = lebesgue_approx(0.02, (-300, 300))
    om = CubeUnion((0.0, math.sqrt(2)), 0.1)
    est = frame_bounds(mu, om, grid_per_cube=G, trunc_radius=300)
    assert est.bessel_route == "ritz"
    assert floor <= est.a_eps <= est.b_eps <= 1.0 + 1e-6


def test_grid_refinement_stable():
    mu = integers(-500, 500)
    om = CubeUnion((0.0,), 1.0)
    a = frame_bounds(mu, om, 32, trunc_radius=500).a_eps
    b = frame_bounds(mu, om, 64, trunc_radius=500).a_eps
    assert abs(a - b) / b < 0.01


def test_integer_lattice_pair_sweep():
    mu = integers(-500, 500)
    sw = epsilon_sweep(mu, (0.0, 1.0), (0.2, 0.1, 0.05), grid_per_cube=16, trunc_radius=500,
                       density_ladder=(10, 100))
    bs = [r.b_eps for r in sw.rows]
    assert is_monotone(bs, increasing=True)
    assert bs[-1] == pytest.approx(2.0, abs=1e-9)
    assert all(r.a_eps <= 0.2 for r in sw.rows)
    assert sw.verdict == "PASS"


def test_sandwich_on_fixtures():
    mu = integers(-500, 500)
    for centers in ((0.0, 1.0), (0.0, 0.5)):
        dens = matrix_densities(mu, NodeSet(centers), (10, 100))
        est = frame_bounds(mu, CubeUnion(centers, 0.05), 16, trunc_radius=500)
        assert sandwich_holds(est, dens.d_minus, dens.d_plus)


def test_is_monotone_tolerates_ties():
    assert is_monotone([1.0, 1.0 - 1e-12, 1.5], increasing=True)
    assert not is_monotone([1.0, 0.9], increasing=True)
    assert is_monotone([3, 2, 2, 1], increasing=False)


def test_warnings_and_options():
    mu = integers(-100, 100)
    est = frame_bounds(mu, CubeUnion((0.0,), 0.5), 16, trunc_radius=10)
    text = " ".join(est.warnings)
    assert "below the default" in text and "Nyquist" in text
    far = frame_bounds(mu, CubeUnion((0.0,), 0.25), 16)
    assert any("extent" in w for w in far.warnings)
    assert frame_bounds(mu, CubeUnion((0.0,), 0.5), 16, bessel_only=True).a_eps is None
    with pytest.raises(ValueError):
        frame_quadratic_form(mu, CubeUnion((0.0,), 0.5), 4)


def test_sweep_argument_checks():
    mu = integers(-300, 300)
    with pytest.raises(ValueError):
        epsilon_sweep(mu, (0.0, 1.0), (0.1, 0.2))
    with pytest.raises(ValueError):
        epsilon_sweep(mu, (0.0, 0.1), (0.2,))
