"""Frame and Bessel bounds of exponentials on a union of small intervals.

The optimal constants ``A``, ``B`` in

    A ||f||^2 <= sum_lam w_lam |f^(lam)|^2 <= B ||f||^2,   f in L^2(Omega),

with ``Omega`` a union of intervals of length ``eps``, are the extreme points
of the spectrum of ``T^* T`` where ``T f = (sqrt(w_lam) f^(lam))_lam``.

Two discretisations are provided.

* Ritz: restrict ``f`` to continuous piecewise-linear functions on a uniform
  grid inside each interval (vanishing at its ends). The Fourier transform
  of a hat function is explicit, so the quadratic form is assembled without
  quadrature error; the orthonormalised matrix has ``N * gridPerCube`` rows.
* Gram: the nonzero spectrum of ``T^* T`` equals that of ``T T^*``, whose
  entries ``sqrt(w_k w_l) chi_Omega^(lam_k - lam_l)`` are known in closed
  form. This gives the Bessel bound of the truncated measure with no
  discretisation at all, and it depends only on atom differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import eigsh

from .density import DEFAULT_LADDER
from .matrix_density import NodeSet, matrix_densities
from .measure import PointMeasure

DENSE_LIMIT = 4096
EXACT_GRAM_MAX_ATOMS = 4096
TRUNC_FACTOR = 50.0
# Tie tolerance for the monotone-trend checks; the exact bounds are often
# constant along an eps ladder, so plain floating noise must not count.
MONOTONE_TOL = 1e-9
_ATOM_CHUNK = 8192


@dataclass(frozen=True)
class CubeUnion:
    """``Omega = union_j [x_j - eps/2, x_j + eps/2]`` with disjoint pieces."""

    centers: tuple[float, ...]
    eps: float

    def __post_init__(self):
        c = tuple(float(x) for x in self.centers)
        if not c:
            raise ValueError("need at least one center")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        gaps = np.diff(np.sort(c))
        if len(gaps) and gaps.min() <= self.eps:
            raise ValueError(f"cubes overlap: minimum center gap {gaps.min()} <= eps {self.eps}")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "eps", float(self.eps))

    @property
    def measure(self) -> float:
        return len(self.centers) * self.eps

    def indicator_transform(self, xi) -> np.ndarray:
        """``chi_Omega^(xi) = eps sinc(eps xi) sum_j exp(-2 pi i xi x_j)``."""
        xi = np.asarray(xi, dtype=float)
        s = np.zeros(xi.shape, dtype=complex)
        for c in self.centers:
            th = xi * c
            s += np.exp(-2j * np.pi * (th - np.rint(th)))
        return self.eps * np.sinc(self.eps * xi) * s


def _truncate(mu: PointMeasure, radius: float) -> PointMeasure:
    if mu.dimension != 1:
        raise ValueError("frame bounds are implemented for 1-D measures")
    keep = np.abs(mu.positions) <= radius
    return mu.restrict(keep)


@dataclass(frozen=True)
class FrameQuadraticForm:
    """Ritz matrix of ``f -> sum w |f^|^2`` in an ``L^2``-orthonormal hat basis.

    Attributes
    ----------
    matrix : ndarray
        Hermitian ``(N G, N G)`` matrix; its eigenvalues are the Ritz values.
    nodes : ndarray
        Hat centres ``t_p`` (``G`` interior points per interval).
    step : float
        Grid step ``eps / (G + 1)``.
    """

    matrix: np.ndarray
    nodes: np.ndarray
    step: float
    trunc_radius: float
    atoms_used: int
    hermitian_defect: float


def _hat_mass_block(G: int, step: float) -> np.ndarray:
    return step * (np.diag(np.full(G, 2 / 3)) + np.diag(np.full(G - 1, 1 / 6), 1)
                   + np.diag(np.full(G - 1, 1 / 6), -1))


def frame_quadratic_form(mu: PointMeasure, omega: CubeUnion, grid_per_cube: int = 64,
                         trunc_radius: float | None = None) -> FrameQuadraticForm:
    """Assemble the orthonormalised Ritz matrix.

    For ``f = sum_p a_p phi_p`` with hats ``phi_p`` of half-width ``d``,
    ``f^(lam) = d sinc^2(lam d) sum_p a_p exp(-2 pi i lam t_p)``, so the form
    is ``a^* K a`` with ``K = d^2 V^* diag(w sinc^4) V``. With the hat Gram
    matrix ``S = L L^*`` the returned matrix is ``L^{-1} K L^{-*}``.
    """
    G = int(grid_per_cube)
    if G < 8:
        raise ValueError("grid_per_cube must be at least 8")
    radius = TRUNC_FACTOR / omega.eps if trunc_radius is None else float(trunc_radius)
    nu = _truncate(mu, radius)
    d = omega.eps / (G + 1)
    local = -omega.eps / 2 + d * np.arange(1, G + 1)
    t = np.concatenate([c + local for c in omega.centers])
    n = len(t)
    K = np.zeros((n, n), dtype=complex)
    lam, w = nu.positions, nu.weights
    for s in range(0, len(lam), _ATOM_CHUNK):
        lc = lam[s:s + _ATOM_CHUNK]
        th = np.multiply.outer(lc, t)
        V = np.exp(-2j * np.pi * (th - np.rint(th)))
        g = w[s:s + _ATOM_CHUNK] * np.sinc(lc * d) ** 4
        K += (V.conj().T * g) @ V
    K *= d * d
    Lc = np.linalg.cholesky(_hat_mass_block(G, d))
    L = sla.block_diag(*([Lc] * len(omega.centers)))
    X = sla.solve_triangular(L, K, lower=True)
    H = sla.solve_triangular(L, X.conj().T, lower=True).conj().T
    defect = float(np.max(np.abs(H - H.conj().T)))
    H = 0.5 * (H + H.conj().T)
    return FrameQuadraticForm(H, t, d, radius, nu.count, defect)


def _extreme_eigs(H: np.ndarray) -> tuple[float, float]:
    if len(H) <= DENSE_LIMIT:
        e = np.linalg.eigvalsh(H)
        return float(e[0]), float(e[-1])
    lo = eigsh(H, k=1, which="SA", tol=1e-8, return_eigenvectors=False)[0]
    hi = eigsh(H, k=1, which="LA", tol=1e-8, return_eigenvectors=False)[0]
    return float(lo), float(hi)


def frame_operator_spectrum(mu: PointMeasure, omega: CubeUnion,
                            trunc_radius: float | None = None) -> np.ndarray:
    """Eigenvalues (ascending) of ``T T^*`` for the truncated measure.

    These are the nonzero eigenvalues of the frame operator ``T^* T`` on
    ``L^2(Omega)`` (padded with zeros when atoms outnumber its rank).
    """
    radius = TRUNC_FACTOR / omega.eps if trunc_radius is None else float(trunc_radius)
    nu = _truncate(mu, radius)
    lam = nu.positions
    sw = np.sqrt(nu.weights)
    G = omega.indicator_transform(np.subtract.outer(lam, lam)) * np.outer(sw, sw)
    G = 0.5 * (G + G.conj().T)
    return np.linalg.eigvalsh(G)


@dataclass(frozen=True)
class FrameBoundEstimate:
    """Estimated optimal bounds on one cube union.

    ``a_eps`` is the smallest Ritz value (``None`` in Bessel-only mode).
    ``b_eps`` comes from the exact Gram spectrum when the truncated measure
    has at most :data:`EXACT_GRAM_MAX_ATOMS` atoms (``bessel_route ==
    "exact-gram"``), and from the largest Ritz value otherwise.
    """

    centers: tuple[float, ...]
    eps: float
    a_eps: float | None
    b_eps: float
    ritz_b: float
    grid_per_cube: int
    trunc_radius: float
    matrix_size: int
    atoms_used: int
    bessel_route: str
    hermitian_defect: float
    psd_defect: float
    warnings: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "centers": list(self.centers),
            "eps": self.eps,
            "Aeps": self.a_eps,
            "Beps": self.b_eps,
            "ritzB": self.ritz_b,
            "gridPerCube": self.grid_per_cube,
            "truncRadius": self.trunc_radius,
            "matrixSize": self.matrix_size,
            "atomsUsed": self.atoms_used,
            "besselRoute": self.bessel_route,
            "hermitianDefect": self.hermitian_defect,
            "psdDefect": self.psd_defect,
            "warnings": list(self.warnings),
        }


def frame_bounds(mu: PointMeasure, omega: CubeUnion, grid_per_cube: int = 64,
                 trunc_radius: float | None = None, bessel_only: bool = False,
                 exact_gram_max_atoms: int = EXACT_GRAM_MAX_ATOMS) -> FrameBoundEstimate:
    """Frame bounds ``A_eps``, ``B_eps`` of the truncated measure on ``omega``.

    Parameters
    ----------
    mu : PointMeasure
    omega : CubeUnion
    grid_per_cube : int
        Hats per interval.
    trunc_radius : float, optional
        Atoms with ``|lam| > trunc_radius`` are dropped. Default ``50 / eps``.
    bessel_only : bool
        Skip the lower bound.
    """
    default_radius = TRUNC_FACTOR / omega.eps
    radius = default_radius if trunc_radius is None else float(trunc_radius)
    warnings = []
    if radius < default_radius:
        warnings.append(f"truncRadius {radius} is below the default {default_radius}")
    nyquist = (grid_per_cube + 1) / (2 * omega.eps)
    if radius < nyquist:
        warnings.append(f"truncRadius {radius} is below the grid Nyquist frequency {nyquist}; "
                        "the lower bound may be underestimated")
    a, b = mu.extent
    if a > -radius or b < radius:
        warnings.append(f"measure extent {mu.extent} does not reach +-truncRadius")
    form = frame_quadratic_form(mu, omega, grid_per_cube, radius)
    rmin, rmax = _extreme_eigs(form.matrix)
    route = "ritz"
    bval = rmax
    if form.atoms_used <= exact_gram_max_atoms:
        spec = frame_operator_spectrum(mu, omega, radius)
        bval = float(spec[-1]) if len(spec) else 0.0
        route = "exact-gram"
    psd = max(0.0, -rmin) / rmax if rmax > 0 else 0.0
    return FrameBoundEstimate(
        centers=omega.centers,
        eps=omega.eps,
        a_eps=None if bessel_only else max(rmin, 0.0),
        b_eps=bval,
        ritz_b=rmax,
        grid_per_cube=int(grid_per_cube),
        trunc_radius=radius,
        matrix_size=len(form.matrix),
        atoms_used=form.atoms_used,
        bessel_route=route,
        hermitian_defect=form.hermitian_defect,
        psd_defect=psd,
        warnings=tuple(warnings),
    )


def is_monotone(values, increasing: bool, tol: float = MONOTONE_TOL) -> bool:
    """Monotone up to ties of relative size ``tol``."""
    for u, v in zip(values, values[1:]):
        slack = tol * max(1.0, abs(u), abs(v))
        if (v < u - slack) if increasing else (v > u + slack):
            return False
    return True


@dataclass(frozen=True)
class EpsilonSweep:
    """Frame bounds along a decreasing eps ladder versus the matrix densities."""

    rows: tuple[FrameBoundEstimate, ...]
    d_minus: float
    d_plus: float
    density_ladder: tuple[float, ...]
    tolerance: float
    b_gaps: tuple[float, ...]
    a_gaps: tuple[float, ...]
    verdict: str

    def as_dict(self) -> dict:
        return {
            "rows": [r.as_dict() for r in self.rows],
            "DminusN": self.d_minus,
            "DplusN": self.d_plus,
            "densityLadder": list(self.density_ladder),
            "tolerance": self.tolerance,
            "monotoneTol": MONOTONE_TOL,
            "bGaps": list(self.b_gaps),
            "aGaps": list(self.a_gaps),
            "verdict": self.verdict,
        }


def default_density_ladder(mu: PointMeasure) -> tuple[float, ...]:
    """Default ladder entries whose window plus margins fit the extent."""
    length = mu.extent_length()
    ladder = tuple(h for h in DEFAULT_LADDER if 3 * h <= length)
    if not ladder:
        raise ValueError(f"extent of length {length} is too short for any default density window")
    return ladder


def epsilon_sweep(mu: PointMeasure, centers, eps_ladder, grid_per_cube: int = 64,
                  trunc_radius: float | None = None, density_ladder=None,
                  tol_fraction: float = 0.05) -> EpsilonSweep:
    """Bounds for each eps and the gaps to ``(D-_N, D+_N)``.

    PASS when both gap sequences are non-increasing (up to
    :data:`MONOTONE_TOL`) and the final gaps are at most
    ``tol_fraction * D+_N``.
    """
    eps_ladder = [float(e) for e in eps_ladder]
    if not eps_ladder:
        raise ValueError("eps ladder must be nonempty")
    if any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise ValueError("eps ladder must be strictly decreasing")
    nodes = NodeSet(tuple(centers))
    if eps_ladder[0] >= nodes.min_gap:
        raise ValueError(f"eps {eps_ladder[0]} must be below the minimum center gap {nodes.min_gap}")
    ladder = default_density_ladder(mu) if density_ladder is None else tuple(density_ladder)
    dens = matrix_densities(mu, nodes, ladder)
    rows = tuple(frame_bounds(mu, CubeUnion(nodes.nodes, e), grid_per_cube, trunc_radius)
                 for e in eps_ladder)
    b_gaps = tuple(abs(r.b_eps - dens.d_plus) for r in rows)
    a_gaps = tuple(abs(r.a_eps - dens.d_minus) for r in rows)
    tol = tol_fraction * dens.d_plus
    ok = (is_monotone(b_gaps, increasing=False) and is_monotone(a_gaps, increasing=False)
          and b_gaps[-1] <= tol and a_gaps[-1] <= tol)
    return EpsilonSweep(rows, dens.d_minus, dens.d_plus, dens.ladder, tol, b_gaps, a_gaps,
                        "PASS" if ok else "FAIL")


def sandwich_holds(estimate: FrameBoundEstimate, d_minus: float, d_plus: float,
                   tol_fraction: float = 0.05) -> bool:
    """``A_eps <= D-_N + tol`` and ``B_eps >= D+_N - tol`` with ``tol = tol_fraction * D+_N``."""
    tol = tol_fraction * d_plus
    a_ok = estimate.a_eps is None or estimate.a_eps <= d_minus + tol
    return a_ok and estimate.b_eps >= d_plus - tol and math.isfinite(estimate.b_eps)
