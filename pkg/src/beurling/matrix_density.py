"""Matrix-valued window measures and their extremal-eigenvalue densities.

For nodes ``x_1..x_N`` and a window ``E`` the matrix

    M_ij(E) = sum_{lam in E} w_lam exp(-2 pi i (x_i - x_j) lam)

equals ``sum w_lam v(lam) v(lam)^*`` with ``v(lam)_i = exp(-2 pi i x_i lam)``,
so it is Hermitian positive semidefinite and grows in the Loewner order
when atoms are added. Sliding a window until its lower edge meets an atom
can therefore only increase ``lambda_max``, and ``lambda_min`` is smallest on
the open gaps between entry/exit events: the same finite candidate corners
as in the scalar sweep give the exact extremes over all real corners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._summation import compensated_cumsum, fsum_complex
from .density import (check_ladder, corner_range, inf_candidates, map_ladder, sup_candidates,
                      trace_settled)
from .measure import PointMeasure, Window, index_range

PSD_TOL = 1e-10
_CHUNK = 65536


@dataclass(frozen=True)
class NodeSet:
    """Distinct real nodes ``x_1..x_N`` (order preserved)."""

    nodes: tuple[float, ...]

    def __post_init__(self):
        nodes = tuple(float(x) for x in self.nodes)
        if not nodes:
            raise ValueError("a node set needs at least one node")
        if not all(math.isfinite(x) for x in nodes):
            raise ValueError("nodes must be finite")
        if len(set(nodes)) != len(nodes):
            raise ValueError(f"nodes must be pairwise distinct, got {nodes}")
        object.__setattr__(self, "nodes", nodes)

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def min_gap(self) -> float:
        if len(self.nodes) < 2:
            return math.inf
        return float(np.min(np.diff(np.sort(self.nodes))))

    def as_array(self) -> np.ndarray:
        return np.array(self.nodes)


def _phases(d: float, lam: np.ndarray) -> np.ndarray:
    theta = d * lam
    theta = theta - np.rint(theta)
    return np.exp(-2j * np.pi * theta)


def pair_eigenvalues(mass: float, cross: complex) -> tuple[float, float]:
    """Eigenvalues of ``[[m, c], [conj(c), m]]``: ``m - |c|`` and ``m + |c|``."""
    a = abs(cross)
    return mass - a, mass + a


@dataclass(frozen=True)
class MatrixWindowSpectrum:
    """The matrix ``M(E)`` of one window with its extreme eigenvalues.

    ``closed_form_defect`` compares the eigensolver with the two-term formula
    when ``N <= 2`` (``nan`` otherwise).
    """

    window: Window
    entries: np.ndarray
    lambda_min: float
    lambda_max: float
    count: int
    hermitian_defect: float
    psd_defect: float
    closed_form_defect: float

    def as_dict(self) -> dict:
        return {
            "window": self.window.as_dict(),
            "lambdaMin": self.lambda_min,
            "lambdaMax": self.lambda_max,
            "count": self.count,
            "entriesRe": self.entries.real.tolist(),
            "entriesIm": self.entries.imag.tolist(),
            "hermitianDefect": self.hermitian_defect,
            "psdDefect": self.psd_defect,
            "closedFormDefect": self.closed_form_defect,
        }


def gram_window(mu: PointMeasure, nodes: NodeSet, w: Window) -> MatrixWindowSpectrum:
    """Assemble ``M(w)`` by correctly rounded summation and diagonalise it."""
    if mu.dimension != 1:
        raise ValueError("matrix windows are implemented for 1-D measures")
    x = nodes.as_array()
    n = len(x)
    lo, hi = index_range(mu.positions, w.corner, w.side)
    lam = mu.positions[lo:hi]
    wt = mu.weights[lo:hi]
    M = np.zeros((n, n), dtype=complex)
    diag = math.fsum(wt.tolist())
    for i in range(n):
        M[i, i] = diag
        for j in range(i + 1, n):
            M[i, j] = fsum_complex(wt * _phases(x[i] - x[j], lam))
            M[j, i] = np.conj(M[i, j])
    herm = float(np.max(np.abs(M - M.conj().T))) if n else 0.0
    eig = np.linalg.eigvalsh(M)
    lmin, lmax = float(eig[0]), float(eig[-1])
    if n == 1:
        cf = abs(lmin - diag)
    elif n == 2:
        a, b = pair_eigenvalues(diag, M[0, 1])
        cf = max(abs(a - lmin), abs(b - lmax))
    else:
        cf = math.nan
    return MatrixWindowSpectrum(
        window=w,
        entries=M,
        lambda_min=lmin,
        lambda_max=lmax,
        count=int(hi - lo),
        hermitian_defect=herm,
        psd_defect=max(0.0, -lmin) / max(1.0, lmax),
        closed_form_defect=cf,
    )


class _WindowMatrices:
    """Window matrices from per-difference prefix sums, batched over corners."""

    def __init__(self, mu: PointMeasure, nodes: NodeSet):
        self.mu = mu
        self.x = nodes.as_array()
        n = len(self.x)
        self.pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        lam = mu.positions
        self.prefix = [compensated_cumsum(mu.weights * _phases(self.x[i] - self.x[j], lam))
                       for i, j in self.pairs]

    def matrices(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        n = len(self.x)
        M = np.zeros((len(lo), n, n), dtype=complex)
        mass = self.mu.prefix[hi] - self.mu.prefix[lo]
        for i in range(n):
            M[:, i, i] = mass
        for (i, j), P in zip(self.pairs, self.prefix):
            c = P[hi] - P[lo]
            M[:, i, j] = c
            M[:, j, i] = np.conj(c)
        return M

    def extreme_eigenvalues(self, lo, hi) -> tuple[np.ndarray, np.ndarray]:
        lmin = np.empty(len(lo))
        lmax = np.empty(len(lo))
        for s in range(0, len(lo), _CHUNK):
            sl = slice(s, s + _CHUNK)
            eig = np.linalg.eigvalsh(self.matrices(lo[sl], hi[sl]))
            lmin[sl] = eig[:, 0]
            lmax[sl] = eig[:, -1]
        return lmin, lmax


class _PairClosedForm:
    """Two-node window eigenvalues ``mass +- |cross|`` without an eigensolver."""

    def __init__(self, mu: PointMeasure, x1: float, x2: float):
        self.mu = mu
        self.prefix = compensated_cumsum(mu.weights * _phases(x1 - x2, mu.positions))

    def extreme_eigenvalues(self, lo, hi):
        mass = self.mu.prefix[hi] - self.mu.prefix[lo]
        a = np.abs(self.prefix[hi] - self.prefix[lo])
        return mass - a, mass + a


@dataclass(frozen=True)
class MatrixSweep:
    """Extreme normalised eigenvalues over all corners for one side ``h``."""

    h: float
    sup_ratio: float
    inf_ratio: float
    sup_window: Window
    inf_window: Window
    candidates: int
    psd_defect: float

    def as_dict(self) -> dict:
        return {
            "h": self.h,
            "supLambdaMaxRatio": self.sup_ratio,
            "infLambdaMinRatio": self.inf_ratio,
            "supWindow": self.sup_window.as_dict(),
            "infWindow": self.inf_window.as_dict(),
            "candidates": self.candidates,
            "psdDefect": self.psd_defect,
        }


@dataclass(frozen=True)
class MatrixDensityReport:
    """``D-_N`` and ``D+_N`` at the largest ladder side, with the per-h trace."""

    nodes: tuple[float, ...]
    ladder: tuple[float, ...]
    per_h: tuple[MatrixSweep, ...]
    d_minus: float
    d_plus: float
    edge_margin: float
    sweep_step: float | None
    method: str
    settled: bool

    def as_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "ladder": list(self.ladder),
            "perH": [s.as_dict() for s in self.per_h],
            "DminusN": self.d_minus,
            "DplusN": self.d_plus,
            "edgeMargin": self.edge_margin,
            "sweepStep": self.sweep_step,
            "method": self.method,
            "exactCorners": True,
            "settled": self.settled,
        }


def _sweep(mu, evaluator, h, margin, sweep_step):
    lo_t, hi_t = corner_range(mu, h, margin)
    pos = mu.positions
    sc = sup_candidates(pos, lo_t, hi_t)
    ic = inf_candidates(pos, h, lo_t, hi_t)
    if sweep_step is not None:
        grid = lo_t + sweep_step * np.arange(int((hi_t - lo_t) / sweep_step) + 1)
        sc = np.unique(np.concatenate((sc, grid)))
        ic = np.unique(np.concatenate((ic, grid)))
    _, smax = evaluator.extreme_eigenvalues(*index_range(pos, sc, h))
    imin, imax = evaluator.extreme_eigenvalues(*index_range(pos, ic, h))
    ks, ki = int(np.argmax(smax)), int(np.argmin(imin))
    psd = float(np.max(np.maximum(0.0, -imin) / np.maximum(1.0, imax))) if len(imin) else 0.0
    return MatrixSweep(
        h=float(h),
        sup_ratio=float(smax[ks]) / h,
        inf_ratio=float(imin[ki]) / h,
        sup_window=Window(float(sc[ks]), float(h)),
        inf_window=Window(float(ic[ki]), float(h)),
        candidates=len(sc) + len(ic),
        psd_defect=psd,
    )


def _report(mu, nodes, evaluator, ladder, edge_margin, sweep_step, settle_tol, method):
    ladder = check_ladder(ladder)
    if mu.dimension != 1:
        raise ValueError("matrix densities are implemented for 1-D measures")
    if sweep_step is not None and not sweep_step > 0:
        raise ValueError("sweep_step must be positive")
    margin = float(ladder[-1] if edge_margin is None else edge_margin)
    per_h = tuple(map_ladder(lambda h: _sweep(mu, evaluator, h, margin, sweep_step), ladder))
    sups = [s.sup_ratio for s in per_h]
    infs = [s.inf_ratio for s in per_h]
    return MatrixDensityReport(
        nodes=tuple(nodes),
        ladder=ladder,
        per_h=per_h,
        d_minus=infs[-1],
        d_plus=sups[-1],
        edge_margin=margin,
        sweep_step=sweep_step,
        method=method,
        settled=trace_settled(sups, settle_tol) and trace_settled(infs, settle_tol),
    )


def matrix_densities(mu: PointMeasure, nodes: NodeSet, ladder, sweep_step: float | None = None,
                     edge_margin: float | None = None, settle_tol: float = 0.01) -> MatrixDensityReport:
    """Sup of ``lambda_max / h`` and inf of ``lambda_min / h`` over window corners.

    Parameters
    ----------
    mu : PointMeasure
    nodes : NodeSet
    ladder : sequence of float
        Increasing window sides; the densities are read off at the last one.
    sweep_step : float, optional
        Extra uniform corner grid. The atom/gap candidates are already exact,
        so this only adds redundant corners (useful as a cross-check).
    edge_margin : float, optional
        Defaults to the largest ladder side.
    """
    if not isinstance(nodes, NodeSet):
        nodes = NodeSet(tuple(nodes))
    return _report(mu, nodes.nodes, _WindowMatrices(mu, nodes), ladder, edge_margin,
                   sweep_step, settle_tol, "eigvalsh")


def pair_density_closed_form(mu: PointMeasure, x1: float, x2: float, ladder,
                             edge_margin: float | None = None, settle_tol: float = 0.01) -> MatrixDensityReport:
    """Two-node densities from ``mass -+ |sum w exp(-2 pi i (x1 - x2) lam)|``."""
    if x1 == x2:
        raise ValueError("x1 and x2 must differ")
    return _report(mu, (float(x1), float(x2)), _PairClosedForm(mu, x1, x2), ladder, edge_margin,
                   None, settle_tol, "closed-form")
