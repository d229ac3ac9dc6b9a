"""Upper and lower Beurling densities by sliding-window extremes.

For a closed window ``[t, t + h]`` the mass is a step function of ``t`` that
only changes when an atom enters (``t = x - h``) or leaves (``t = x``) the
window. Hence in dimension 1 the supremum over all real corners is attained
with the lower edge on an atom, and the infimum on an open gap between two
consecutive events. Both are computed exactly from these finite candidate
sets.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .measure import PointMeasure, Window, index_range, window_masses

DEFAULT_LADDER = (10.0, 30.0, 100.0, 300.0, 1000.0)
THREADS_ENV = "BEURLING_THREADS"


class ExtentTooSmallError(ValueError):
    """The extent cannot hold a window of the requested side plus margins."""

    def __init__(self, h: float, margin: float, extent_length: float):
        need = h + 2 * margin
        super().__init__(
            f"window side h={h} with edge margin {margin} needs an extent of length "
            f">= {need}, but the measure's extent has length {extent_length}"
        )
        self.required_length = need


def corner_range(mu: PointMeasure, h: float, margin: float) -> tuple[float, float]:
    """Admissible corners ``[a + margin, b - margin - h]`` for windows of side ``h``."""
    if not h > 0:
        raise ValueError(f"window side must be positive, got {h}")
    if margin < 0:
        raise ValueError("edge margin must be nonnegative")
    a, b = mu.extent if mu.dimension == 1 else mu.extent[0]
    lo, hi = a + margin, b - margin - h
    if hi < lo:
        raise ExtentTooSmallError(h, margin, b - a)
    if mu.dimension == 2:
        (ay, by) = mu.extent[1]
        if by - margin - h < ay + margin:
            raise ExtentTooSmallError(h, margin, by - ay)
    return lo, hi


def sup_candidates(positions: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Corners where some window of maximal content sits (sorted)."""
    i, j = np.searchsorted(positions, [lo, hi], side="left")
    inner = positions[i:j]
    return np.unique(np.concatenate(([lo], inner, [hi])))


def inf_candidates(positions: np.ndarray, h: float, lo: float, hi: float) -> np.ndarray:
    """Midpoints of the gaps between consecutive entry/exit events in ``[lo, hi]``."""
    if lo == hi:
        return np.array([lo])
    ev = np.concatenate((positions, positions - h))
    ev = ev[(ev > lo) & (ev < hi)]
    ev = np.unique(np.concatenate(([lo], ev, [hi])))
    return 0.5 * (ev[:-1] + ev[1:])


@dataclass(frozen=True)
class SlidingExtremes:
    """Extreme normalised window masses for one side length ``h``.

    ``sup_ratio`` and ``inf_ratio`` are ``mass / h^d``; the windows are the
    smallest-corner maximiser and minimiser.
    """

    h: float
    sup_ratio: float
    inf_ratio: float
    sup_window: Window
    inf_window: Window
    edge_margin: float
    exact: bool = True
    candidates: int = 0

    def as_dict(self) -> dict:
        return {
            "h": self.h,
            "supRatio": self.sup_ratio,
            "infRatio": self.inf_ratio,
            "supWindow": self.sup_window.as_dict(),
            "infWindow": self.inf_window.as_dict(),
            "edgeMargin": self.edge_margin,
            "exact": self.exact,
            "candidates": self.candidates,
        }


def sliding_extremes(mu: PointMeasure, h: float, edge_margin: float | None = None,
                     corner_step: float | None = None) -> SlidingExtremes:
    """Sup and inf over corners ``t`` of ``mu([t, t + h]^d) / h^d``.

    Parameters
    ----------
    mu : PointMeasure
    h : float
        Window side.
    edge_margin : float, optional
        Corners are restricted so that the window stays this far inside the
        extent. Defaults to ``h``.
    corner_step : float, optional
        Corner grid step for planar measures (default ``h / 20``). Ignored in
        dimension 1, where the result is exact.
    """
    margin = float(h if edge_margin is None else edge_margin)
    lo, hi = corner_range(mu, h, margin)
    if mu.dimension == 2:
        return _planar_extremes(mu, h, margin, corner_step)
    pos = mu.positions
    sc = sup_candidates(pos, lo, hi)
    ic = inf_candidates(pos, h, lo, hi)
    sm = window_masses(mu, sc, h)
    im = window_masses(mu, ic, h)
    ks, ki = int(np.argmax(sm)), int(np.argmin(im))
    return SlidingExtremes(
        h=float(h),
        sup_ratio=float(sm[ks]) / h,
        inf_ratio=float(im[ki]) / h,
        sup_window=Window(float(sc[ks]), float(h)),
        inf_window=Window(float(ic[ki]), float(h)),
        edge_margin=margin,
        candidates=len(sc) + len(ic),
    )


def _planar_extremes(mu, h, margin, corner_step):
    step = h / 20 if corner_step is None else float(corner_step)
    if not step > 0:
        raise ValueError("corner_step must be positive")
    (ax, bx), (ay, by) = mu.extent
    gx = _grid(ax + margin, bx - margin - h, step)
    gy = _grid(ay + margin, by - margin - h, step)
    pos = mu.positions
    masses = np.empty((len(gx), len(gy)))
    for i, tx in enumerate(gx):
        lo, hi = index_range(pos[:, 0], tx, h)
        y = pos[lo:hi, 1]
        strip = PointMeasure.from_atoms(y, mu.weights[lo:hi], (ay, by))
        masses[i] = window_masses(strip, gy, h)
    area = h * h
    ks = np.unravel_index(int(np.argmax(masses)), masses.shape)
    ki = np.unravel_index(int(np.argmin(masses)), masses.shape)
    return SlidingExtremes(
        h=float(h),
        sup_ratio=float(masses[ks]) / area,
        inf_ratio=float(masses[ki]) / area,
        sup_window=Window((float(gx[ks[0]]), float(gy[ks[1]])), float(h)),
        inf_window=Window((float(gx[ki[0]]), float(gy[ki[1]])), float(h)),
        edge_margin=float(margin),
        exact=False,
        candidates=masses.size,
    )


def _grid(lo, hi, step):
    n = int(np.floor((hi - lo) / step)) + 1
    g = lo + step * np.arange(n)
    if g[-1] < hi:
        g = np.append(g, hi)
    return g


def thread_count() -> int:
    """Worker threads for ladder loops, from ``BEURLING_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def map_ladder(fn, ladder):
    """``[fn(h) for h in ladder]``, possibly threaded; result order is the ladder order."""
    n = thread_count()
    if n == 1 or len(ladder) == 1:
        return [fn(h) for h in ladder]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, ladder))


def check_ladder(ladder) -> tuple[float, ...]:
    ladder = tuple(float(h) for h in ladder)
    if not ladder:
        raise ValueError("ladder must be nonempty")
    if any(h <= 0 for h in ladder):
        raise ValueError("ladder entries must be positive")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError(f"ladder must be strictly increasing, got {ladder}")
    return ladder


@dataclass(frozen=True)
class DensityReport:
    """Sliding extremes over a ladder of window sides.

    ``d_plus`` and ``d_minus`` are the values at the largest side; the whole
    trace is kept in ``per_h``. ``settled`` is False when the last two ladder
    values of either trace differ by more than ``settle_tol``.
    """

    ladder: tuple[float, ...]
    per_h: tuple[SlidingExtremes, ...]
    d_plus: float
    d_minus: float
    edge_margin: float
    settle_tol: float
    settled: bool = field(default=True)

    def as_dict(self) -> dict:
        return {
            "ladder": list(self.ladder),
            "perH": [e.as_dict() for e in self.per_h],
            "Dplus": self.d_plus,
            "Dminus": self.d_minus,
            "edgeMargin": self.edge_margin,
            "settleTol": self.settle_tol,
            "settled": self.settled,
        }


def trace_settled(values, tol: float) -> bool:
    return len(values) < 2 or abs(values[-1] - values[-2]) <= tol


def beurling_density(mu: PointMeasure, ladder=DEFAULT_LADDER, edge_margin: float | None = None,
                     settle_tol: float = 0.01, corner_step: float | None = None) -> DensityReport:
    """Estimate ``D+(mu)`` and ``D-(mu)`` from sliding extremes over ``ladder``.

    The edge margin defaults to the largest ladder side and is the same for
    every ``h`` so that all windows avoid the truncation boundary equally.
    """
    ladder = check_ladder(ladder)
    margin = float(ladder[-1] if edge_margin is None else edge_margin)
    per_h = tuple(map_ladder(lambda h: sliding_extremes(mu, h, margin, corner_step), ladder))
    sups = [e.sup_ratio for e in per_h]
    infs = [e.inf_ratio for e in per_h]
    return DensityReport(
        ladder=ladder,
        per_h=per_h,
        d_plus=sups[-1],
        d_minus=infs[-1],
        edge_margin=margin,
        settle_tol=settle_tol,
        settled=trace_settled(sups, settle_tol) and trace_settled(infs, settle_tol),
    )
