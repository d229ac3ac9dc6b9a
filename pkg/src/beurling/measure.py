"""Weighted atomic measures on the line (or plane) and window queries.

A :class:`PointMeasure` is a finite truncation of a locally finite positive
measure: sorted atoms, nonnegative weights and the extent (support window)
that the truncation was taken over. All window queries use closed windows
``[t, t + h]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from ._summation import compensated_cumsum

# Relative slack used when deciding whether an atom sits on a window edge.
# Corners produced by float arithmetic (x_i - h, x_i + h) are then treated
# as hitting the atom they were computed from.
BOUNDARY_RTOL = 1e-12


class PointSetParseError(ValueError):
    """Malformed point-set file; ``lineno`` is 1-based."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _slack(lo, hi):
    return BOUNDARY_RTOL * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))


@dataclass(frozen=True)
class Window:
    """Closed cube ``[t, t + h]`` (componentwise in the plane)."""

    corner: float | tuple[float, float]
    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError(f"window side must be positive, got {self.side}")

    @property
    def dimension(self) -> int:
        return 1 if np.ndim(self.corner) == 0 else len(self.corner)

    def contains(self, x) -> bool:
        t = np.atleast_1d(np.asarray(self.corner, dtype=float))
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return bool(np.all((t <= x) & (x <= t + self.side)))

    def as_dict(self) -> dict:
        c = self.corner if self.dimension == 1 else list(self.corner)
        return {"corner": c, "side": self.side}


@dataclass(frozen=True)
class PointMeasure:
    """Finite positive atomic measure ``sum_k w_k delta_{x_k}``.

    Use :meth:`from_atoms` to build one from unsorted data; the raw
    constructor expects already normalised arrays and only validates them.

    Attributes
    ----------
    positions : ndarray
        Shape ``(n,)`` in dimension 1, ``(n, 2)`` in dimension 2, strictly
        increasing (lexicographically in dimension 2).
    weights : ndarray
        Shape ``(n,)``, nonnegative.
    extent : tuple
        ``(a, b)`` in dimension 1, ``((ax, bx), (ay, by))`` in dimension 2.
        Contains every atom.
    """

    positions: np.ndarray
    weights: np.ndarray
    extent: tuple
    prefix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if pos.ndim not in (1, 2) or (pos.ndim == 2 and pos.shape[1] != 2):
            raise ValueError("positions must have shape (n,) or (n, 2)")
        if w.shape != (len(pos),):
            raise ValueError("weights must have one entry per atom")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(w))):
            raise ValueError("positions and weights must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if len(pos) > 1:
            if pos.ndim == 1:
                ok = np.all(np.diff(pos) > 0)
            else:
                dx = np.diff(pos[:, 0])
                ok = np.all((dx > 0) | ((dx == 0) & (np.diff(pos[:, 1]) > 0)))
            if not ok:
                raise ValueError("positions must be strictly sorted; use PointMeasure.from_atoms")
        ext = _normalise_extent(self.extent, pos.ndim)
        if len(pos):
            boxes = [ext] if pos.ndim == 1 else list(ext)
            cols = [pos] if pos.ndim == 1 else [pos[:, 0], pos[:, 1]]
            for (a, b), c in zip(boxes, cols):
                if c.min() < a or c.max() > b:
                    raise ValueError(f"extent {self.extent} does not contain all atoms")
        object.__setattr__(self, "positions", _readonly(pos))
        object.__setattr__(self, "weights", _readonly(w))
        object.__setattr__(self, "extent", ext)
        object.__setattr__(self, "prefix", _readonly(compensated_cumsum(w)))

    @classmethod
    def from_atoms(cls, positions, weights=None, extent=None) -> PointMeasure:
        """Sort atoms, merge equal positions by summing weights.

        ``weights`` defaults to 1 for every atom; ``extent`` defaults to the
        bounding box of the atoms.
        """
        pos = np.asarray(positions, dtype=float)
        if pos.ndim == 0:
            pos = pos.reshape(1)
        if pos.ndim == 2 and pos.shape[1] == 1:
            pos = pos[:, 0]
        w = np.ones(len(pos)) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
        if len(w) != len(pos):
            raise ValueError("weights must have one entry per atom")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if pos.ndim == 1:
            uniq, inv = np.unique(pos, return_inverse=True)
        else:
            uniq, inv = np.unique(pos, axis=0, return_inverse=True)
        merged = np.zeros(len(uniq))
        np.add.at(merged, inv.reshape(-1), w)
        if extent is None:
            extent = _bounding_box(uniq)
        return cls(uniq, merged, extent)

    @property
    def dimension(self) -> int:
        return self.positions.ndim

    @property
    def count(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.weights.tolist()))

    @property
    def zero_weight(self) -> np.ndarray:
        """Mask of atoms carrying zero weight (kept so counts stay comparable)."""
        return self.weights == 0

    def extent_length(self) -> float:
        if self.dimension != 1:
            raise ValueError("extent_length is defined in dimension 1 only")
        return self.extent[1] - self.extent[0]

    def restrict(self, mask) -> PointMeasure:
        """Sub-measure on the atoms selected by ``mask`` (same extent)."""
        mask = np.asarray(mask, dtype=bool)
        return PointMeasure(self.positions[mask], self.weights[mask], self.extent)

    def translate(self, shift) -> PointMeasure:
        """Push-forward under ``x -> x + shift``."""
        if self.dimension == 1:
            ext = (self.extent[0] + shift, self.extent[1] + shift)
        else:
            sx, sy = shift
            (ax, bx), (ay, by) = self.extent
            ext = ((ax + sx, bx + sx), (ay + sy, by + sy))
        return PointMeasure(self.positions + np.asarray(shift, dtype=float), self.weights, ext)

    def with_weights(self, weights) -> PointMeasure:
        return PointMeasure(self.positions, np.asarray(weights, dtype=float), self.extent)


def _normalise_extent(extent, dim: int) -> tuple:
    if dim == 1:
        a, b = (float(v) for v in extent)
        if not a <= b:
            raise ValueError(f"extent must satisfy a <= b, got {extent}")
        return (a, b)
    (ax, bx), (ay, by) = extent
    if not (ax <= bx and ay <= by):
        raise ValueError(f"bad extent {extent}")
    return ((float(ax), float(bx)), (float(ay), float(by)))


def _bounding_box(pos: np.ndarray) -> tuple:
    if len(pos) == 0:
        return (0.0, 0.0) if pos.ndim == 1 else ((0.0, 0.0), (0.0, 0.0))
    if pos.ndim == 1:
        return (float(pos[0]), float(pos[-1]))
    return ((float(pos[:, 0].min()), float(pos[:, 0].max())),
            (float(pos[:, 1].min()), float(pos[:, 1].max())))


# ---------------------------------------------------------------------------
# window mass


def index_range(positions: np.ndarray, t, h):
    """Index bounds ``[lo, hi)`` of the sorted 1-D atoms inside ``[t, t + h]``.

    Vectorised over ``t``; the comparison carries the :data:`BOUNDARY_RTOL`
    slack.
    """
    t = np.asarray(t, dtype=float)
    end = t + h
    s = _slack(t, end)
    lo = np.searchsorted(positions, t - s, side="left")
    hi = np.searchsorted(positions, end + s, side="right")
    return lo, hi


def window_masses(mu: PointMeasure, corners, h: float) -> np.ndarray:
    """Masses of the closed windows ``[t, t + h]`` for every corner ``t`` (1-D)."""
    if mu.dimension != 1:
        raise ValueError("window_masses is 1-D; use mass() for planar windows")
    lo, hi = index_range(mu.positions, corners, h)
    return mu.prefix[hi] - mu.prefix[lo]


def mass(mu: PointMeasure, w: Window) -> float:
    """Total weight of the atoms of ``mu`` in the closed window ``w``."""
    if mu.dimension == 1:
        if w.dimension != 1:
            raise ValueError("window dimension does not match measure")
        return float(window_masses(mu, w.corner, w.side))
    if w.dimension != 2:
        raise ValueError("window dimension does not match measure")
    return float(_planar_mass(mu, w.corner, w.side))


def _planar_mass(mu: PointMeasure, corner, h) -> float:
    tx, ty = corner
    pos = mu.positions
    lo, hi = index_range(pos[:, 0], tx, h)
    if hi <= lo:
        return 0.0
    y = pos[lo:hi, 1]
    s = _slack(ty, ty + h)
    inside = (y >= ty - s) & (y <= ty + h + s)
    return math.fsum(mu.weights[lo:hi][inside].tolist())


def mass_linear_scan(mu: PointMeasure, w: Window) -> float:
    """Reference implementation of :func:`mass` by direct scan (no slack)."""
    pos = mu.positions.reshape(mu.count, -1)
    t = np.atleast_1d(np.asarray(w.corner, dtype=float))
    inside = np.all((pos >= t) & (pos <= t + w.side), axis=1)
    return math.fsum(mu.weights[inside].tolist())


# ---------------------------------------------------------------------------
# trigonometric polynomials


def _two_sum(a, b):
    """``a + b = s + t`` exactly."""
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = 134217729.0 * a  # 2^27 + 1
    hi = c - (c - a)
    return hi, a - hi


def _two_product(a, b):
    """``a * b = p + e`` exactly (Dekker)."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@dataclass(frozen=True)
class TrigPolynomial:
    """``P(lam) = sum_i c_i exp(-2 pi i x_i lam)`` with distinct sorted frequencies.

    Each frequency is carried as ``frequencies[i] + frequency_errors[i]``
    (a double-double), so products keep the exact sum of their factors'
    frequencies and phases stay accurate for large ``|lam|``.
    """

    frequencies: np.ndarray
    coefficients: np.ndarray
    frequency_errors: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.frequencies, dtype=float).reshape(-1)
        c = np.asarray(self.coefficients, dtype=complex).reshape(-1)
        e = np.zeros(len(x)) if self.frequency_errors is None else \
            np.asarray(self.frequency_errors, dtype=float).reshape(-1)
        if x.shape != c.shape or e.shape != x.shape:
            raise ValueError("one coefficient per frequency")
        if len(x) > 1:
            dx, de = np.diff(x), np.diff(e)
            if not np.all((dx > 0) | ((dx == 0) & (de > 0))):
                raise ValueError("frequencies must be strictly increasing; use TrigPolynomial.from_terms")
        object.__setattr__(self, "frequencies", _readonly(x))
        object.__setattr__(self, "coefficients", _readonly(c))
        object.__setattr__(self, "frequency_errors", _readonly(e))

    @classmethod
    def from_terms(cls, terms) -> TrigPolynomial:
        """Build from ``(frequency, coefficient)`` pairs, merging equal frequencies."""
        terms = list(terms)
        x = np.array([float(f) for f, _ in terms])
        c = np.array([complex(v) for _, v in terms])
        return cls._merged(x, np.zeros(len(x)), c)

    @classmethod
    def _merged(cls, hi, lo, c) -> TrigPolynomial:
        if len(hi) == 0:
            return cls(np.zeros(0), np.zeros(0, dtype=complex))
        pairs = np.column_stack([hi, lo])
        uniq, inv = np.unique(pairs, axis=0, return_inverse=True)
        merged = np.zeros(len(uniq), dtype=complex)
        np.add.at(merged, inv.reshape(-1), c)
        return cls(uniq[:, 0], merged, uniq[:, 1])

    @classmethod
    def constant(cls, c=1.0) -> TrigPolynomial:
        return cls.from_terms([(0.0, c)])

    def phases(self, lam) -> np.ndarray:
        """``x_i lam mod 1`` in ``[-1/2, 1/2]``, with the product formed exactly."""
        lam = np.asarray(lam, dtype=float)
        p, e = _two_product(lam[..., None], self.frequencies)
        theta = p - np.rint(p)  # exact
        return theta + (e + lam[..., None] * self.frequency_errors)

    def __call__(self, lam):
        return np.exp(-2j * np.pi * self.phases(lam)) @ self.coefficients

    def __mul__(self, other: TrigPolynomial) -> TrigPolynomial:
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        s, t = _two_sum(self.frequencies[:, None], other.frequencies[None, :])
        lo = t + (self.frequency_errors[:, None] + other.frequency_errors[None, :])
        hi, lo = _two_sum(s, lo)
        c = np.multiply.outer(self.coefficients, other.coefficients)
        return TrigPolynomial._merged(hi.ravel(), lo.ravel(), c.ravel())

    def abs_squared(self, lam) -> np.ndarray:
        v = self(lam)
        return v.real ** 2 + v.imag ** 2

    def mean_square(self) -> float:
        """Long-run mean of ``|P|^2``, which is ``sum_i |c_i|^2``."""
        c = self.coefficients
        return math.fsum((c.real ** 2 + c.imag ** 2).tolist())


def apply_envelope(mu: PointMeasure, P: TrigPolynomial) -> PointMeasure:
    """The measure ``|P|^2 mu``: weights times ``|P(x)|^2``, positions kept."""
    if mu.dimension != 1:
        raise ValueError("envelopes are defined for 1-D measures")
    return mu.with_weights(mu.weights * P.abs_squared(mu.positions))


def lebesgue_approx(spacing: float, extent) -> PointMeasure:
    """Riemann-sum surrogate for Lebesgue measure on the half-open ``[a, b)``.

    Atoms at ``a + k * spacing`` for ``k = 0 .. ceil((b - a) / spacing) - 1``,
    each of weight ``spacing``.
    """
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    a, b = (float(v) for v in extent)
    if not b > a:
        raise ValueError(f"extent must satisfy a < b, got {extent}")
    # guard against len/spacing landing a hair above an integer
    n = math.ceil((b - a) / spacing * (1 - 1e-12))
    pos = a + spacing * np.arange(n)
    return PointMeasure(pos, np.full(n, float(spacing)), (a, max(b, float(pos[-1]))))


@dataclass(frozen=True)
class TranslationBound:
    """Largest mass of a closed window of side ``unit``, with a window achieving it."""

    sup_mass: float
    window: Window | None
    unit: float


def translation_bounded_check(mu: PointMeasure, unit: float = 1.0) -> TranslationBound:
    """Exact ``sup_t mu([t, t + unit]^d)`` over all real corners ``t``.

    A maximising window can always be slid until its lower edge (each lower
    edge in the plane) rests on an atom, so atom coordinates are the only
    candidate corners.
    """
    if not unit > 0:
        raise ValueError("unit must be positive")
    if mu.count == 0:
        return TranslationBound(0.0, None, unit)
    if mu.dimension == 1:
        m = window_masses(mu, mu.positions, unit)
        k = int(np.argmax(m))
        return TranslationBound(float(m[k]), Window(float(mu.positions[k]), unit), unit)
    best, arg = -1.0, None
    pos = mu.positions
    for tx in np.unique(pos[:, 0]):
        lo, hi = index_range(pos[:, 0], tx, unit)
        y = pos[lo:hi, 1]
        order = np.argsort(y, kind="stable")
        strip = PointMeasure.from_atoms(y[order], mu.weights[lo:hi][order])
        m = window_masses(strip, strip.positions, unit)
        k = int(np.argmax(m))
        if m[k] > best:
            best, arg = float(m[k]), (float(tx), float(strip.positions[k]))
    return TranslationBound(best, Window(arg, unit), unit)


# ---------------------------------------------------------------------------
# file format


def load_point_set(path, default_weight: float = 1.0, dimension: int = 1, extent=None) -> PointMeasure:
    """Read a point-set file.

    One atom per line: ``position [weight]`` (``x y [weight]`` in the plane).
    ``#`` starts a comment; blank lines are skipped. Equal positions are
    merged by summing weights, with equality decided on the decimal text
    rather than on rounded floats.
    """
    if dimension not in (1, 2):
        raise ValueError("dimension must be 1 or 2")
    if default_weight < 0:
        raise ValueError("default weight must be nonnegative")
    atoms: dict[tuple, float] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (dimension, dimension + 1):
            raise PointSetParseError(lineno, f"expected {dimension} or {dimension + 1} fields, got {len(fields)}")
        try:
            key = tuple(Decimal(f) for f in fields[:dimension])
            weight = float(Decimal(fields[dimension])) if len(fields) > dimension else float(default_weight)
        except InvalidOperation:
            raise PointSetParseError(lineno, f"cannot parse {line!r}") from None
        if not all(k.is_finite() for k in key) or not math.isfinite(weight):
            raise PointSetParseError(lineno, "non-finite value")
        if weight < 0:
            raise PointSetParseError(lineno, f"negative weight {weight}")
        atoms[key] = atoms.get(key, 0.0) + weight
    keys = list(atoms)
    pos = np.array([[float(v) for v in k] for k in keys], dtype=float).reshape(len(keys), dimension)
    if dimension == 1:
        pos = pos[:, 0]
    return PointMeasure.from_atoms(pos, [atoms[k] for k in keys], extent=extent)


def write_point_set(mu: PointMeasure, path, header: str | None = None) -> None:
    """Write ``mu`` in the format read by :func:`load_point_set` (round-trip exact)."""
    lines = []
    if header:
        lines += [f"# {h}" for h in header.splitlines()]
    pos = mu.positions.reshape(mu.count, -1)
    for p, w in zip(pos.tolist(), mu.weights.tolist()):
        lines.append(" ".join(repr(v) for v in p) + f" {w!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_report(mu: PointMeasure) -> dict:
    """``{count, extent, totalMass}`` summary of a loaded measure."""
    ext = list(mu.extent) if mu.dimension == 1 else [list(e) for e in mu.extent]
    return {"count": mu.count, "extent": ext, "totalMass": mu.total_mass}
