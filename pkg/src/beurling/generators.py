"""Structured point sets and the constructions built on them.

* lattices, seeded perturbed lattices and cut-and-project model sets
  ``{m + n theta : m + n theta* in I*}`` with exact acceptance in Z[sqrt D];
* almost-period scans and the Bessel blow-up probe for harmonious sets;
* the open set ``E = union_j union_k (k/2^j - r_jk, k/2^j + r_jk)``,
  ``r_jk = 2^-(j + |k| + 1)``, with exact membership certificates and a
  constructive witness for ``E cap (E + x_1) cap ... cap (E + x_m) != {}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .density import sliding_extremes
from .measure import PointMeasure, TrigPolynomial, apply_envelope
from .quadratic import QuadraticIrrational

# ---------------------------------------------------------------------------
# lattices


def lattice(b: float, extent) -> PointMeasure:
    """Atoms of weight 1 at ``b k`` inside the closed extent."""
    if not b > 0:
        raise ValueError(f"lattice spacing must be positive, got {b}")
    a, c = (float(v) for v in extent)
    k = np.arange(math.ceil(a / b) - 1, math.floor(c / b) + 2)
    pos = b * k
    pos = pos[(pos >= a) & (pos <= c)]
    return PointMeasure(pos, np.ones(len(pos)), (a, c))


def perturbed_lattice(b: float, jitter: float, seed: int, extent) -> PointMeasure:
    """``b k + u_k`` with ``u_k`` uniform in ``[-jitter, jitter]`` (seeded).

    Atoms pushed outside the extent are dropped.
    """
    if not b > 0:
        raise ValueError(f"lattice spacing must be positive, got {b}")
    if not 0 <= jitter < b / 2:
        raise ValueError(f"jitter must lie in [0, b/2), got {jitter}")
    a, c = (float(v) for v in extent)
    k = np.arange(math.ceil(a / b) - 1, math.floor(c / b) + 2)
    rng = np.random.default_rng(seed)
    u = rng.uniform(-jitter, jitter, size=len(k)) if jitter > 0 else np.zeros(len(k))
    pos = b * k + u
    pos = pos[(pos >= a) & (pos <= c)]
    return PointMeasure(pos, np.ones(len(pos)), (a, c))


def _exact(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class ModelSetSpec:
    """Cut-and-project data: ``theta`` irrational in Q(sqrt D), window ``[lo, hi)``.

    Window ends and the physical extent may be floats, Fractions or
    QuadraticIrrationals in the same field; they are compared exactly.
    """

    theta: QuadraticIrrational
    window: tuple
    extent: tuple

    def __post_init__(self):
        th = self.theta
        if not isinstance(th, QuadraticIrrational):
            th = QuadraticIrrational.parse(str(th))
        if th.is_rational:
            raise ValueError(f"theta must be irrational, got {th}")
        lo, hi = (self._coerce(v, th) for v in self.window)
        a, b = (self._coerce(v, th) for v in self.extent)
        if hi < lo:
            raise ValueError("acceptance window must satisfy lo <= hi")
        if b < a:
            raise ValueError("extent must satisfy a <= b")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "window", (lo, hi))
        object.__setattr__(self, "extent", (a, b))

    @staticmethod
    def _coerce(v, th):
        if isinstance(v, QuadraticIrrational):
            return v
        if isinstance(v, str):
            return QuadraticIrrational.parse(v)
        return QuadraticIrrational(_exact(v), 0, th.D)

    @property
    def conjugate(self) -> QuadraticIrrational:
        return self.theta.conjugate()

    @property
    def is_empty(self) -> bool:
        return self.window[0] == self.window[1]

    @property
    def expected_density(self) -> float:
        """``|I*| / |theta - theta*|``, the covolume-normalised density."""
        lo, hi = self.window
        return float(hi - lo) / abs(float(self.theta - self.conjugate))


def model_set(spec: ModelSetSpec) -> PointMeasure:
    """Enumerate ``m + n theta`` in the extent with ``m + n theta*`` in the window.

    Candidates come from float bounds padded by one unit; every acceptance
    and extent test is then decided exactly.
    """
    th, ths = spec.theta, spec.conjugate
    lo, hi = spec.window
    a, b = spec.extent
    ext = (float(a), float(b))
    if spec.is_empty:
        return PointMeasure(np.zeros(0), np.zeros(0), ext)
    # x - y = n (theta - theta*), with x in [a, b] and y in [lo, hi)
    diff = float(th - ths)
    n_lo, n_hi = sorted(((float(a) - float(hi)) / diff, (float(b) - float(lo)) / diff))
    thf, thsf = float(th), float(ths)
    pts = []
    for n in range(math.floor(n_lo) - 1, math.ceil(n_hi) + 2):
        m_lo = max(float(lo) - n * thsf, float(a) - n * thf)
        m_hi = min(float(hi) - n * thsf, float(b) - n * thf)
        for m in range(math.floor(m_lo) - 1, math.ceil(m_hi) + 2):
            y = ths * n + m
            if not (lo <= y and y < hi):
                continue
            x = th * n + m
            if a <= x <= b:
                pts.append(float(x))
    pos = np.unique(np.array(pts, dtype=float))
    return PointMeasure(pos, np.ones(len(pos)), ext)


@dataclass(frozen=True)
class GapStats:
    min_gap: float
    max_gap: float
    count: int


def gap_stats(mu: PointMeasure) -> GapStats:
    """Smallest and largest consecutive gap of a 1-D point set."""
    g = np.diff(mu.positions)
    if len(g) == 0:
        return GapStats(math.inf, math.inf, mu.count)
    return GapStats(float(g.min()), float(g.max()), mu.count)


# ---------------------------------------------------------------------------
# almost periods and the Bessel probe


def almost_period_quality(mu: PointMeasure, x) -> np.ndarray:
    """``s(x) = max_lam |exp(-2 pi i lam x) - 1| = 2 max |sin(pi lam x)|``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(len(x))
    lam = mu.positions
    chunk = max(1, 2_000_000 // max(1, len(lam)))
    for s in range(0, len(x), chunk):
        th = np.multiply.outer(x[s:s + chunk], lam)
        th -= np.rint(th)
        out[s:s + chunk] = 2 * np.max(np.abs(np.sin(np.pi * th)), axis=1, initial=0.0)
    return out


def almost_period_search(mu: PointMeasure, x_range, x_step: float, eps_target: float) -> list[tuple[float, float]]:
    """Scan ``x = lo + k * x_step`` up to ``hi``; keep ``(x, s(x))`` with ``s(x) <= eps_target``.

    Sorted by ``s`` then ``x``.
    """
    if not x_step > 0:
        raise ValueError("x_step must be positive")
    lo, hi = (float(v) for v in x_range)
    n = int(math.floor((hi - lo) / x_step * (1 + 1e-12))) + 1
    xs = lo + x_step * np.arange(max(n, 0))
    s = almost_period_quality(mu, xs)
    keep = np.nonzero(s <= eps_target)[0]
    order = np.lexsort((xs[keep], s[keep]))
    return [(float(xs[keep][i]), float(s[keep][i])) for i in order]


def select_almost_periods(hits, count: int, min_separation: float) -> list[tuple[float, float]]:
    """Greedy: best quality first, skipping points within ``min_separation`` of a chosen one."""
    chosen: list[tuple[float, float]] = []
    for x, s in hits:
        if all(abs(x - y) >= min_separation for y, _ in chosen):
            chosen.append((x, s))
            if len(chosen) == count:
                break
    return chosen


@dataclass(frozen=True)
class BesselProbe:
    """``sup_t (1/R) sum_{[t, t+R]} w |sum_j exp(-2 pi i lam y_j)|^2`` and its normalisation.

    ``density`` is the sup window ratio of ``mu`` for the same ``R`` and
    margin, and ``ratio = probe / (N * density)``.
    """

    nodes: tuple[float, ...]
    R: float
    probe: float
    density: float
    ratio: float
    corner: float
    edge_margin: float

    def as_dict(self) -> dict:
        return {"nodes": list(self.nodes), "N": len(self.nodes), "R": self.R, "probe": self.probe,
                "density": self.density, "ratio": self.ratio, "corner": self.corner,
                "edgeMargin": self.edge_margin}


def bessel_blowup_probe(mu: PointMeasure, y_nodes, R: float, edge_margin: float | None = None) -> BesselProbe:
    """Probe of the Bessel inequality with all coefficients equal to one.

    The sup over window corners is exact (same sweep as the scalar density).
    """
    y = tuple(float(v) for v in y_nodes)
    if not y:
        raise ValueError("need at least one node")
    P = TrigPolynomial.from_terms([(v, 1.0) for v in y])
    e = sliding_extremes(apply_envelope(mu, P), R, edge_margin)
    d = sliding_extremes(mu, R, edge_margin)
    ratio = e.sup_ratio / (len(y) * d.sup_ratio) if d.sup_ratio > 0 else math.inf
    return BesselProbe(y, float(R), e.sup_ratio, d.sup_ratio, ratio, float(e.sup_window.corner), e.edge_margin)


# ---------------------------------------------------------------------------
# the dyadic set E


def _pow2_le(e: int, value: Fraction) -> bool:
    """Exact ``2^-e <= value`` for ``value > 0`` and possibly astronomically large ``e``."""
    if value <= 0:
        return False
    p, q = value.numerator, value.denominator
    if e <= 0:
        return Fraction(2 ** (-e)) <= value
    if e > q.bit_length():
        return True
    return q <= p << e


def _pow2_lt(e: int, value: Fraction) -> bool:
    """Exact ``2^-e < value``."""
    if value <= 0:
        return False
    p, q = value.numerator, value.denominator
    if e <= 0:
        return Fraction(2 ** (-e)) < value
    if e > q.bit_length():
        return True
    return q < p << e


def _dyadic_parts(v: Fraction) -> tuple[int, int]:
    """``v = K / 2^J`` with ``J >= 0`` minimal; ``v`` must be dyadic."""
    q = v.denominator
    if q & (q - 1):
        raise ValueError(f"{v} is not a dyadic rational")
    return q.bit_length() - 1, v.numerator


def _radius_exponent(j: int, k: int) -> int:
    return j + abs(k) + 1


def _in_component(x: Fraction, j: int, k: int) -> bool:
    """Exact ``|x - k/2^j| < 2^-(j + |k| + 1)``."""
    d = abs(x - Fraction(k, 1 << j))
    if d == 0:
        return True
    return not _pow2_le(_radius_exponent(j, k), d)


@dataclass(frozen=True)
class DyadicCertificate:
    """``x`` lies in the component ``(k/2^j - r, k/2^j + r)``, ``r = 2^-(j+|k|+1)``."""

    j: int
    k: int

    @property
    def radius_exponent(self) -> int:
        return _radius_exponent(self.j, self.k)

    def as_dict(self) -> dict:
        return {"j": _jsonint(self.j), "k": _jsonint(self.k)}


@dataclass(frozen=True)
class NotFoundUpTo:
    """No component of level ``<= j_max`` contains the point (not a proof of non-membership)."""

    j_max: int

    def as_dict(self) -> dict:
        return {"notFoundUpTo": self.j_max}


def dyadic_membership(x, j_max: int) -> DyadicCertificate | NotFoundUpTo:
    """First certificate by smallest level ``j``, then smallest ``|k|`` (ties to ``k > 0``).

    ``x`` is converted exactly (floats are dyadic rationals).
    """
    if j_max < 0:
        raise ValueError("j_max must be nonnegative")
    xf = _exact(x)
    for j in range(j_max + 1):
        y = xf * (1 << j)
        ks = sorted({math.floor(y), math.ceil(y)}, key=lambda k: (abs(k), -k))
        for k in ks:
            d = abs(y - k)
            # |x - k/2^j| < 2^-(j+|k|+1)  <=>  |y - k| < 2^-(|k|+1)
            if d == 0 or not _pow2_le(abs(k) + 1, d):
                return DyadicCertificate(j, k)
    return NotFoundUpTo(j_max)


DYADIC_MEASURE_LIMIT = Fraction(6)


def dyadic_measure_bound(j_max: int | None = None) -> Fraction:
    """``sum_{j <= j_max} |E_j| = sum 3 / 2^j`` exactly; ``None`` gives the limit 6."""
    if j_max is None:
        return DYADIC_MEASURE_LIMIT
    if j_max < 0:
        raise ValueError("j_max must be nonnegative")
    return sum((Fraction(3, 1 << j) for j in range(j_max + 1)), Fraction(0))


# Levels above this are not used for the interval-halving rule; the step then
# switches to the center-preserving certificate (see intersection_witness).
HALVING_MAX_LEVEL = 64


@dataclass(frozen=True)
class PowerScaled:
    """Exact positive dyadic quantity ``mantissa * 2^-exponent`` (exponent may be huge)."""

    mantissa: Fraction
    exponent: int

    def __lt__(self, other: PowerScaled) -> bool:
        d = self.exponent - other.exponent
        # mantissas stay within a few thousand bits, exponents may not
        if d > 1 << 16:
            return True
        if d < -(1 << 16):
            return False
        if d >= 0:
            return self.mantissa < other.mantissa * (1 << d)
        return self.mantissa * (1 << -d) < other.mantissa

    def __le__(self, other) -> bool:
        return not other < self

    def is_positive(self) -> bool:
        return self.mantissa > 0

    def log2(self) -> float:
        m = self.mantissa
        return math.log2(m.numerator) - math.log2(m.denominator) - self.exponent

    def __float__(self) -> float:
        if self.exponent < 1000:
            return float(self.mantissa) * 2.0 ** (-self.exponent)
        lg = self.log2()
        return 0.0 if lg < -1075 else 2.0 ** lg

    def scaled(self, factor: int) -> PowerScaled:
        return PowerScaled(self.mantissa * factor, self.exponent)

    def as_dict(self) -> dict:
        return {"mantissa": str(self.mantissa), "exponent": _jsonint(self.exponent),
                "log2": self.log2(), "value": float(self)}


def _jsonint(n: int):
    return n if abs(n) < 2 ** 53 else str(n)


@dataclass(frozen=True)
class WitnessStep:
    """One shift: the component ``(j, k)`` of ``E`` translated by ``shift``.

    ``center`` is ``k / 2^j`` (exact) and the component radius is
    ``2^-radius_exponent``.
    """

    shift: float
    j: int
    k: int
    rule: str

    @property
    def center(self) -> Fraction:
        return Fraction(self.k, 1 << self.j)

    @property
    def radius_exponent(self) -> int:
        return _radius_exponent(self.j, self.k)

    def as_dict(self) -> dict:
        return {"shift": self.shift, "j": _jsonint(self.j), "k": _jsonint(self.k),
                "radiusLog2": -self.radius_exponent if abs(self.radius_exponent) < 2 ** 53 else str(-self.radius_exponent),
                "rule": self.rule}


@dataclass(frozen=True)
class WitnessCertificate:
    """Final interval ``J = (z - 2^-e, z + 2^-e)`` and the certificates that put it in every ``E + x_i``.

    ``J`` is inside ``(-1/2, 1/2)`` (the level-0 component of ``E``) and inside
    every step's shifted component.
    """

    center: Fraction
    radius_exponent: int
    steps: tuple[WitnessStep, ...] = field(default=())

    @property
    def z(self) -> Fraction:
        return self.center

    def interval(self) -> tuple[float, float]:
        r = 2.0 ** (-self.radius_exponent) if self.radius_exponent < 1100 else 0.0
        return float(self.center) - r, float(self.center) + r

    def validate(self) -> bool:
        """Direct interval inclusions ``J subset (-1/2, 1/2)`` and ``J subset C_i + x_i``."""
        comps = [(Fraction(0), 1)] + [(s.center + _exact(s.shift), s.radius_exponent) for s in self.steps]
        for c, p in comps:
            d = abs(self.center - c)
            if d == 0:
                if self.radius_exponent < p:
                    return False
                continue
            # need d + 2^-e <= 2^-p
            if p > d.denominator.bit_length() + 1:
                return False
            room = Fraction(1, 1 << p) - d if p >= 0 else Fraction(1 << -p) - d
            if not _pow2_le(self.radius_exponent, room):
                return False
        return True

    def memberships(self) -> list[bool]:
        """Own-certificate checks: ``z in E`` and ``z - x_i in E`` for each step."""
        out = [_in_component(self.center, 0, 0)]
        for s in self.steps:
            out.append(_in_component(self.center - _exact(s.shift), s.j, s.k))
        return out

    def as_dict(self) -> dict:
        lo, hi = self.interval()
        return {"z": str(self.center), "zFloat": float(self.center),
                "radiusLog2": -self.radius_exponent if abs(self.radius_exponent) < 2 ** 53 else str(-self.radius_exponent),
                "interval": [lo, hi],
                "steps": [s.as_dict() for s in self.steps],
                "selfValidating": self.validate(),
                "memberships": self.memberships()}


def _largest_pow2_exponent_below(value: Fraction) -> int:
    """Smallest ``e`` with ``2^-e <= value`` (``value > 0``)."""
    p, q = value.numerator, value.denominator
    e = q.bit_length() - p.bit_length()
    while not _pow2_le(e, value):
        e += 1
    while _pow2_le(e - 1, value):
        e -= 1
    return e


def intersection_witness(shifts) -> WitnessCertificate:
    """A nonempty open interval inside ``E cap (E + x_1) cap ... cap (E + x_m)``.

    ``J`` is kept as a ball ``(c - 2^-e, c + 2^-e)`` with dyadic ``c``. For a
    shift ``x``:

    * while ``e <= HALVING_MAX_LEVEL``: take ``j = e`` (smallest ``j`` with
      ``2^-j < |J|``), the ``k`` of smallest ``|k|`` (ties to ``k > 0``) with
      ``k/2^j + x`` in ``J``, and shrink ``J`` to the largest power-of-two
      ball about ``k/2^j + x`` inside both ``J`` and the shifted component;
    * beyond that the radius of the component picked this way would have an
      exponent of order ``2^e``; instead ``c - x`` (a dyadic rational
      ``K / 2^J``) is itself a component center, so ``J`` keeps its center
      and its radius drops to ``min(2^-e, 2^-(J + |K| + 1))``.

    All arithmetic is exact; shifts are converted to their exact binary
    values.
    """
    c = Fraction(0)
    e = 1
    steps = []
    for x in shifts:
        if not math.isfinite(float(x)):
            raise ValueError("shifts must be finite")
        xf = _exact(x)
        if e <= HALVING_MAX_LEVEL:
            j = e
            y = (c - xf) * (1 << j)
            # open interval (y - 1, y + 1)
            ks = [k for k in {math.floor(y), math.ceil(y)} if abs(y - k) < 1]
            k = min(ks, key=lambda k: (abs(k), -k))
            new_c = Fraction(k, 1 << j) + xf
            slack = Fraction(1, 1 << e) - abs(new_c - c)
            e = max(_radius_exponent(j, k), _largest_pow2_exponent_below(slack))
            c = new_c
            steps.append(WitnessStep(float(x), j, k, "halving"))
        else:
            J, K = _dyadic_parts(c - xf)
            e = max(e, _radius_exponent(J, K))
            steps.append(WitnessStep(float(x), J, K, "center-preserving"))
    return WitnessCertificate(c, e, tuple(steps))


def _slack(p: Fraction, j: int, k: int) -> PowerScaled | None:
    """``2^-(j+|k|+1) - |p - k/2^j|`` exactly, or None if ``p`` is outside."""
    P = _radius_exponent(j, k)
    d = abs(p - Fraction(k, 1 << j))
    if d == 0:
        return PowerScaled(Fraction(1), P)
    if not _in_component(p, j, k):
        return None
    # here d < 2^-P forces P to be of the size of d's denominator
    return PowerScaled(Fraction(1) - d * (1 << P), P)


def _best_slack(p: Fraction, own: tuple[int, int], j_search: int) -> PowerScaled:
    best = _slack(p, *own)
    for j in range(j_search + 1):
        y = p * (1 << j)
        for k in {math.floor(y), math.ceil(y)}:
            s = _slack(p, j, k)
            if s is not None and (best is None or best < s):
                best = s
    return best


@dataclass(frozen=True)
class ShiftTransfer:
    """``z`` and the largest ``eps`` for which every ``(x_i - z) + Q_eps`` sits in ``E``."""

    z: Fraction
    eps_max: PowerScaled
    witness: WitnessCertificate

    def as_dict(self) -> dict:
        return {"z": str(self.z), "zFloat": float(self.z), "epsMax": self.eps_max.as_dict(),
                "witness": self.witness.as_dict()}


def frame_shift_transfer(shifts, j_search: int = HALVING_MAX_LEVEL) -> ShiftTransfer:
    """``epsMax = 2 min_i slack_i`` over the constraints ``z in E`` and ``x_i - z in E``.

    ``E`` is symmetric (components ``(j, k)`` and ``(j, -k)`` mirror each
    other), so ``x_i - z in E`` iff ``z - x_i in E``. Each slack is the
    largest over the step's own certificate and the nearest components at
    levels ``<= j_search``.
    """
    w = intersection_witness(shifts)
    z = w.center
    slacks = [_best_slack(z, (0, 0), j_search)]
    for s in w.steps:
        slacks.append(_best_slack(z - _exact(s.shift), (s.j, s.k), j_search))
    worst = slacks[0]
    for s in slacks[1:]:
        if s < worst:
            worst = s
    return ShiftTransfer(z, worst.scaled(2), w)
