"""Subgroup-uniformity diagnostics for atomic measures.

For a subgroup ``G = a_1 Z + ... + a_s Z`` the relevant counts are the
residue cells

    E(t, R, I_1..I_s) = {lam in [t, t + R] : lam mod 1/a_k in I_k for all k},

whose masses, normalised by ``R * a_1 ... a_s * |I_1| ... |I_s|``, should
settle between the target constants ``A`` and ``B`` uniformly in ``t``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._summation import fsum_complex
from .density import DensityReport, beurling_density, check_ladder, sliding_extremes
from .measure import PointMeasure, TrigPolynomial, apply_envelope, index_range
from .quadratic import QuadraticIrrational

BOUNDARY_BAND = 1e-9
DEPENDENCE_TOL = 1e-12
# with q <= 10^4 a generic irrational stays ~1/q^2 >> DEPENDENCE_TOL away from p/q
DEPENDENCE_MAX_DEN = 10 ** 4


@dataclass(frozen=True)
class Generator:
    """A positive generator with its declared arithmetic type.

    ``kind`` is ``"rational"``, ``"quadratic"`` or ``"float"``; ``exact``
    holds the Fraction or QuadraticIrrational when the kind is symbolic.
    """

    value: float
    kind: str
    exact: object = None
    text: str = ""

    @classmethod
    def parse(cls, text: str) -> Generator:
        s = text.strip()
        if not s:
            raise ValueError("empty generator")
        if "sqrt" in s.lower():
            q = QuadraticIrrational.parse(s)
            if q.is_rational:
                return cls(float(q), "rational", q.p, s)
            return cls(float(q), "quadratic", q, s)
        if re.fullmatch(r"[+-]?\d+(/\d+)?", s) or re.fullmatch(r"[+-]?\d*\.\d+", s):
            f = Fraction(s)
            return cls(float(f), "rational", f, s)
        return cls(float(s), "float", None, s)

    @classmethod
    def from_value(cls, v) -> Generator:
        if isinstance(v, Generator):
            return v
        if isinstance(v, str):
            return cls.parse(v)
        if isinstance(v, QuadraticIrrational):
            return cls(float(v), "rational" if v.is_rational else "quadratic", v if not v.is_rational else v.p, str(v))
        if isinstance(v, (int, Fraction)):
            return cls(float(v), "rational", Fraction(v), str(v))
        return cls(float(v), "float", None, repr(float(v)))


def _exact_ratio_rational(a: Generator, b: Generator) -> bool | None:
    """Exact answer to "is a/b rational?" when both generators are symbolic."""
    if a.kind == "float" or b.kind == "float":
        return None
    if a.kind == "rational" and b.kind == "rational":
        return True
    if (a.kind == "rational") != (b.kind == "rational"):
        return False
    qa, qb = a.exact, b.exact
    if qa.D != qb.D:
        return False
    # (p1 + q1 r) / (p2 + q2 r) is rational iff p1 q2 == p2 q1
    return qa.p * qb.q == qb.p * qa.q


def _float_ratio_rational(x: float, max_den: int = DEPENDENCE_MAX_DEN) -> Fraction | None:
    f = Fraction(x).limit_denominator(max_den)
    if abs(x - float(f)) <= DEPENDENCE_TOL * max(1.0, abs(x)):
        return f
    return None


@dataclass(frozen=True)
class SubgroupSpec:
    """Generators ``a_1..a_s`` of ``G``; independence over Q is the caller's claim.

    ``warnings`` lists generator pairs whose ratio is rational (exactly, for
    symbolic tags) or within ``1e-12`` of a rational with denominator at
    most ``10^4`` (continued-fraction probe, for float tags).
    """

    generators: tuple[Generator, ...]
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        gens = tuple(Generator.from_value(g) for g in self.generators)
        if not gens:
            raise ValueError("need at least one generator")
        for g in gens:
            if not g.value > 0:
                raise ValueError(f"generators must be positive, got {g.text}")
        vals = [g.value for g in gens]
        if len(set(vals)) != len(vals):
            raise ValueError("generators must be pairwise distinct")
        warns = list(self.warnings)
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                exact = _exact_ratio_rational(gens[i], gens[j])
                if exact is None:
                    exact = _float_ratio_rational(gens[i].value / gens[j].value) is not None
                if exact:
                    warns.append(f"generators {gens[i].text} and {gens[j].text} are rationally dependent")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "warnings", tuple(dict.fromkeys(warns)))

    @classmethod
    def parse(cls, text: str) -> SubgroupSpec:
        """``"1,sqrt2"`` or ``"a=1,sqrt2"``."""
        s = text.strip()
        if s.startswith("a="):
            s = s[2:]
        return cls(tuple(Generator.parse(p) for p in s.split(",")))

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(g.value for g in self.generators)

    @property
    def periods(self) -> tuple[float, ...]:
        return tuple(1.0 / g.value for g in self.generators)

    def as_dict(self) -> dict:
        return {"generators": [g.text for g in self.generators],
                "kinds": [g.kind for g in self.generators],
                "warnings": list(self.warnings)}


@dataclass(frozen=True)
class ResidueCellQuery:
    """Half-open cells ``I_k = [l_k, r_k)``, one per generator. ``l == r`` is empty."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        iv = tuple((float(l), float(r)) for l, r in self.intervals)
        object.__setattr__(self, "intervals", iv)

    def validate(self, G: SubgroupSpec) -> None:
        if len(self.intervals) != len(G.generators):
            raise ValueError(f"need {len(G.generators)} intervals, got {len(self.intervals)}")
        for (l, r), p in zip(self.intervals, G.periods):
            if not (0 <= l <= r <= p * (1 + 1e-15)):
                raise ValueError(f"interval [{l}, {r}) is not inside [0, {p})")

    @property
    def volume(self) -> float:
        return math.prod(r - l for l, r in self.intervals)

    def as_dict(self) -> dict:
        return {"intervals": [list(i) for i in self.intervals]}


def residues(lam, a: float) -> np.ndarray:
    """``lam mod 1/a`` as ``lam - floor(lam a) / a``, folded into ``[0, 1/a)``."""
    lam = np.asarray(lam, dtype=float)
    p = 1.0 / a
    r = lam - np.floor(lam * a) / a
    r = np.where(r >= p, r - p, r)
    return np.where(r < 0, r + p, r)


def cell_mask(lam, G: SubgroupSpec, q: ResidueCellQuery) -> tuple[np.ndarray, np.ndarray]:
    """Membership mask and near-boundary flags (within :data:`BOUNDARY_BAND`)."""
    q.validate(G)
    lam = np.asarray(lam, dtype=float)
    inside = np.ones(lam.shape, dtype=bool)
    flagged = np.zeros(lam.shape, dtype=bool)
    for a, (l, r) in zip(G.values, q.intervals):
        res = residues(lam, a)
        p = 1.0 / a
        inside &= (res >= l) & (res < r)
        near = np.minimum.reduce([np.abs(res - l), np.abs(res - r), np.abs(res - l - p), np.abs(res + p - r)])
        flagged |= (near <= BOUNDARY_BAND) & (r > l)
    return inside, flagged


@dataclass(frozen=True)
class CellMass:
    mass: float
    count: int
    boundary_atoms: int


def residue_cell_mass(mu: PointMeasure, G: SubgroupSpec, t: float, R: float,
                      q: ResidueCellQuery) -> CellMass:
    """Mass of the atoms in ``[t, t + R]`` whose residues lie in every cell."""
    a, b = mu.extent
    if t < a or t + R > b:
        raise ValueError(f"window [{t}, {t + R}] is not inside the extent {mu.extent}")
    lo, hi = index_range(mu.positions, t, R)
    lam = mu.positions[lo:hi]
    inside, flagged = cell_mask(lam, G, q)
    return CellMass(math.fsum(mu.weights[lo:hi][inside].tolist()), int(inside.sum()), int(flagged.sum()))


@dataclass(frozen=True)
class QueryTrace:
    query: ResidueCellQuery
    R: tuple[float, ...]
    sup: tuple[float, ...]
    inf: tuple[float, ...]
    boundary_atoms: int

    def as_dict(self) -> dict:
        return {**self.query.as_dict(), "R": list(self.R), "sup": list(self.sup),
                "inf": list(self.inf), "boundaryAtoms": self.boundary_atoms}


@dataclass(frozen=True)
class UniformVerdict:
    """Normalised residue-cell traces and the verdicts they support.

    ``a_hat`` is the smallest inf and ``b_hat`` the largest sup over queries
    at the largest ``R``. ``tight`` holds when ``(b_hat - a_hat) / b_hat <= tol``.
    """

    traces: tuple[QueryTrace, ...]
    a_hat: float
    b_hat: float
    target_a: float | None
    target_b: float | None
    tol: float
    a_pass: bool | None
    b_pass: bool | None
    tight: bool
    edge_margin: float

    def as_dict(self) -> dict:
        return {
            "traces": [t.as_dict() for t in self.traces],
            "Ahat": self.a_hat,
            "Bhat": self.b_hat,
            "targetA": self.target_a,
            "targetB": self.target_b,
            "tol": self.tol,
            "A": None if self.a_pass is None else ("PASS" if self.a_pass else "FAIL"),
            "B": None if self.b_pass is None else ("PASS" if self.b_pass else "FAIL"),
            "tight": self.tight,
            "edgeMargin": self.edge_margin,
        }


def uniform_group_test(mu: PointMeasure, G: SubgroupSpec, queries, R_ladder,
                       target_a: float | None = None, target_b: float | None = None,
                       tol: float = 0.02, edge_margin: float | None = None) -> UniformVerdict:
    """Sup/inf over all corners ``t`` of the normalised residue-cell mass.

    Each query restricts ``mu`` to its cell and reuses the exact scalar sweep,
    so the extremes are over all real ``t`` (not a grid).
    """
    R_ladder = check_ladder(R_ladder)
    margin = float(R_ladder[-1] if edge_margin is None else edge_margin)
    norm = math.prod(G.values)
    traces = []
    for q in queries:
        inside, flagged = cell_mask(mu.positions, G, q)
        sub = mu.restrict(inside)
        scale = norm * q.volume
        sups, infs = [], []
        for R in R_ladder:
            e = sliding_extremes(sub, R, margin)
            sups.append(e.sup_ratio / scale if scale > 0 else 0.0)
            infs.append(e.inf_ratio / scale if scale > 0 else 0.0)
        traces.append(QueryTrace(q, R_ladder, tuple(sups), tuple(infs), int(flagged.sum())))
    if not traces:
        raise ValueError("need at least one query")
    a_hat = min(t.inf[-1] for t in traces)
    b_hat = max(t.sup[-1] for t in traces)
    return UniformVerdict(
        traces=tuple(traces),
        a_hat=a_hat,
        b_hat=b_hat,
        target_a=target_a,
        target_b=target_b,
        tol=tol,
        a_pass=None if target_a is None else a_hat >= target_a * (1 - tol),
        b_pass=None if target_b is None else b_hat <= target_b * (1 + tol),
        tight=b_hat > 0 and (b_hat - a_hat) / b_hat <= tol,
        edge_margin=margin,
    )


def random_queries(G: SubgroupSpec, n: int, seed: int, min_length: float = 0.2) -> list[ResidueCellQuery]:
    """``n`` random cells, each side at least ``min_length`` times its period."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        cells = []
        for p in G.periods:
            length = rng.uniform(min_length, 1.0) * p
            l = rng.uniform(0.0, p - length)
            cells.append((l, l + length))
        out.append(ResidueCellQuery(tuple(cells)))
    return out


def trig_poly_window_average(mu: PointMeasure, P: TrigPolynomial, t: float, R: float) -> float:
    """``(1/R) sum_{lam in [t, t+R]} w_lam |P(lam)|^2`` by correctly rounded summation."""
    if not R > 0:
        raise ValueError("R must be positive")
    lo, hi = index_range(mu.positions, t, R)
    v = mu.weights[lo:hi] * P.abs_squared(mu.positions[lo:hi])
    return fsum_complex(v).real / R


def trig_poly_sweep(mu: PointMeasure, P: TrigPolynomial, R_ladder, edge_margin: float | None = None) -> DensityReport:
    """Sup/inf over corners of the window average: densities of ``|P|^2 mu``."""
    return beurling_density(apply_envelope(mu, P), R_ladder, edge_margin)


def mean_of_squared_modulus(P: TrigPolynomial) -> float:
    """``M(|P|^2) = sum |c_i|^2``."""
    return P.mean_square()


@dataclass(frozen=True)
class WellDistribution:
    N: tuple[int, ...]
    max_freq: tuple[float, ...]
    min_freq: tuple[float, ...]
    expected: float
    tol: float
    verdict: str

    def as_dict(self) -> dict:
        return {"N": list(self.N), "maxFreq": list(self.max_freq), "minFreq": list(self.min_freq),
                "expected": self.expected, "tol": self.tol, "verdict": self.verdict}


def well_distributed_test(seq, b: float, interval, N_ladder, tol: float = 0.01) -> WellDistribution:
    """Max and min over ``M`` of ``#{M <= n < M + N : seq_n mod b in I} / N``.

    PASS when, at the largest ``N``, both lie within ``tol`` of ``|I| / b``.
    """
    seq = np.asarray(seq, dtype=float)
    if len(seq) > 1 and not np.all(np.diff(seq) > 0):
        raise ValueError("sequence must be strictly increasing")
    if not b > 0:
        raise ValueError("b must be positive")
    l, r = (float(v) for v in interval)
    if not (0 <= l <= r <= b):
        raise ValueError(f"interval [{l}, {r}) is not inside [0, {b})")
    Ns = tuple(int(n) for n in N_ladder)
    if not Ns or any(n <= 0 for n in Ns):
        raise ValueError("N ladder must be nonempty and positive")
    if max(Ns) > len(seq):
        raise ValueError(f"N={max(Ns)} exceeds the sequence length {len(seq)}")
    res = residues(seq, 1.0 / b)
    hit = ((res >= l) & (res < r)).astype(np.int64)
    pref = np.concatenate(([0], np.cumsum(hit)))
    mx, mn = [], []
    for N in Ns:
        c = pref[N:] - pref[:-N]
        mx.append(float(c.max()) / N)
        mn.append(float(c.min()) / N)
    expected = (r - l) / b
    ok = abs(mx[-1] - expected) <= tol and abs(mn[-1] - expected) <= tol
    return WellDistribution(Ns, tuple(mx), tuple(mn), expected, tol, "PASS" if ok else "FAIL")
