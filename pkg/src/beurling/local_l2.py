"""Partial sums ``S_J = (1/(1 - 2a)) sum_{j <= J} j^(4a - 2)``.

They track ``int |H|^2`` for ``H(x) = x^-a`` over a union of ever shorter
intervals near the integers; the series converges iff ``a < 1/4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_CHUNK = 1 << 20


def _power_sum_checkpoints(p: float, checkpoints) -> list[float]:
    """``sum_{j <= J} j^-p`` at each checkpoint ``J`` (increasing), accumulated chunkwise."""
    out = []
    total = 0.0
    start = 1
    for J in checkpoints:
        parts = [total]
        while start <= J:
            stop = min(J, start + _CHUNK - 1)
            j = np.arange(start, stop + 1, dtype=float)
            # largest terms last so the chunk sum is not swamped
            parts.append(math.fsum((j ** -p)[::-1].tolist()))
            start = stop + 1
        total = math.fsum(parts)
        out.append(total)
    return out


def tail_estimate(p: float, J: int) -> float:
    """Euler-Maclaurin estimate of ``sum_{j > J} j^-p`` for ``p > 1``."""
    return J ** (1 - p) / (p - 1) - 0.5 * J ** -p + p * J ** (-p - 1) / 12


@dataclass(frozen=True)
class LocalL2Demo:
    """Partial sums at decade checkpoints with growth diagnostics.

    ``growth_exponent`` is the log-log slope of the decade increments
    ``S_{10^k} - S_{10^(k-1)}`` (predicted ``4a - 1``); ``log_slope`` is the
    slope of ``S_J`` against ``ln J`` (predicted ``1 / (1 - 2a)`` at
    ``a = 1/4``). ``limit_estimate`` is the tail-corrected sum when the
    series converges.
    """

    alpha: float
    j_max: int
    checkpoints: tuple[int, ...]
    partial_sums: tuple[float, ...]
    growth_exponent: float
    predicted_exponent: float
    log_slope: float
    classification: str
    limit_estimate: float | None

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "Jmax": self.j_max,
            "checkpoints": list(self.checkpoints),
            "partialSums": list(self.partial_sums),
            "growthExponent": self.growth_exponent,
            "predictedExponent": self.predicted_exponent,
            "logSlope": self.log_slope,
            "classification": self.classification,
            "limitEstimate": self.limit_estimate,
        }


def local_l2_demo(alpha: float, j_max: int = 10 ** 6, fit_from: int = 10 ** 3) -> LocalL2Demo:
    """Partial sums of ``int_Omega |x^-alpha|^2`` and the convergence verdict.

    Parameters
    ----------
    alpha : float
        In ``(0, 1/2)``, where ``x^-alpha`` is locally square integrable.
    j_max : int
        Largest partial-sum index; checkpoints are the powers of ten up to it
        (plus ``j_max`` itself).
    fit_from : int
        Decade increments ending at or below this index are left out of the
        growth fit.
    """
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha}")
    j_max = int(j_max)
    if j_max < 100:
        raise ValueError("j_max must be at least 100")
    cps = [10 ** k for k in range(0, int(math.log10(j_max)) + 1) if 10 ** k <= j_max]
    if cps[-1] != j_max:
        cps.append(j_max)
    p = 2 - 4 * alpha
    c = 1 / (1 - 2 * alpha)
    sums = [c * s for s in _power_sum_checkpoints(p, cps)]
    decades = [k for k in range(1, len(cps)) if cps[k] == 10 * cps[k - 1] and cps[k] > fit_from]
    if len(decades) < 2:
        decades = [k for k in range(1, len(cps)) if cps[k] == 10 * cps[k - 1]][-2:]
    xs = np.log([cps[k] for k in decades])
    inc = np.log([sums[k] - sums[k - 1] for k in decades])
    growth = float(np.polyfit(xs, inc, 1)[0])
    fit = [k for k in range(len(cps)) if cps[k] >= fit_from] or list(range(len(cps)))
    log_slope = float(np.polyfit(np.log([cps[k] for k in fit]), [sums[k] for k in fit], 1)[0]) \
        if len(fit) > 1 else math.nan
    convergent = alpha < 0.25
    limit = c * (sums[-1] / c + tail_estimate(p, cps[-1])) if convergent else None
    return LocalL2Demo(
        alpha=float(alpha),
        j_max=j_max,
        checkpoints=tuple(cps),
        partial_sums=tuple(sums),
        growth_exponent=growth,
        predicted_exponent=4 * alpha - 1,
        log_slope=log_slope,
        classification="CONVERGENT" if convergent else "DIVERGENT",
        limit_estimate=limit,
    )
