"""Small-sample statistical tests used by the experiment harness.

Implemented directly (coefficients from the published approximations)
rather than delegated, so the suite can be validated against an external
oracle instead of testing a library against itself:

  * Shapiro-Wilk via the AS R94 approximation, for 3 <= n <= 50,
  * upper-tailed paired t-test (Student t tail from scipy.special),
  * upper-tailed Wilcoxon signed-rank test with average ranks for ties,
    exact sign-flip enumeration up to n = 20 and the normal approximation
    with tie correction above (no continuity correction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .errors import DegenerateInputError, InvalidInputError

SHAPIRO_MAX_N = 50


def _as_array(sample: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(sample, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} must be finite")
    return arr


# ---------------------------------------------------------------------------
# Shapiro-Wilk (AS R94 approximation)
# ---------------------------------------------------------------------------

_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -2.0322e-3)
_C5 = (-1.5861, -0.31082, -0.083751, 3.8915e-3)
_C6 = (-0.4803, -0.082676, 3.0302e-3)
_G = (-2.273, 0.459)
_PI6 = 6.0 / math.pi
_STQR = math.asin(math.sqrt(0.75))


def _poly(coeffs: Sequence[float], x: float) -> float:
    return sum(c * x**i for i, c in enumerate(coeffs))


def shapiro_wilk(sample: Sequence[float]) -> tuple[float, float]:
    """W statistic and normality p-value for a sample of size 3..50."""
    x = np.sort(_as_array(sample, "sample"))
    n = len(x)
    if not 3 <= n <= SHAPIRO_MAX_N:
        raise InvalidInputError(f"shapiro_wilk supports 3 <= n <= {SHAPIRO_MAX_N}, got {n}")
    if x[0] == x[-1]:
        raise DegenerateInputError("shapiro_wilk requires a non-constant sample")
    # Expected normal order statistics (Blom scores) and coefficients.
    m = special.ndtri((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    ssumm2 = float(m @ m)
    rsn = 1.0 / math.sqrt(n)
    a = m / math.sqrt(ssumm2)
    if n > 3:
        a_n = _poly(_C1, rsn) + m[-1] / math.sqrt(ssumm2)
        if n > 5:
            a_n1 = _poly(_C2, rsn) + m[-2] / math.sqrt(ssumm2)
            phi = (ssumm2 - 2 * m[-1] ** 2 - 2 * m[-2] ** 2) / (
                1 - 2 * a_n**2 - 2 * a_n1**2
            )
        else:
            phi = (ssumm2 - 2 * m[-1] ** 2) / (1 - 2 * a_n**2)
        a = m / math.sqrt(phi)
        a[-1] = a_n
        a[0] = -a_n
        if n > 5:
            a[-2] = a_n1
            a[1] = -a_n1
    b = float(a @ x)
    ss = float(np.sum((x - x.mean()) ** 2))
    w = min(b * b / ss, 1.0)
    # Normalizing transformation of W to a standard normal z.
    if n == 3:
        p = _PI6 * (math.asin(math.sqrt(w)) - _STQR)
        p = min(max(p, 0.0), 1.0)
        return w, p
    if n <= 11:
        gamma = _poly(_G, n)
        if gamma - math.log1p(-w) <= 0:
            return w, 0.0
        wt = -math.log(gamma - math.log1p(-w))
        mu = _poly(_C3, n)
        sigma = math.exp(_poly(_C4, n))
    else:
        u = math.log(n)
        wt = math.log1p(-w) if w < 1.0 else -math.inf
        mu = _poly(_C5, u)
        sigma = math.exp(_poly(_C6, u))
    if not math.isfinite(wt):
        return w, 1.0
    z = (wt - mu) / sigma
    return w, float(special.ndtr(-z))


# ---------------------------------------------------------------------------
# Paired t-test, upper-tailed
# ---------------------------------------------------------------------------

def paired_t_upper(differences: Sequence[float]) -> tuple[float, float]:
    """t statistic and one-sided (upper tail) p-value on paired differences."""
    d = _as_array(differences, "differences")
    n = len(d)
    if n < 2:
        raise InvalidInputError("paired_t_upper requires n >= 2")
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        raise DegenerateInputError("paired_t_upper requires nonzero variance")
    t = float(np.mean(d) / (sd / math.sqrt(n)))
    p = float(special.stdtr(n - 1, -t))
    return t, p


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank test, upper-tailed
# ---------------------------------------------------------------------------

def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    sorted_vals = values[order]
    while i < len(values):
        j = i
        while j < len(values) and sorted_vals[j] == sorted_vals[i]:
            j += 1
        ranks[order[i:j]] = (i + j + 1) / 2.0  # average of 1-based ranks i+1..j
        i = j
    return ranks


def wilcoxon_upper(differences: Sequence[float]) -> tuple[float, float]:
    """W+ statistic and one-sided p-value, H1: differences shifted upward.

    Zero differences are dropped first; ties in the absolute values get
    average ranks.  The p-value is exact (full sign-flip distribution) for
    up to 20 nonzero differences and a tie-corrected normal approximation
    without continuity correction beyond that.
    """
    d = _as_array(differences, "differences")
    d = d[d != 0.0]
    n = len(d)
    if n == 0:
        raise DegenerateInputError("wilcoxon_upper: all differences are zero")
    if n < 5:
        raise InvalidInputError("wilcoxon_upper requires at least 5 nonzero differences")
    ranks = _average_ranks(np.abs(d))
    w_plus = float(np.sum(ranks[d > 0.0]))
    if n <= 20:
        # Average ranks are multiples of 1/2; doubling keeps everything integral.
        doubled = np.rint(2.0 * ranks).astype(int)
        total = int(doubled.sum())
        counts = np.zeros(total + 1, dtype=np.int64)
        counts[0] = 1
        for r in doubled:
            shifted = np.zeros_like(counts)
            shifted[r:] = counts[:-r] if r > 0 else counts
            counts = counts + shifted
        threshold = int(round(2.0 * w_plus))
        p = float(counts[threshold:].sum() / 2.0**n)
        return w_plus, p
    mean_w = n * (n + 1) / 4.0
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    var_w = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    if var_w <= 0:
        raise DegenerateInputError("wilcoxon_upper: degenerate variance after ties")
    z = (w_plus - mean_w) / math.sqrt(var_w)
    return w_plus, float(special.ndtr(-z))


# ---------------------------------------------------------------------------
# Test selection gate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GateResult:
    method: str
    statistic: float
    p_value: float
    shapiro_w: float
    shapiro_p: float


def normality_gate(differences: Sequence[float], alpha: float = 0.05) -> GateResult:
    """Shapiro-Wilk gate: paired t when normality is plausible, else Wilcoxon."""
    w, sp = shapiro_wilk(differences)
    if sp >= alpha:
        stat, p = paired_t_upper(differences)
        return GateResult("paired_t", stat, p, w, sp)
    stat, p = wilcoxon_upper(differences)
    return GateResult("wilcoxon", stat, p, w, sp)
