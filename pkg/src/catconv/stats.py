"""Asymptotic homogeneity tests for categorical segments.

Frequency-based tests compare the category distribution across segments
with Pearson's statistic, optionally deflated by the variance inflation
factor of a fitted DAR(1) model.  The transition-based test compares
first-order transition matrices.

The ``*_batch`` helpers operate on stacked count arrays so the bootstrap
engine can evaluate many replicates in one call; the table-level functions
go through the same code so observed and replicate statistics agree to the
last bit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .chain import FrequencyTable, SegmentSet, TransitionTable, frequency_table, transition_table
from .errors import DataError, InsufficientVariationError
from .special import chi_squared_sf

__all__ = [
    "Method",
    "TestOutcome",
    "Dar1Estimate",
    "PHI_CLAMP",
    "pearson_statistic",
    "pearson_batch",
    "hangartner",
    "hangartner_test",
    "kappa_hat",
    "estimate_dar1",
    "weiss_test",
    "billingsley_statistic",
    "billingsley_batch",
    "billingsley",
    "billingsley_test",
]

PHI_CLAMP = 0.999

DEGENERATE_SUPPORT = "degenerate-support"
ZERO_DF = "zero-df"
CLAMPED_PHI = "clamped-phi"


class Method(str, enum.Enum):
    HANGARTNER = "hangartner"
    WEISS = "weiss"
    DARBOOT = "darboot"
    MCBOOT = "mcboot"
    BILLINGSLEY = "billingsley"
    BILLINGSLEYBOOT = "billingsleyboot"

    @property
    def is_bootstrap(self) -> bool:
        return self in (Method.DARBOOT, Method.MCBOOT, Method.BILLINGSLEYBOOT)

    @property
    def family(self) -> str:
        """``frequency`` for the category-distribution tests, ``transition`` otherwise."""
        if self in (Method.BILLINGSLEY, Method.BILLINGSLEYBOOT):
            return "transition"
        return "frequency"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class TestOutcome:
    """Result of one diagnostic evaluation.

    ``df`` is set for asymptotic methods, ``replicates`` for bootstrap ones.
    """

    __test__ = False  # not a pytest class

    method: Method
    statistic: float
    p_value: float
    df: int | None = None
    replicates: int | None = None
    warnings: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        if self.statistic < 0:
            raise ValueError("statistic must be nonnegative")
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError("p-value must lie in [0, 1]")
        if self.method.is_bootstrap == (self.df is not None):
            raise ValueError(f"df must be set iff {self.method} is asymptotic")

    def rejects(self, alpha: float) -> bool:
        return self.p_value < alpha


@dataclass(frozen=True)
class Dar1Estimate:
    phi_hat: float
    c_hat: float
    kappa_lags: dict
    proportions: np.ndarray = field(compare=False)
    pooled: np.ndarray = field(compare=False)
    warnings: tuple = ()


def pearson_batch(counts: np.ndarray) -> np.ndarray:
    """Pearson homogeneity statistic for count arrays of shape ``(..., s, r)``."""
    counts = np.asarray(counts, dtype=float)
    n_i = counts.sum(axis=-1, keepdims=True)
    pooled = counts.sum(axis=-2, keepdims=True)
    p = pooled / pooled.sum(axis=-1, keepdims=True)
    p_i = counts / n_i
    support = p > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(support, n_i * (p_i - p) ** 2 / np.where(support, p, 1.0), 0.0)
    return terms.sum(axis=(-2, -1))


def pearson_statistic(freq: FrequencyTable):
    """Return ``(X2, df, warnings)`` for a frequency table with ``s >= 2`` segments."""
    if freq.s < 2:
        raise DataError("homogeneity test needs at least 2 segments")
    support = len(freq.support)
    if support == 1:
        return 0.0, 0, (DEGENERATE_SUPPORT,)
    return float(pearson_batch(freq.counts)), (support - 1) * (freq.s - 1), ()


def _asymptotic(method, statistic, df, warnings):
    if df == 0:
        return TestOutcome(method, 0.0, 1.0, df=0, warnings=tuple(warnings) + (ZERO_DF,))
    return TestOutcome(method, statistic, chi_squared_sf(df, statistic), df=df, warnings=warnings)


def hangartner_test(freq: FrequencyTable) -> TestOutcome:
    """Uncorrected Pearson test; liberal for autocorrelated chains."""
    x2, df, warnings = pearson_statistic(freq)
    return _asymptotic(Method.HANGARTNER, x2, df, warnings)


def kappa_hat(segments: SegmentSet, m: int) -> float:
    """Bias-corrected lag-``m`` Cohen's kappa pooled over segments.

    The ``m``-step self-transition frequencies are averaged across segments
    and the marginal is pooled; ``n`` in the bias term is the pooled length.
    """
    if m < 1:
        raise ValueError("lag must be a positive integer")
    if m >= min(segments.lengths):
        raise DataError(f"lag {m} needs segments longer than {m}")
    freq = frequency_table(segments)
    p = freq.pooled_proportions
    spread = 1.0 - float(np.sum(p * p))
    if spread <= 0.0:
        raise InsufficientVariationError("pooled marginal is concentrated on one category")
    same = 0.0
    for seg in segments.segments:
        same += np.count_nonzero(seg[:-m] == seg[m:]) / (seg.size - m)
    same /= segments.s
    return 1.0 + 1.0 / freq.total - (1.0 - same) / spread


def estimate_dar1(segments: SegmentSet) -> Dar1Estimate:
    """Fit a DAR(1) model: dependence from lag-1 kappa, marginals from counts."""
    kappa = kappa_hat(segments, 1)
    phi = min(max(kappa, -PHI_CLAMP), PHI_CLAMP)
    warnings = (CLAMPED_PHI,) if phi != kappa else ()
    freq = frequency_table(segments)
    return Dar1Estimate(
        phi_hat=phi,
        c_hat=(1.0 + phi) / (1.0 - phi),
        kappa_lags={1: kappa},
        proportions=freq.proportions,
        pooled=freq.pooled_proportions,
        warnings=warnings,
    )


def weiss_test(segments: SegmentSet) -> TestOutcome:
    """Pearson statistic divided by the DAR(1) variance inflation ``c``."""
    freq = frequency_table(segments)
    x2, df, warnings = pearson_statistic(freq)
    if df == 0:
        return _asymptotic(Method.WEISS, 0.0, 0, warnings)
    fit = estimate_dar1(segments)
    return _asymptotic(Method.WEISS, x2 / fit.c_hat, df, warnings + fit.warnings)


def billingsley_batch(counts: np.ndarray) -> np.ndarray:
    """Transition-matrix homogeneity statistic for counts shaped ``(..., s, r, r)``.

    Segment rows with no departures contribute nothing.
    """
    counts = np.asarray(counts, dtype=float)
    f_j = counts.sum(axis=-1, keepdims=True)
    pooled = counts.sum(axis=-3, keepdims=True)
    pooled_tot = pooled.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = pooled / np.where(pooled_tot > 0, pooled_tot, 1.0)
        p_i = counts / np.where(f_j > 0, f_j, 1.0)
        keep = (p > 0) & (f_j > 0)
        terms = np.where(keep, f_j * (p_i - p) ** 2 / np.where(p > 0, p, 1.0), 0.0)
    return terms.sum(axis=(-3, -2, -1))


def billingsley_statistic(trans: TransitionTable):
    """Return ``(X2_f, df, warnings)``; ``df`` sums ``(a_j - 1)(b_j - 1)`` over visited states."""
    if trans.s < 2:
        raise DataError("homogeneity test needs at least 2 segments")
    a = trans.a
    b = trans.b
    df = int(np.sum(np.clip(a - 1, 0, None) * np.clip(b - 1, 0, None)))
    return float(billingsley_batch(trans.counts)), df, ()


def billingsley_test(trans: TransitionTable) -> TestOutcome:
    x2, df, warnings = billingsley_statistic(trans)
    return _asymptotic(Method.BILLINGSLEY, x2, df, warnings)


def hangartner(segments: SegmentSet) -> TestOutcome:
    return hangartner_test(frequency_table(segments))


def billingsley(segments: SegmentSet) -> TestOutcome:
    return billingsley_test(transition_table(segments))
