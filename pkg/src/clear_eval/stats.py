"""Validation statistics: correlation against expert ratings, inter-rater
agreement, and percentile bootstrap intervals."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .model import DataError, ExpertRating, MetricError


class DegenerateSample(MetricError):
    pass


@dataclass(frozen=True)
class PairedSample:
    subjects: tuple[str, ...]
    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self) -> None:
        if not len(self.subjects) == len(self.x) == len(self.y):
            raise DataError("paired sample columns differ in length")
        if len(set(self.subjects)) != len(self.subjects):
            raise DataError("paired sample has duplicated subject ids")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float, float]]) -> PairedSample:
        pairs = list(pairs)
        return cls(
            tuple(p[0] for p in pairs), tuple(float(p[1]) for p in pairs), tuple(float(p[2]) for p in pairs)
        )

    @classmethod
    def from_mappings(cls, x: Mapping[str, float], y: Mapping[str, float]) -> PairedSample:
        """Pair up the subjects present in both mappings, in ``x`` order."""
        return cls.from_pairs((s, x[s], y[s]) for s in x if s in y)

    def __len__(self) -> int:
        return len(self.subjects)


def _pearson(x: Sequence[float], y: Sequence[float]) -> float:
    n = len(x)
    if n < 3:
        raise DegenerateSample(f"degenerate sample: need at least 3 pairs, got {n}")
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise DegenerateSample("degenerate sample: zero variance")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks, ties sharing their average rank."""
    return [float(r) for r in rankdata(values, method="average")]


def _spearman(x: Sequence[float], y: Sequence[float]) -> float:
    return _pearson(ranks(x), ranks(y))


def pearson(sample: PairedSample) -> float:
    return _pearson(sample.x, sample.y)


def spearman(sample: PairedSample) -> float:
    return _spearman(sample.x, sample.y)


_STATISTICS = {"pearson": _pearson, "spearman": _spearman}


# --- Krippendorff's alpha --------------------------------------------------------


def _delta(metric: str, values: Sequence[int], marginals: Mapping[int, Fraction]):
    """Squared-distance function over the observed value set."""
    if metric == "interval":
        return lambda c, k: Fraction((c - k) ** 2)
    if metric == "ordinal":
        position = {v: i for i, v in enumerate(values)}
        cumulative = [Fraction(0)]
        for v in values:
            cumulative.append(cumulative[-1] + marginals[v])

        def ordinal(c: int, k: int) -> Fraction:
            lo, hi = sorted((position[c], position[k]))
            between = cumulative[hi + 1] - cumulative[lo]
            return (between - (marginals[c] + marginals[k]) / 2) ** 2

        return ordinal
    raise DataError(f"unknown metric {metric!r}; expected 'ordinal' or 'interval'")


def alpha_from_units(units: Mapping[Hashable, Sequence[int]], metric: str = "ordinal") -> float:
    """Krippendorff's alpha from the values each unit received.

    Units with fewer than two values are not pairable and are dropped. When
    every pairable value is identical the expected disagreement is zero and
    alpha is reported as 1.0.
    """
    pairable = [list(v) for v in units.values() if len(v) >= 2]
    if not pairable:
        raise MetricError("no subject rated by two or more raters")

    coincidence: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
    for vals in pairable:
        weight = Fraction(1, len(vals) - 1)
        for i, c in enumerate(vals):
            for j, k in enumerate(vals):
                if i != j:
                    coincidence[(c, k)] += weight

    values = sorted({c for c, _ in coincidence})
    marginals = {v: Fraction(0) for v in values}
    for (c, _), o in coincidence.items():
        marginals[c] += o
    n = sum(marginals.values())
    delta = _delta(metric, values, marginals)

    observed = sum(o * delta(c, k) for (c, k), o in coincidence.items()) / n
    expected = sum(marginals[c] * marginals[k] * delta(c, k) for c in values for k in values) / (n * (n - 1))
    if expected == 0:
        return 1.0
    return float(1 - observed / expected)


def krippendorff_alpha(ratings: Sequence[ExpertRating], metric: str = "ordinal") -> float:
    """Agreement between raters; a unit is one (agent, task) pair."""
    units: dict[tuple[str, str], list[int]] = defaultdict(list)
    for r in ratings:
        units[(r.agent_id, r.task_id)].append(r.score)
    return alpha_from_units(units, metric)


def mean_rating_by_agent(ratings: Iterable[ExpertRating]) -> dict[str, float]:
    """Average score per agent over all raters and tasks."""
    scores: dict[str, list[int]] = defaultdict(list)
    for r in ratings:
        scores[r.agent_id].append(r.score)
    return {agent: math.fsum(s) / len(s) for agent, s in scores.items()}


# --- Bootstrap -------------------------------------------------------------------


@dataclass(frozen=True)
class BootstrapInterval:
    low: float
    high: float
    resamples: int
    redraws: int
    seed: int
    confidence: float = 0.95


def bootstrap_ci(
    sample: PairedSample,
    statistic: str = "pearson",
    resamples: int = 10_000,
    seed: int = 0,
    confidence: float = 0.95,
) -> BootstrapInterval:
    """Percentile interval for a correlation coefficient.

    Pairs are resampled with replacement from a PCG64 stream seeded with
    ``seed``. Resamples with zero variance are skipped and redrawn; the number
    of redraws is reported.
    """
    if resamples < 1000:
        raise DataError("bootstrap needs at least 1000 resamples")
    try:
        stat = _STATISTICS[statistic]
    except KeyError:
        raise DataError(f"unknown statistic {statistic!r}") from None
    x = np.asarray(sample.x, dtype=float)
    y = np.asarray(sample.y, dtype=float)
    n = len(x)
    stat(list(x), list(y))  # the full sample must itself be usable

    rng = np.random.Generator(np.random.PCG64(seed))
    estimates = np.empty(resamples)
    redraws = 0
    max_redraws = 100 * resamples
    filled = 0
    while filled < resamples:
        idx = rng.integers(0, n, size=n)
        try:
            estimates[filled] = stat(x[idx].tolist(), y[idx].tolist())
        except DegenerateSample:
            redraws += 1
            if redraws > max_redraws:
                raise DegenerateSample("degenerate sample: bootstrap could not draw usable resamples") from None
            continue
        filled += 1

    tail = (1.0 - confidence) / 2 * 100
    low, high = np.percentile(estimates, [tail, 100 - tail])
    return BootstrapInterval(
        max(-1.0, float(low)), min(1.0, float(high)), resamples, redraws, seed, confidence
    )


# --- Approach correlation ------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationResult:
    approach: str
    pearson: float
    spearman: float
    n: int
    pearson_ci: BootstrapInterval | None = None
    spearman_ci: BootstrapInterval | None = None


def correlate_approaches(
    scores: Mapping[str, Mapping[str, float]],
    expert: Mapping[str, float],
    approaches: Sequence[str] = ("efficacy", "efficacy_cost", "clear"),
    bootstrap: int = 0,
    seed: int = 0,
) -> list[CorrelationResult]:
    """Correlate each approach's per-agent score with the mean expert rating.

    ``bootstrap`` > 0 adds percentile intervals with that many resamples.
    """
    results = []
    for approach in approaches:
        if approach not in scores:
            raise DataError(f"unknown approach {approach!r}")
        sample = PairedSample.from_mappings(scores[approach], expert)
        p_ci = s_ci = None
        if bootstrap:
            p_ci = bootstrap_ci(sample, "pearson", bootstrap, seed)
            s_ci = bootstrap_ci(sample, "spearman", bootstrap, seed)
        results.append(CorrelationResult(approach, pearson(sample), spearman(sample), len(sample), p_ci, s_ci))
    return results
