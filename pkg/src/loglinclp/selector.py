"""Choosing the next property by approximate gain.

Adding candidate ``c`` with weight ``alpha`` while holding the other
parameters fixed improves the log-likelihood by at least

    G_c(alpha) = alpha * sum_y k[c] - N * p[expm1(alpha * c)],

which is concave in ``alpha`` and vanishes at zero.  Candidates are scored
by its maximum and the best one is selected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from loglinclp.estimator import (IMConfig, Update, clamped_update, expectations_match,
                                 expected_counts, solve_polynomial)
from loglinclp.model import LogLinearModel, TrainingSample, feature_matrix
from loglinclp.patterns import PropertyPattern

DEFAULT_GAIN_THRESHOLD = 1e-4


@dataclass(frozen=True)
class GainReport:
    candidate: PropertyPattern
    alpha_hat: float
    gain: float
    flag: Optional[str] = None

    def line(self, full_precision: bool = False) -> str:
        fmt = repr if full_precision else (lambda v: f"{v:.6f}")
        return f"{self.candidate.key}\t{fmt(self.alpha_hat)}\t{fmt(self.gain)}"


def _column(candidate: PropertyPattern, model: LogLinearModel) -> np.ndarray:
    return feature_matrix(model.sample.trees, [candidate])[:, 0]


def _alpha(counts: np.ndarray, model: LogLinearModel, cfg: IMConfig,
           method: str = "auto") -> Update:
    target, mass = expected_counts(model, counts)
    if method == "closed" or (method == "auto" and np.all(counts <= 1)):
        early = clamped_update(target, mass, cfg)
        if early is not None:
            return early
        if expectations_match(target, mass):
            return Update(0.0, mass - target)
        return Update(math.log(target / mass))
    n = model.sample.total
    terms = {}
    for x in np.flatnonzero(counts):
        terms.setdefault(int(counts[x]), []).append(n * model.probs[x] * counts[x])
    return solve_polynomial({e: math.fsum(ws) for e, ws in terms.items()}, target, cfg)


def gain_value(alpha: float, counts: np.ndarray, model: LogLinearModel) -> float:
    """G_c(alpha, lam) for per-tree candidate counts."""
    counts = np.asarray(counts, dtype=float)
    target = math.fsum(model.empirical_weights * counts)
    return alpha * target - model.sample.total * math.fsum(model.probs * np.expm1(alpha * counts))


def gain_alpha(candidate: PropertyPattern, model: LogLinearModel,
               sample: Optional[TrainingSample] = None, cfg: IMConfig = IMConfig(),
               method: str = "auto") -> float:
    """Maximizer of the approximate gain.

    ``method`` is "closed" (ratio of expectations, exact for 0/1-valued
    candidates), "newton" (general root finder) or "auto".
    """
    if method not in ("auto", "closed", "newton"):
        raise ValueError(f"unknown method {method!r}")
    return _alpha(_column(candidate, model), model, cfg, method).gamma


def gain(candidate: PropertyPattern, model: LogLinearModel,
         sample: Optional[TrainingSample] = None, cfg: IMConfig = IMConfig()) -> GainReport:
    counts = _column(candidate, model)
    update = _alpha(counts, model, cfg)
    # G is concave with G(0) = 0, so a negative value is rounding.
    value = 0.0 if update.gamma == 0.0 else max(gain_value(update.gamma, counts, model), 0.0)
    return GainReport(candidate, update.gamma, value, update.flag)


def score_candidates(candidates: Iterable[PropertyPattern], model: LogLinearModel,
                     cfg: IMConfig = IMConfig()) -> list:
    """Gain reports, best first; ties go to smaller, then lexically smaller patterns."""
    unique = {}
    for c in candidates:
        unique.setdefault(c.key, c)
    reports = [gain(c, model, None, cfg) for c in unique.values()]
    reports.sort(key=lambda r: (-r.gain, r.candidate.size, r.candidate.key))
    return reports


def select_property(candidates: Iterable[PropertyPattern], model: LogLinearModel,
                    sample: Optional[TrainingSample] = None, cfg: IMConfig = IMConfig(),
                    threshold: float = DEFAULT_GAIN_THRESHOLD) -> Optional[GainReport]:
    """Best candidate, or None if there is none with gain at least ``threshold``."""
    reports = score_candidates(candidates, model, cfg)
    if not reports or reports[0].gain < threshold:
        return None
    return reports[0]
