"""Property induction and parameter estimation combined, and parse ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from loglinclp.derivation import DEFAULT_MAX_DEPTH, DEFAULT_MAX_TREES, enumerate_proof_trees
from loglinclp.estimator import IMConfig, IMTrace, estimate
from loglinclp.model import LogLinearModel, SampleError, TrainingSample, feature_matrix
from loglinclp.patterns import PropertyPattern, generate_candidates
from loglinclp.program import Goal, Program
from loglinclp.selector import DEFAULT_GAIN_THRESHOLD, score_candidates


@dataclass(frozen=True)
class InduceConfig:
    im: IMConfig = IMConfig()
    gain_threshold: float = DEFAULT_GAIN_THRESHOLD
    max_properties: int = 50
    max_rounds: int = 50
    max_depth: int = DEFAULT_MAX_DEPTH
    max_trees: int = DEFAULT_MAX_TREES


@dataclass(frozen=True)
class RoundRecord:
    round: int
    pattern: PropertyPattern
    alpha_hat: float
    gain: float
    loglik: float
    trace: IMTrace = field(repr=False, default=None)
    reports: tuple = field(repr=False, default=())

    def line(self, full_precision: bool = False) -> str:
        fmt = repr if full_precision else (lambda v: f"{v:.6f}")
        return "\t".join([str(self.round), self.pattern.key, fmt(self.alpha_hat),
                          fmt(self.gain), fmt(self.loglik)])


def _as_sample(program, corpus, cfg) -> TrainingSample:
    if isinstance(corpus, TrainingSample):
        sample = corpus
    else:
        sample = TrainingSample.from_corpus(program, list(corpus), cfg.max_depth, cfg.max_trees)
    if not len(sample):
        raise SampleError("empty corpus")
    return sample


def fit(program: Program, corpus, patterns: Sequence[PropertyPattern],
        cfg: InduceConfig = InduceConfig(), lam0: Optional[Sequence[float]] = None) -> tuple:
    """Estimate parameters for a fixed property set; returns ``(model, trace)``."""
    sample = _as_sample(program, corpus, cfg)
    return estimate(LogLinearModel.build(sample, patterns), None, cfg.im, lam0)


def induce(program: Program, corpus, cfg: InduceConfig = InduceConfig(),
           candidate_pool: Optional[Iterable[PropertyPattern]] = None) -> tuple:
    """Alternate property selection and full re-estimation.

    Starts from the uniform model with no properties.  Each round scores
    the candidates (``candidate_pool`` if given, else singletons and
    one-step extensions of the selected properties), adds the winner at
    its gain-maximizing weight and re-estimates all parameters.  Stops when
    the best gain is below ``cfg.gain_threshold`` or a size limit is hit.

    Returns ``(model, rounds)`` with one :class:`RoundRecord` per round.
    """
    sample = _as_sample(program, corpus, cfg)
    pool = None if candidate_pool is None else list(candidate_pool)
    model = LogLinearModel.build(sample)
    rounds = []
    for r in range(1, cfg.max_rounds + 1):
        if len(model.patterns) >= cfg.max_properties:
            break
        if pool is None:
            candidates = generate_candidates(model.patterns, sample.trees)
        else:
            chosen = {p.key for p in model.patterns}
            candidates = [c for c in pool if c.key not in chosen]
        reports = score_candidates(candidates, model, cfg.im)
        if not reports or reports[0].gain < cfg.gain_threshold:
            break
        best = reports[0]
        model, trace = estimate(model.extended(best.candidate, best.alpha_hat), None, cfg.im)
        rounds.append(RoundRecord(r, best.candidate, best.alpha_hat, best.gain,
                                  trace.records[-1].loglik, trace, tuple(reports)))
    return model, rounds


@dataclass(frozen=True)
class RankedTree:
    tree: object
    probability: float
    score: float


@dataclass
class Ranking:
    """Trees of one query, most probable first."""

    entries: list = field(default_factory=list)
    truncated: bool = False

    @property
    def parsed(self) -> bool:
        return bool(self.entries)

    @property
    def status(self) -> str:
        return "ok" if self.entries else "no parse"

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)


def rank(model, program: Program, goal: Goal, max_depth: int = DEFAULT_MAX_DEPTH,
         max_trees: int = DEFAULT_MAX_TREES) -> Ranking:
    """Score the trees of ``goal`` by ``lam . nu`` and normalize over them.

    ``model`` is anything with ``patterns`` and ``lam``; p0 is taken as
    uniform over the query's own trees.  Equal scores keep enumeration order.
    """
    found = enumerate_proof_trees(program, goal, max_depth, max_trees)
    if not found:
        return Ranking([], found.truncated)
    lam = np.asarray(model.lam, dtype=float)
    scores = feature_matrix(found.trees, model.patterns) @ lam if len(lam) else np.zeros(len(found))
    probs = np.exp(scores - logsumexp(scores))
    order = sorted(range(len(found)), key=lambda j: -scores[j])
    return Ranking([RankedTree(found[j], float(probs[j]), float(scores[j])) for j in order],
                   found.truncated)
