"""Log-linear distributions over the proof trees of a training sample.

The configuration space is the set of proof trees enumerated for the
sample's queries.  A tree's probability is proportional to
``exp(lam . nu(x)) * p0(x)`` with one global normalizer, and the
probability of a query is the mass of its trees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from loglinclp.derivation import (DEFAULT_MAX_DEPTH, DEFAULT_MAX_TREES,
                                  ProofTree, enumerate_proof_trees)
from loglinclp.patterns import PropertyPattern, count_occurrences, parse_pattern
from loglinclp.program import Goal, Program

MODEL_MAGIC = "loglin-clp-model 1"


class SampleError(ValueError):
    """A training query that cannot be used, e.g. one without proof trees."""


@dataclass(frozen=True, eq=False)
class TrainingSample:
    """Query tokens plus the enumerated trees of every query type.

    ``trees`` is the configuration space; ``query[j]`` is the index into
    ``goals`` of the query that labels tree ``j``.
    """

    goals: tuple
    counts: np.ndarray
    trees: tuple
    query: np.ndarray
    truncated: tuple = ()

    @classmethod
    def from_corpus(cls, program: Program, entries: Sequence[tuple],
                    max_depth: int = DEFAULT_MAX_DEPTH,
                    max_trees: int = DEFAULT_MAX_TREES) -> "TrainingSample":
        goals, counts, trees, query, truncated = [], [], [], [], []
        for goal, count in entries:
            if count < 1:
                raise SampleError(f"query {goal} has count {count}")
            found = enumerate_proof_trees(program, goal, max_depth, max_trees)
            if not found:
                raise SampleError(f"query {goal} has no proof tree within depth {max_depth}")
            if found.truncated:
                truncated.append(len(goals))
            query.extend([len(goals)] * len(found))
            trees.extend(found)
            goals.append(goal)
            counts.append(count)
        return cls(tuple(goals), np.array(counts, dtype=np.int64), tuple(trees),
                   np.array(query, dtype=np.int64), tuple(truncated))

    @property
    def total(self) -> int:
        """Number of query tokens."""
        return int(self.counts.sum())

    @cached_property
    def groups(self) -> list:
        """Tree indices of each query, i.e. X(y)."""
        return [np.flatnonzero(self.query == y) for y in range(len(self.goals))]

    def __len__(self):
        return len(self.goals)


def feature_matrix(trees: Sequence[ProofTree], patterns: Sequence[PropertyPattern]) -> np.ndarray:
    out = np.zeros((len(trees), len(patterns)), dtype=np.int64)
    for j, tree in enumerate(trees):
        for i, pat in enumerate(patterns):
            out[j, i] = count_occurrences(pat, tree)
    return out


@dataclass(frozen=True, eq=False)
class LogLinearModel:
    """``p(x) = exp(lam . nu(x)) p0(x) / Z`` over ``sample.trees``."""

    sample: TrainingSample
    patterns: tuple
    lam: np.ndarray
    features: np.ndarray = field(repr=False)
    log_p0: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, sample: TrainingSample, patterns: Sequence[PropertyPattern] = (),
              lam: Optional[Sequence[float]] = None) -> "LogLinearModel":
        """Model with uniform p0; ``lam`` defaults to zeros."""
        patterns = tuple(patterns)
        lam = np.zeros(len(patterns)) if lam is None else np.array(lam, dtype=float)
        n = len(sample.trees)
        log_p0 = np.full(n, -math.log(n)) if n else np.zeros(0)
        return cls(sample, patterns, lam, feature_matrix(sample.trees, patterns), log_p0)

    def __post_init__(self):
        if len(self.lam) != len(self.patterns):
            raise ValueError(f"{len(self.lam)} parameters for {len(self.patterns)} properties")
        if self.features.shape != (len(self.sample.trees), len(self.patterns)):
            raise ValueError("feature matrix does not match the space and patterns")

    def with_lambda(self, lam) -> "LogLinearModel":
        return LogLinearModel(self.sample, self.patterns, np.array(lam, dtype=float),
                              self.features, self.log_p0)

    def extended(self, pattern: PropertyPattern, value: float = 0.0) -> "LogLinearModel":
        """The model with ``pattern`` appended at log-parameter ``value``."""
        column = feature_matrix(self.sample.trees, [pattern])
        return LogLinearModel(self.sample, self.patterns + (pattern,),
                              np.append(self.lam, value),
                              np.hstack([self.features, column]), self.log_p0)

    @property
    def size(self) -> int:
        return len(self.sample.trees)

    @cached_property
    def totals(self) -> np.ndarray:
        """nu_#(x): summed property counts per tree."""
        return self.features.sum(axis=1)

    @cached_property
    def log_weights(self) -> np.ndarray:
        return self.features @ self.lam + self.log_p0

    @cached_property
    def log_normalizer(self) -> float:
        return float(logsumexp(self.log_weights))

    def unnormalized_weight(self, x: int) -> float:
        return math.exp(self.log_weights[x])

    def normalizer(self) -> float:
        return math.exp(self.log_normalizer)

    @cached_property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_weights - self.log_normalizer)

    def prob(self, x: int) -> float:
        return float(self.probs[x])

    @cached_property
    def conditional_probs(self) -> np.ndarray:
        """k(x | Y(x)) for every tree, normalized within each query."""
        out = np.empty(self.size)
        for idx in self.sample.groups:
            w = self.log_weights[idx]
            out[idx] = np.exp(w - logsumexp(w))
        return out

    def conditional_prob(self, x: int, y: Optional[int] = None) -> float:
        if y is not None and self.sample.query[x] != y:
            raise ValueError(f"tree {x} is not a proof tree of query {y}")
        return float(self.conditional_probs[x])

    @cached_property
    def empirical_weights(self) -> np.ndarray:
        """count(Y(x)) * k(x | Y(x)); summing f against it gives sum_y k[f]."""
        return self.sample.counts[self.sample.query] * self.conditional_probs

    def _values(self, f) -> np.ndarray:
        if callable(f):
            return np.array([float(f(t)) for t in self.sample.trees])
        values = np.asarray(f, dtype=float)
        if values.shape != (self.size,):
            raise ValueError("expected one value per tree in the space")
        return values

    def expectation_model(self, f: Union[Callable, Sequence[float]]) -> float:
        """p[f]; ``f`` is a function of a ProofTree or one value per tree."""
        return math.fsum(self.probs * self._values(f))

    def expectation_conditional(self, f: Union[Callable, Sequence[float]], y: int) -> float:
        """k[f] for query ``y``: the expectation over X(y) only."""
        idx = self.sample.groups[y]
        return math.fsum(self.conditional_probs[idx] * self._values(f)[idx])

    def query_log_prob(self, y: int) -> float:
        return float(logsumexp(self.log_weights[self.sample.groups[y]])) - self.log_normalizer

    def log_likelihood(self) -> float:
        """Token-weighted sum of log query probabilities."""
        if not len(self.sample):
            return 0.0
        return math.fsum(int(c) * self.query_log_prob(y) for y, c in enumerate(self.sample.counts))


def log_likelihood(model: LogLinearModel, sample: Optional[TrainingSample] = None) -> float:
    if sample is not None and sample is not model.sample:
        raise ValueError("model was built over a different sample")
    return model.log_likelihood()


# --------------------------------------------------------------------------
# model files
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SavedModel:
    patterns: tuple
    lam: np.ndarray
    depth: int = DEFAULT_MAX_DEPTH

    def bind(self, sample: TrainingSample) -> LogLinearModel:
        return LogLinearModel.build(sample, self.patterns, self.lam)


class ModelFormatError(ValueError):
    pass


def dump_model(model, depth: int = DEFAULT_MAX_DEPTH) -> str:
    """Serialize patterns and parameters; floats are written with ``repr``."""
    lines = [MODEL_MAGIC, f"depth {depth}", "p0 uniform"]
    for pattern, value in zip(model.patterns, model.lam):
        lines.append(f"prop {float(value)!r} {pattern.key}")
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> SavedModel:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0].strip() != MODEL_MAGIC:
        raise ModelFormatError(f"missing header {MODEL_MAGIC!r}")
    depth = DEFAULT_MAX_DEPTH
    patterns, lam = [], []
    for n, line in enumerate(lines[1:], 2):
        head, _, rest = line.strip().partition(" ")
        try:
            if head == "depth":
                depth = int(rest)
            elif head == "p0":
                if rest.strip() != "uniform":
                    raise ModelFormatError(f"unsupported p0 {rest.strip()!r}")
            elif head == "prop":
                value, _, pattern = rest.strip().partition(" ")
                lam.append(float(value))
                patterns.append(parse_pattern(pattern))
            else:
                raise ModelFormatError(f"unknown record {head!r}")
        except ValueError as exc:
            raise ModelFormatError(f"model record {n}: {exc}") from exc
    return SavedModel(tuple(patterns), np.array(lam, dtype=float), depth)
