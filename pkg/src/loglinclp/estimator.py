"""Parameter estimation from unparsed queries by iterative maximization.

Each step replaces ``lam`` by ``lam + gamma`` where ``gamma`` maximizes a
separable, concave lower bound ``A(gamma, lam)`` on the log-likelihood
improvement.  Coordinate ``i`` of the maximizer solves

    sum_y k[nu_i] = N * p[nu_i * exp(gamma_i * nu_#)]

with ``N`` the number of query tokens, ``k`` the conditional distribution
of a query's trees and ``p`` the model distribution.  In ``beta =
exp(gamma_i)`` the right hand side is a polynomial with non-negative
coefficients, so the root is unique and found by safeguarded Newton.
When every tree has ``nu_# == 1`` the root is the ratio of the two sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from loglinclp.model import LogLinearModel, TrainingSample
from loglinclp.rootfind import bracket_increasing, newton_bisect

#: Lower clamp on an update whose conditional target is zero.
GAMMA_FLOOR = math.log(1e-9)

# Relative gap below which the two sides of an update equation are taken
# as equal; differences this small are summation rounding.
_MATCH_RTOL = 1e-13


class EstimationError(RuntimeError):
    """The log-likelihood decreased across a step."""


@dataclass(frozen=True)
class IMConfig:
    loglik_tol: float = 1e-6
    root_tol: float = 1e-10
    max_iters: int = 1000
    max_root_steps: int = 200
    gamma_floor: float = GAMMA_FLOOR

    def __post_init__(self):
        if min(self.loglik_tol, self.root_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 0 or self.max_root_steps < 1:
            raise ValueError("iteration limits must be positive")


@dataclass(frozen=True)
class Update:
    """Solution of one coordinate's update equation."""

    gamma: float
    residual: float = 0.0
    flag: Optional[str] = None


def expectations_match(target: float, mass: float) -> bool:
    return target == mass or math.isclose(target, mass, rel_tol=_MATCH_RTOL, abs_tol=0.0)


def _check(model: LogLinearModel, sample: Optional[TrainingSample]):
    if sample is not None and sample is not model.sample:
        raise ValueError("model was built over a different sample")
    return model.sample


def expected_counts(model: LogLinearModel, values: np.ndarray) -> tuple:
    """(sum_y k[f], N * p[f]) for per-tree values ``f``."""
    values = np.asarray(values, dtype=float)
    target = math.fsum(model.empirical_weights * values)
    mass = model.sample.total * math.fsum(model.probs * values)
    return target, mass


def auxiliary(gamma: Sequence[float], model: LogLinearModel,
              sample: Optional[TrainingSample] = None) -> float:
    """Lower bound A(gamma, lam) on L(lam + gamma) - L(lam).

    Evaluated as ``sum_y k[gamma . nu] - N p[sum_i nubar_i expm1(gamma_i nu_#)]``,
    which equals the textbook form because the ``nubar_i`` of a tree sum to
    one.  A tree with ``nu_# == 0`` contributes ``exp(0) - 1 = 0`` whatever
    convex weights are chosen for it, so it is simply skipped.
    """
    sample = _check(model, sample)
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != model.lam.shape:
        raise ValueError("gamma must have one entry per property")
    nu = model.features
    tot = model.totals
    gain = math.fsum(model.empirical_weights * (nu @ gamma))
    live = tot > 0
    share = nu[live] / tot[live, None]
    spread = np.expm1(np.outer(tot[live], gamma))
    penalty = math.fsum(model.probs[live] * (share * spread).sum(axis=1))
    return gain - sample.total * penalty


def clamped_update(target, mass, cfg):
    if mass == 0.0:
        return Update(0.0, 0.0, "absent")
    if target == 0.0:
        return Update(cfg.gamma_floor, 0.0, "clamped")
    return None


def solve_polynomial(coef: dict, target: float, cfg: IMConfig) -> Update:
    """Solve ``sum_e coef[e] * beta**e = target`` for ``gamma = ln beta``.

    ``coef`` maps positive integer exponents to non-negative weights.
    """
    exps = np.array(sorted(coef), dtype=float)
    weights = np.array([coef[e] for e in sorted(coef)], dtype=float)
    mass = math.fsum(weights)
    early = clamped_update(target, mass, cfg)
    if early is not None:
        return early
    if expectations_match(target, mass):
        return Update(0.0, mass - target)

    def g(beta):
        return math.fsum(weights * beta ** exps) - target

    def gdg(beta):
        powers = beta ** (exps - 1.0)
        return (math.fsum(weights * powers * beta) - target,
                math.fsum(weights * exps * powers))

    lo, hi = bracket_increasing(g)
    root = newton_bisect(gdg, lo, hi, 1.0, cfg.root_tol * target, cfg.max_root_steps)
    return Update(math.log(root.x), root.residual)


def _coordinate_polynomial(model: LogLinearModel, i: int) -> dict:
    counts = model.features[:, i]
    n = model.sample.total
    terms = {}
    for x in np.flatnonzero(counts):
        terms.setdefault(int(model.totals[x]), []).append(n * model.probs[x] * counts[x])
    return {e: math.fsum(ws) for e, ws in terms.items()}


def solve_update(i: int, model: LogLinearModel, sample: Optional[TrainingSample] = None,
                 cfg: IMConfig = IMConfig()) -> Update:
    """General update for coordinate ``i``."""
    _check(model, sample)
    target, _ = expected_counts(model, model.features[:, i])
    return solve_polynomial(_coordinate_polynomial(model, i), target, cfg)


def closed_form_update(i: int, model: LogLinearModel, sample: Optional[TrainingSample] = None,
                       cfg: IMConfig = IMConfig()) -> Update:
    """``ln(sum_y k[nu_i] / sum_y p[nu_i])``; requires ``nu_# == 1`` on every tree."""
    _check(model, sample)
    if not np.all(model.totals == 1):
        raise ValueError("closed form needs exactly one property occurrence per tree")
    target, mass = expected_counts(model, model.features[:, i])
    early = clamped_update(target, mass, cfg)
    if early is not None:
        return early
    if expectations_match(target, mass):
        return Update(0.0, mass - target)
    return Update(math.log(target / mass), 0.0)


@dataclass(frozen=True)
class IMRecord:
    iteration: int
    lam: np.ndarray
    loglik: float
    gamma: Optional[np.ndarray] = None
    residuals: Optional[np.ndarray] = None
    flags: tuple = ()


@dataclass
class IMTrace:
    records: list = field(default_factory=list)
    converged: bool = False

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def logliks(self) -> list:
        return [r.loglik for r in self.records]

    def lines(self, full_precision: bool = False) -> list:
        """Tab-separated ``iteration, L, lam_1 ... lam_n`` rows."""
        fmt = repr if full_precision else (lambda v: f"{v:.6f}")
        return ["\t".join([str(r.iteration), fmt(float(r.loglik))] + [fmt(float(v)) for v in r.lam])
                for r in self.records]


def uses_closed_form(model: LogLinearModel) -> bool:
    return model.features.shape[1] > 0 and bool(np.all(model.totals == 1))


def im_step(model: LogLinearModel, sample: Optional[TrainingSample] = None,
            cfg: IMConfig = IMConfig()) -> tuple:
    """One application of the IM mapping.

    Returns ``(new_lam, updates)`` with one :class:`Update` per property.
    """
    _check(model, sample)
    solver = closed_form_update if uses_closed_form(model) else solve_update
    updates = [solver(i, model, None, cfg) for i in range(len(model.patterns))]
    gamma = np.array([u.gamma for u in updates], dtype=float)
    return model.lam + gamma, updates


def estimate(model: LogLinearModel, sample: Optional[TrainingSample] = None,
             cfg: IMConfig = IMConfig(), lam0: Optional[Sequence[float]] = None) -> tuple:
    """Iterate :func:`im_step` until the log-likelihood settles.

    Stops when ``|L(t+1) - L(t)| < cfg.loglik_tol`` or after
    ``cfg.max_iters`` steps.  Returns ``(model, trace)``; raises
    :class:`EstimationError` if a step lowers the log-likelihood.
    """
    _check(model, sample)
    if lam0 is not None:
        model = model.with_lambda(lam0)
    loglik = model.log_likelihood()
    trace = IMTrace([IMRecord(0, model.lam.copy(), loglik)])
    if not model.patterns:
        trace.converged = True
        return model, trace
    for it in range(1, cfg.max_iters + 1):
        lam, updates = im_step(model, None, cfg)
        new = model.with_lambda(lam)
        new_loglik = new.log_likelihood()
        if new_loglik < loglik - 1e-12 * max(1.0, abs(loglik)):
            raise EstimationError(
                f"log-likelihood fell from {loglik!r} to {new_loglik!r} at iteration {it}")
        trace.records.append(IMRecord(
            it, lam.copy(), new_loglik,
            np.array([u.gamma for u in updates]),
            np.array([u.residual for u in updates]),
            tuple(u.flag for u in updates)))
        delta = abs(new_loglik - loglik)
        model, loglik = new, new_loglik
        if delta < cfg.loglik_tol:
            trace.converged = True
            break
    return model, trace
