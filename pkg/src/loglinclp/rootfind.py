"""Safeguarded Newton iteration for increasing functions of one variable."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable


class RootFindingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Root:
    x: float
    residual: float
    steps: int


def bracket_increasing(f: Callable[[float], float], x0: float = 1.0,
                       factor: float = 2.0, max_steps: int = 2000) -> tuple:
    """Grow ``[x0/factor, x0*factor]`` geometrically until f changes sign.

    ``f`` must be increasing on the positive reals.
    """
    lo, hi = x0 / factor, x0 * factor
    for _ in range(max_steps):
        if f(lo) <= 0.0:
            break
        lo /= factor
    else:
        raise RootFindingError("no lower bracket found")
    for _ in range(max_steps):
        if f(hi) >= 0.0:
            break
        hi *= factor
    else:
        raise RootFindingError("no upper bracket found")
    return lo, hi


def newton_bisect(fdf: Callable[[float], tuple], lo: float, hi: float, x0: float,
                  tol: float, max_steps: int = 200) -> Root:
    """Root of an increasing function inside ``[lo, hi]``.

    ``fdf(x)`` returns ``(f(x), f'(x))``.  Newton steps that leave the
    bracket, or fail to halve the residual interval, are replaced by
    bisection.  Once ``|f(x)| < tol`` one more Newton step is tried and
    kept if it does not increase the residual.
    """
    x = min(max(x0, lo), hi)
    f, df = fdf(x)
    dx_old = float("inf")
    for step in range(1, max_steps + 1):
        if abs(f) < tol:
            return _polish(fdf, x, f, df, step - 1)
        if f < 0.0:
            lo = x
        else:
            hi = x
        newton_ok = df > 0.0
        if newton_ok:
            dx = f / df
            x_new = x - dx
            newton_ok = lo < x_new < hi and abs(dx) <= 0.5 * dx_old
        if not newton_ok:
            dx = x - 0.5 * (lo + hi)
            x_new = 0.5 * (lo + hi)
        if x_new == x:
            return Root(x, f, step)
        dx_old = abs(dx)
        x = x_new
        f, df = fdf(x)
    if abs(f) < tol:
        return _polish(fdf, x, f, df, max_steps)
    raise RootFindingError(f"no convergence after {max_steps} steps (residual {f:g})")


def _polish(fdf, x, f, df, steps):
    if f == 0.0 or df <= 0.0:
        return Root(x, f, steps)
    x_new = x - f / df
    if x_new <= 0.0:
        return Root(x, f, steps)
    f_new, _ = fdf(x_new)
    if abs(f_new) <= abs(f):
        return Root(x_new, f_new, steps + 1)
    return Root(x, f, steps)
