"""Fractional derivatives of sampled data with an adaptive truncation order."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import specfun
from .errors import DomainError, InputFormatError, NonConvergenceError
from .numerics import Grid, finite_difference_first

__all__ = [
    "SampledFunction",
    "TabularResult",
    "tabular_frac_derivative",
    "adaptive_order",
    "read_csv",
    "write_csv",
]


@dataclass(frozen=True)
class SampledFunction:
    """Values ``x`` on a strictly increasing grid ``t``; ``t[0]`` is the base point."""

    t: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        x = np.asarray(self.x, dtype=float)
        Grid(tuple(t))
        if x.shape != t.shape:
            raise DomainError(f"grid has {t.size} points but {x.size} values were given")
        if not np.all(np.isfinite(x)):
            raise DomainError("sample values must be finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)

    @classmethod
    def from_function(cls, f, t) -> SampledFunction:
        t = np.asarray(t, dtype=float)
        return cls(t, np.array([float(f(s)) for s in t]))


@dataclass
class TabularResult:
    """Approximate derivative at every sample.

    ``values[0]`` is the continuous extension at ``a + delta`` with
    ``delta`` half the first grid spacing. ``last_norm`` is the final
    successive-difference norm of an adaptive run.
    """

    t: np.ndarray
    values: np.ndarray
    order_used: int
    iterations: int = 0
    last_norm: float | None = None


def _segment(r, x0, x1, e):
    """``int_r^1 s^e l(s) ds`` for ``l`` linear with ``l(r)=x0``, ``l(1)=x1``."""
    c1 = (x1 - x0) / (1.0 - r)
    c0 = x0 - c1 * r
    return c0 * (1.0 - r ** (e + 1)) / (e + 1) + c1 * (1.0 - r ** (e + 2)) / (e + 2)


def _normalized_moments(u: np.ndarray, x: np.ndarray, exps: np.ndarray) -> np.ndarray:
    """``m_e(u_i) = u_i^-(e+1) int_0^{u_i} u^e xlin(u) du`` for i >= 1, with u_0 = 0.

    Runs the recurrence ``m(i) = (u_{i-1}/u_i)^(e+1) m(i-1) + segment`` so that
    high powers never under- or overflow.
    """
    out = np.empty((exps.size, u.size - 1))
    prev = np.zeros(exps.size)
    for i in range(1, u.size):
        r = u[i - 1] / u[i]
        prev = r ** (exps + 1) * prev + _segment(r, x[i - 1], x[i], exps)
        out[:, i - 1] = prev
    return out


def _combine(tab: specfun.CoeffTable, d: np.ndarray, x: np.ndarray, xdot: np.ndarray, m: np.ndarray) -> np.ndarray:
    al = tab.alpha
    w = np.array([(p - 1) * tab.c(p) for p in range(2, tab.N + 1)])
    return d ** (-al) * (tab.a_coeff * x + tab.b_coeff * d * xdot + w @ m)


def tabular_frac_derivative(data: SampledFunction, alpha, N: int) -> TabularResult:
    """Moment expansion of the left derivative at every sample.

    The first derivative comes from second-order finite differences. The
    moments integrate ``(tau-a)^(p-2)`` exactly against the piecewise linear
    interpolant of the data, which keeps the result exact on constants.
    """
    al = specfun.as_alpha(alpha)
    if N < 2:
        raise DomainError("tabular differentiation needs N >= 2")
    t, x = data.t, data.x
    if t.size < 3:
        raise DomainError("tabular differentiation needs at least 3 samples")
    tab = specfun.coeff_table(al, N)
    a = t[0]
    u = t - a
    xdot = finite_difference_first(t, x)
    exps = np.arange(N - 1, dtype=float)
    values = np.empty_like(t)
    values[1:] = _combine(tab, u[1:], x[1:], xdot[1:], _normalized_moments(u, x, exps))

    # extension to the base point, evaluated at a + h1/2
    delta = 0.5 * u[1]
    xd = 0.5 * (x[0] + x[1])
    xdotd = 0.5 * (xdot[0] + xdot[1])
    m0 = _segment(0.0, x[0], xd, exps)[:, None]
    values[0] = _combine(tab, np.array([delta]), np.array([xd]), np.array([xdotd]), m0)[0]
    return TabularResult(t.copy(), values, N)


def adaptive_order(data: SampledFunction, alpha, eps: float, N0: int = 2, Nmax: int = 200) -> TabularResult:
    """Raise ``N`` from ``N0`` until successive results differ by less than ``eps``.

    The difference is the vector 2-norm over ``t_1..t_n``; ``t_0`` is left out
    because the derivative is singular there.

    Raises:
        NonConvergenceError: ``Nmax`` reached first; carries the last norm.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    if N0 < 2 or Nmax <= N0:
        raise DomainError("need 2 <= N0 < Nmax")
    old = tabular_frac_derivative(data, alpha, N0)
    norm = math.inf
    for k, N in enumerate(range(N0 + 1, Nmax + 1), start=1):
        new = tabular_frac_derivative(data, alpha, N)
        norm = float(np.linalg.norm(new.values[1:] - old.values[1:]))
        if norm < eps:
            new.iterations = k
            new.last_norm = norm
            return new
        old = new
    raise NonConvergenceError(f"no convergence to eps={eps} by N={Nmax}; last norm {norm:.3g}", norm)


def read_csv(path) -> SampledFunction:
    """Read ``t,x`` samples; the header row is required."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputFormatError("empty CSV file", 1)
    header = [c.strip() for c in rows[0]]
    if header[:2] != ["t", "x"]:
        raise InputFormatError(f"expected header 't,x', got {','.join(header)!r}", 1)
    ts, xs = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise InputFormatError(f"row {lineno}: expected 2 columns, got {len(row)}", lineno)
        try:
            ts.append(float(row[0]))
            xs.append(float(row[1]))
        except ValueError:
            raise InputFormatError(f"row {lineno}: not a number in {row!r}", lineno) from None
    try:
        return SampledFunction(np.array(ts), np.array(xs))
    except DomainError as exc:
        raise InputFormatError(f"invalid samples: {exc}") from None


def write_csv(path, result: TabularResult) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "dalpha_x"])
        for t, v in zip(result.t, result.values):
            w.writerow([repr(float(t)), repr(float(v))])
