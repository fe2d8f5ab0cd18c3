"""Fractional initial value problems ``aD_t^alpha x + f(t, x) = g(t)``, ``x(a) = x0``.

The fractional operator is replaced by one of the expansions, which turns
the problem into a classical ODE system. Moment states are integrated in the
scaled form ``W_p = V_p / (t-a)^(p-1)``; this removes the singular powers of
``t-a`` from the right-hand side, leaving only ``1/(t-a)`` factors.
"""

from __future__ import annotations

import enum
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .errors import DomainError, IntegrationError, UnsupportedProblemError
from .numerics import DenseSolution, OdeSystem, error_norm, solve_ivp, start_offset

__all__ = [
    "FodeMethod",
    "FodeProblem",
    "FodeSolution",
    "solve_fode_int",
    "solve_fode_mom",
    "solve_fode_mom_noB",
    "solve_fode",
]


class FodeMethod(enum.Enum):
    INTEGER = "integer"
    MOMENT = "moment"
    MOMENT_NO_B = "moment-noB"


@dataclass(frozen=True)
class FodeProblem:
    alpha: float
    a: float
    b: float
    f: Callable[[float, float], float]
    g: Callable[[float], float]
    x0: float = 0.0
    start: float | None = None  # start offset; default 1e-6 (b - a)

    def __post_init__(self):
        object.__setattr__(self, "alpha", specfun.as_alpha(self.alpha))
        if not self.a < self.b:
            raise DomainError(f"need a < b, got a={self.a}, b={self.b}")

    @property
    def delta(self) -> float:
        return start_offset(self.a, self.b) if self.start is None else float(self.start)


@dataclass
class FodeSolution:
    """Approximate solution; ``trajectory(t)`` is defined on ``[a, b]``.

    Values on ``[a, a+delta)`` are the continuous extension from ``a+delta``.
    """

    trajectory: Callable[[float], float]
    method: FodeMethod
    N: int
    t_start: float
    t_end: float
    moments: Callable[[float], np.ndarray] | None = field(default=None, repr=False)
    error: float | None = None

    def __call__(self, t):
        return self.trajectory(t)

    def error_vs(self, reference: Callable[[float], float], tol: float = 1e-9) -> float:
        """2-norm distance to ``reference`` over ``[a+delta, b]``; stored in ``error``."""
        self.error = error_norm(self.trajectory, reference, self.t_start, self.t_end, tol)
        return self.error


def _run(system: OdeSystem, t_end: float, rel_tol: float, abs_tol: float, a: float) -> DenseSolution:
    try:
        return solve_ivp(system, t_end, rel_tol, abs_tol, extend_left=a)
    except IntegrationError as exc:
        raise IntegrationError(f"singular start or stiff problem: {exc}", exc.t_fail) from exc


def solve_fode_int(problem: FodeProblem, rel_tol: float = 1e-6, abs_tol: float = 1e-9) -> FodeSolution:
    """Integer-series replacement truncated after the first derivative.

    ``C(0) d^-alpha x + C(1) d^(1-alpha) x' + f = g`` with ``d = t - a``; one
    initial condition only allows ``N = 1``.
    """
    pr = problem
    al, a = pr.alpha, pr.a
    c0, c1 = specfun.coeff_c_int(0, al), specfun.coeff_c_int(1, al)

    def rhs(t, y):
        d = t - a
        x = y[0]
        return [((pr.g(t) - pr.f(t, x)) * d**al - c0 * x) / (c1 * d)]

    t0 = a + pr.delta
    sol = _run(OdeSystem(rhs, t0, np.array([pr.x0], dtype=float)), pr.b, rel_tol, abs_tol, a)
    return FodeSolution(sol.component(0), FodeMethod.INTEGER, 1, t0, pr.b)


def _moment_states(sol: DenseSolution, a: float, N: int, offset: int):
    def moments(t):
        y = sol(t)
        d = np.asarray(t, dtype=float) - a
        powers = np.arange(1, N, dtype=float)
        w = y[offset:]
        if w.ndim == 1:
            return w * d**powers
        return w * d[None, :] ** powers[:, None]

    return moments


def solve_fode_mom(problem: FodeProblem, N: int, rel_tol: float = 1e-6, abs_tol: float = 1e-9) -> FodeSolution:
    """Moment-expansion replacement, an ``N``-dimensional system in ``(x, W_2..W_N)``.

    ``x' = [(g - f) d^alpha - A x + sum C_p W_p] / (B d)`` and
    ``W_p' = (1-p)(x + W_p) / d``. Starting from ``W_p = -x0`` makes the
    moments consistent with ``x`` held at ``x0`` on ``[a, a+delta]``.
    """
    pr = problem
    al, a = pr.alpha, pr.a
    tab = specfun.coeff_table(al, N)
    if abs(tab.b_coeff) < 1e-14:
        raise DomainError(f"B(alpha, N) = {tab.b_coeff:.3g} is too small to solve for x'")
    c = np.array(tab.c_moment)
    pm1 = np.arange(1, N, dtype=float)  # p - 1

    def rhs(t, y):
        d = t - a
        x, w = y[0], y[1:]
        dx = ((pr.g(t) - pr.f(t, x)) * d**al - tab.a_coeff * x + c @ w) / (tab.b_coeff * d)
        return np.concatenate([[dx], -pm1 * (x + w) / d])

    t0 = a + pr.delta
    y0 = np.concatenate([[pr.x0], np.full(N - 1, -float(pr.x0))])
    sol = _run(OdeSystem(rhs, t0, y0), pr.b, rel_tol, abs_tol, a)
    return FodeSolution(sol.component(0), FodeMethod.MOMENT, N, t0, pr.b, _moment_states(sol, a, N, 1))


def _affine_split(f: Callable, a: float, b: float):
    """Return ``(f0, f1)`` with ``f(t, x) = f0(t) + f1(t) x``, or raise if ``f`` is not affine in ``x``."""
    for t in np.linspace(a, b, 7)[1:]:
        v0, v1, v2, vm = f(t, 0.0), f(t, 1.0), f(t, 2.0), f(t, -3.5)
        scale = 1.0 + abs(v0) + abs(v1) + abs(v2)
        if abs(v2 - 2.0 * v1 + v0) > 1e-9 * scale or abs(vm - (v0 - 3.5 * (v1 - v0))) > 1e-9 * scale:
            raise UnsupportedProblemError(
                "dropping the derivative term needs f affine in x so that x can be eliminated algebraically"
            )
    return (lambda t: f(t, 0.0)), (lambda t: f(t, 1.0) - f(t, 0.0))


def solve_fode_mom_noB(problem: FodeProblem, N: int, rel_tol: float = 1e-6, abs_tol: float = 1e-9) -> FodeSolution:
    """Moment expansion without the first-derivative term.

    The relation ``A d^-alpha x - sum C_p d^-alpha W_p + f0 + f1 x = g`` fixes
    ``x`` algebraically from the moments, so only ``W_2..W_N`` are integrated.

    Raises:
        UnsupportedProblemError: ``f`` is not affine in ``x``.
    """
    pr = problem
    al, a = pr.alpha, pr.a
    tab = specfun.coeff_table(al, N)
    c = np.array(tab.c_moment)
    pm1 = np.arange(1, N, dtype=float)
    f0, f1 = _affine_split(pr.f, a, pr.b)

    def state_x(t, w):
        d = t - a
        den = tab.a_coeff + f1(t) * d**al
        if den == 0.0:
            raise UnsupportedProblemError(f"x cannot be eliminated at t={t}: its coefficient vanishes")
        return ((pr.g(t) - f0(t)) * d**al + c @ w) / den

    def rhs(t, w):
        return -pm1 * (state_x(t, w) + w) / (t - a)

    t0 = a + pr.delta
    sol = _run(OdeSystem(rhs, t0, np.full(N - 1, -float(pr.x0))), pr.b, rel_tol, abs_tol, a)

    def trajectory(t):
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        w = sol(ts)
        vals = np.array([state_x(max(s, t0), w[:, k]) for k, s in enumerate(ts)])
        return float(vals[0]) if np.ndim(t) == 0 else vals

    return FodeSolution(trajectory, FodeMethod.MOMENT_NO_B, N, t0, pr.b, _moment_states(sol, a, N, 0))


def solve_fode(problem: FodeProblem, method, N: int | None = None, rel_tol: float = 1e-6, abs_tol: float = 1e-9):
    """Dispatch on ``method``; ``N`` is ignored by the integer method."""
    method = FodeMethod(method)
    if method is FodeMethod.INTEGER:
        return solve_fode_int(problem, rel_tol, abs_tol)
    if N is None or N < 2:
        raise DomainError("moment methods need N >= 2")
    if method is FodeMethod.MOMENT:
        return solve_fode_mom(problem, N, rel_tol, abs_tol)
    return solve_fode_mom_noB(problem, N, rel_tol, abs_tol)
