"""Expansion-based solutions of two fractional variational problems.

Problem "51" (functions ``ex51_*``): minimize int_0^1 (0D_t^alpha x - x'^2) dt
with x(0)=0, x(1)=1.
Problem "52" (functions ``ex52_*``): minimize int_0^1 (0D_t^alpha x - 1)^2 dt
with x(0)=0, x(1)=1/Gamma(alpha+1).

Replacing the fractional derivative by the moment expansion gives a
classical optimal control problem whose Hamiltonian system is a linear
two-point boundary value problem in ``(x, V_2..V_N, lambda_1..lambda_N)``.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import oracles, specfun
from .errors import DomainError, UnsupportedProblemError
from .numerics import TpbvpLinear, error_norm, geometric_nodes, integrate_adaptive, solve_tpbvp_linear, start_offset

__all__ = [
    "VarMethod",
    "VariationalSolution",
    "ex51_integer_closed_form",
    "ex51_moment_closed_form",
    "ex51_moment_coefficient",
    "ex51_moment_tpbvp",
    "ex52_integer",
    "ex52_moment_tpbvp",
    "ex52_modal_solution",
    "report_error",
    "ex52_control",
    "ex52_objective",
]

DELTA = start_offset(0.0, 1.0)


class VarMethod(enum.Enum):
    INTEGER_EL = "integer"
    MOMENT_CLOSED_FORM = "moment"
    MOMENT_TPBVP = "moment-tpbvp"


@dataclass
class VariationalSolution:
    """Approximate minimizer on ``[0, 1]`` and its 2-norm error.

    ``states`` gives the full Hamiltonian state vector for TPBVP solutions.
    """

    solution: Callable[[float], float]
    method: VarMethod
    N: int
    alpha: float
    error_vs_exact: float | None = None
    states: Callable[[float], np.ndarray] | None = field(default=None, repr=False)
    scaled_states: Callable[[float], np.ndarray] | None = field(default=None, repr=False)

    def __call__(self, t):
        return self.solution(t)


def report_error(sol: VariationalSolution, exact: Callable[[float], float], tol: float = 1e-10) -> float:
    """2-norm distance to ``exact`` over ``[delta, 1-delta]``; stored on ``sol``."""
    sol.error_vs_exact = error_norm(sol.solution, exact, DELTA, 1.0 - DELTA, tol)
    return sol.error_vs_exact


def _vectorize(fn):
    def wrapped(t):
        out = fn(np.asarray(t, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    return wrapped


def ex51_integer_closed_form(alpha, N: int) -> VariationalSolution:
    """Closed-form minimizer after replacing the derivative by the integer series."""
    al = specfun.as_alpha(alpha)
    if N < 0:
        raise DomainError("N must be non-negative")
    s = math.fsum((-1) ** n * math.gamma(n + 1.0 - al) * specfun.coeff_c_int(n, al) for n in range(N + 1))
    k = s / (2.0 * math.gamma(3.0 - al))
    sol = VariationalSolution(_vectorize(lambda t: -k * t ** (2.0 - al) + (1.0 + k) * t), VarMethod.INTEGER_EL, N, al)
    report_error(sol, lambda t: oracles.exact_ex51_solution(al, t))
    return sol


def ex51_moment_coefficient(alpha, N: int) -> float:
    """The coefficient ``M(alpha, N)`` of ``t^(2-alpha)`` in the moment closed form."""
    al = specfun.as_alpha(alpha)
    tab = specfun.coeff_table(al, N)
    tail = math.fsum(tab.c(p) * (1 - p) / ((1.0 - al) * (2.0 - p - al)) for p in range(2, N + 1))
    return (tab.b_coeff - tab.a_coeff / (1.0 - al) - tail) / (2.0 * (2.0 - al))


def ex51_moment_closed_form(alpha, N: int) -> VariationalSolution:
    al = specfun.as_alpha(alpha)
    if N < 2:
        raise DomainError("moment expansion needs N >= 2")
    tab = specfun.coeff_table(al, N)
    M = ex51_moment_coefficient(al, N)
    ps = np.arange(2, N + 1)
    w = np.array([tab.c(p) / (2.0 * p * (2.0 - p - al)) for p in ps])
    lin = 1.0 - M + math.fsum(w)

    def x(t):
        t = np.asarray(t, dtype=float)
        poly = np.tensordot(w, t[None, ...] ** ps.reshape((-1,) + (1,) * t.ndim), axes=1)
        return M * t ** (2.0 - al) - poly + lin * t

    sol = VariationalSolution(_vectorize(x), VarMethod.MOMENT_CLOSED_FORM, N, al)
    report_error(sol, lambda t: oracles.exact_ex51_solution(al, t))
    return sol


def _ex51_system(al: float, N: int) -> TpbvpLinear:
    # state order: x, V_2..V_N, lambda_1, lambda_2..lambda_N
    tab = specfun.coeff_table(al, N)
    c = np.array(tab.c_moment)
    pm = np.arange(2, N + 1, dtype=float)
    d = 2 * N
    iv = slice(1, N)
    il1 = N
    ilp = slice(N + 1, 2 * N)

    def matrix(t):
        m = np.zeros((d, d))
        m[0, il1] = -0.5
        m[iv, 0] = (1.0 - pm) * t ** (pm - 2.0)
        m[il1, ilp] = -(1.0 - pm) * t ** (pm - 2.0)
        return m

    def forcing(t):
        f = np.zeros(d)
        f[0] = 0.5 * tab.b_coeff * t ** (1.0 - al)
        f[il1] = tab.a_coeff * t ** (-al)
        f[ilp] = -c * t ** (1.0 - pm - al)
        return f

    left = {i: 0.0 for i in range(N)}
    right = {0: 1.0, **{i: 0.0 for i in range(N + 1, 2 * N)}}
    return TpbvpLinear(d, matrix, forcing, left, right)


def ex51_moment_tpbvp(alpha, N: int, tol: float = 1e-8, start: float = 1e-9) -> VariationalSolution:
    """Hamiltonian boundary value problem for the moment-expanded problem, solved by shooting.

    Pinning ``x`` at the start offset shifts the solution by about
    ``x'(0) * start``, hence the small default offset.
    """
    al = specfun.as_alpha(alpha)
    if N < 2:
        raise DomainError("moment expansion needs N >= 2")
    dense = solve_tpbvp_linear(_ex51_system(al, N), start, 1.0, tol, geometric_nodes(start, 1.0), extend_left=0.0)
    sol = VariationalSolution(dense.component(0), VarMethod.MOMENT_TPBVP, N, al, states=dense)
    report_error(sol, lambda t: oracles.exact_ex51_solution(al, t))
    return sol


def ex52_integer(alpha, N: int):
    """Integer-series route for the second problem.

    Raises:
        UnsupportedProblemError: always for ``N >= 2``, where the Euler-Lagrange
            equation has order ``2N`` but only two boundary conditions exist.
    """
    specfun.as_alpha(alpha)
    raise UnsupportedProblemError(
        f"integer-series reduction gives an Euler-Lagrange equation of order {2 * N}; "
        "the two boundary conditions x(0), x(1) cannot fix its integration constants"
    )


def _ex52_matrix(al: float, N: int):
    """Constant matrix ``K`` of the scaled Hamiltonian system ``Y' = K Y / t + e_0 t^(alpha-1) / B``.

    Scaled states: ``x``, ``W_p = t^(1-p) V_p``, ``L_1 = t^(2 alpha-1) lambda_1``
    and ``M_p = t^(p+2 alpha-2) lambda_p``. In these variables every
    coefficient is a constant over ``t``, so the solution modes are pure
    powers of ``t`` and shooting segments are uniformly conditioned.
    """
    tab = specfun.coeff_table(al, N)
    A, B = tab.a_coeff, tab.b_coeff
    if abs(B) < 1e-14:
        raise DomainError("B(alpha, N) vanishes; the control cannot be solved for x'")
    c = np.array(tab.c_moment)
    pm = np.arange(2, N + 1, dtype=float)
    d = 2 * N
    iv, il1, ilp = slice(1, N), N, slice(N + 1, 2 * N)
    K = np.zeros((d, d))
    K[0, 0] = -A / B
    K[0, iv] = c / B
    K[0, il1] = 0.5 / B**2
    K[iv, 0] = 1.0 - pm
    K[iv, iv] = np.diag(1.0 - pm)
    K[il1, il1] = 2.0 * al - 1.0 + A / B
    K[il1, ilp] = pm - 1.0
    K[ilp, il1] = -c / B
    K[ilp, ilp] = np.diag(pm + 2.0 * al - 2.0)
    return K, B


def _ex52_system(al: float, N: int) -> TpbvpLinear:
    K, B = _ex52_matrix(al, N)
    d = 2 * N

    def forcing(t):
        f = np.zeros(d)
        f[0] = t ** (al - 1.0) / B
        return f

    # the scaling is the identity at t = 1, so right conditions carry over unchanged
    left = {i: 0.0 for i in range(N)}
    right = {0: 1.0 / math.gamma(al + 1.0), **{i: 0.0 for i in range(N + 1, 2 * N)}}
    return TpbvpLinear(d, lambda t: K / t, forcing, left, right)


def _ex52_unscale(al: float, N: int, scaled):
    pm = np.arange(2, N + 1, dtype=float)

    def states(t):
        y = np.array(scaled(t), dtype=float)
        tt = np.asarray(t, dtype=float)
        col = (lambda e: tt**e) if y.ndim == 1 else (lambda e: tt[None, :] ** np.reshape(e, (-1, 1)))
        y[1:N] *= col(pm - 1.0)
        y[N] *= tt ** (1.0 - 2.0 * al)
        y[N + 1:] *= col(2.0 - pm - 2.0 * al)
        return y

    return states


def ex52_moment_tpbvp(alpha, N: int, tol: float = 1e-8, start: float = DELTA) -> VariationalSolution:
    """Hamiltonian boundary value problem of the moment-expanded second problem.

    ``states`` returns ``(x, V_2..V_N, lambda_1, lambda_2..lambda_N)``.
    """
    al = specfun.as_alpha(alpha)
    if N < 2:
        raise DomainError("moment expansion needs N >= 2")
    dense = solve_tpbvp_linear(_ex52_system(al, N), start, 1.0, tol, geometric_nodes(start, 1.0), extend_left=0.0)
    sol = VariationalSolution(dense.component(0), VarMethod.MOMENT_TPBVP, N, al, states=_ex52_unscale(al, N, dense))
    sol.scaled_states = dense
    report_error(sol, lambda t: oracles.exact_ex52_solution(al, t))
    return sol


def ex52_modal_solution(alpha, N: int, start: float = DELTA) -> Callable[[float], float]:
    """Same boundary value problem solved through the eigen-decomposition of ``K``.

    Homogeneous solutions are ``t^k v`` for eigenpairs ``(k, v)``; the forcing
    has the particular solution ``t^alpha (alpha I - K)^-1 e_0 / B``. Serves as
    an independent check of the shooting solver.
    """
    al = specfun.as_alpha(alpha)
    K, B = _ex52_matrix(al, N)
    d = 2 * N
    lam, vec = np.linalg.eig(K)
    e0 = np.zeros(d)
    e0[0] = 1.0 / B
    vp = np.linalg.solve(al * np.eye(d) - K, e0)
    rows, rhs = [], []
    for i in range(N):
        rows.append(vec[i] * start**lam)
        rhs.append(-vp[i] * start**al)
    target = _ex52_system(al, N).right_fixed
    for j, v in sorted(target.items()):
        rows.append(vec[j])
        rhs.append(v - vp[j])
    coef = np.linalg.solve(np.array(rows), np.array(rhs, dtype=complex))

    def x(t):
        t = np.asarray(t, dtype=float)
        modes = np.power.outer(np.maximum(t, start), lam)
        out = (modes * vec[0] * coef).sum(axis=-1).real + vp[0] * np.maximum(t, start) ** al
        return float(out) if out.ndim == 0 else out

    return x


def ex52_control(sol: VariationalSolution, t):
    """``u = A t^-alpha x + B t^(1-alpha) x' - sum C_p t^(1-p-alpha) V_p`` along a TPBVP solution.

    ``x'`` is taken from the state equation, so no numerical differentiation is needed.
    """
    if getattr(sol, "scaled_states", None) is None:
        raise DomainError("control needs a boundary value solution of the second problem")
    al, N = sol.alpha, sol.N
    tab = specfun.coeff_table(al, N)
    K, B = _ex52_matrix(al, N)
    t = float(t)
    y = sol.scaled_states(t)
    xdot = (K[0] @ y) / t + t ** (al - 1.0) / B
    return (tab.a_coeff * t ** (-al) * y[0] + tab.b_coeff * t ** (1.0 - al) * xdot
            - t ** (-al) * math.fsum(np.array(tab.c_moment) * y[1:N]))


def ex52_objective(u: Callable[[float], float], a: float = DELTA, b: float = 1.0, tol: float = 1e-8) -> float:
    """``int (u - 1)^2 dt`` over ``[a, b]``."""
    return integrate_adaptive(lambda t: (u(t) - 1.0) ** 2, a, b, tol)
