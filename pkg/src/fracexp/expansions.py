"""Series approximations of left and right Riemann-Liouville derivatives.

Every method is reduced to a *plan*: weights on local derivative terms
``d^(i-alpha) x^(i)(t)`` and weights on moment terms, where ``d`` is the
distance to the base point. Moment terms are carried in normalized form

    m_e(t) = int_0^1 s^e x(base + sign * d * s) ds,

so the huge factors ``d^(1-p-alpha)`` and tiny moments ``V_p ~ d^(p-1)``
never meet in floating point; every moment term collapses to
``weight * d^(-alpha) * m_e``.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import specfun
from .errors import DomainError
from .numerics import OdeSystem, integrate_adaptive, solve_ivp

__all__ = [
    "Method",
    "Side",
    "ExpansionSpec",
    "SmoothInput",
    "EvalReport",
    "moment_vp",
    "moment_wp",
    "moments_on_grid",
    "dense_approximation",
    "approx_left_int",
    "approx_left_mom",
    "approx_left_mom_noB",
    "approx_left_gen",
    "approx_right_mom",
    "approx_right_gen",
    "approximate",
    "evaluate_grid",
    "bound_int",
    "bound_mom",
    "bound_mom_general",
]


class Method(enum.Enum):
    INTEGER = "integer"
    MOMENT = "moment"
    MOMENT_NO_B = "moment-noB"
    GENERAL = "general"


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class ExpansionSpec:
    """Which expansion to use and where.

    ``base`` is the left end point ``a`` for left derivatives and the right
    end point ``b`` for right derivatives. ``n`` is only used by
    ``Method.GENERAL``.
    """

    method: Method
    alpha: float
    N: int
    n: int | None = None
    side: Side = Side.LEFT
    base: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "side", Side(self.side))
        object.__setattr__(self, "alpha", specfun.as_alpha(self.alpha))
        N, n = self.N, self.n
        if self.method is Method.INTEGER and N < 0:
            raise DomainError("integer series needs N >= 0")
        if self.method in (Method.MOMENT, Method.MOMENT_NO_B) and N < 2:
            raise DomainError("moment expansions need N >= 2")
        if self.method is Method.GENERAL:
            if n is None or not 1 <= n <= N:
                raise DomainError(f"general expansion needs 1 <= n <= N, got n={n}, N={N}")

    @property
    def derivative_order(self) -> int:
        """Highest derivative of the input the method consumes."""
        if self.method is Method.INTEGER:
            return self.N
        if self.method is Method.MOMENT:
            return 1
        if self.method is Method.MOMENT_NO_B:
            return 0
        return self.n - 1


@dataclass(frozen=True)
class SmoothInput:
    """A function together with its derivatives.

    ``derivative(t, k)`` must return ``x^(k)(t)`` for ``k`` up to
    ``max_order`` (``None`` meaning any order).
    """

    value: Callable[[float], float]
    derivative: Callable[[float, int], float] | None = None
    max_order: int | None = None

    def __call__(self, t):
        return self.value(t)

    def deriv(self, t, k: int):
        if k == 0:
            return self.value(t)
        if self.derivative is None or (self.max_order is not None and k > self.max_order):
            raise DomainError(f"derivative of order {k} is not available")
        return self.derivative(t, k)

    @classmethod
    def monomial(cls, k: int, shift: float = 0.0) -> SmoothInput:
        """``(t - shift)^k`` for a non-negative integer ``k``."""

        def d(t, j):
            if j > k:
                return 0.0 * np.asarray(t, dtype=float)
            return math.factorial(k) / math.factorial(k - j) * (np.asarray(t, dtype=float) - shift) ** (k - j)

        return cls(lambda t: d(t, 0), d)

    @classmethod
    def exponential(cls, lam: float, scale: float = 1.0) -> SmoothInput:
        """``scale * exp(lam t)``."""
        return cls(lambda t: scale * np.exp(lam * np.asarray(t, dtype=float)),
                   lambda t, j: scale * lam**j * np.exp(lam * np.asarray(t, dtype=float)))

    @classmethod
    def constant(cls, c: float) -> SmoothInput:
        return cls(lambda t: c + 0.0 * np.asarray(t, dtype=float),
                   lambda t, j: 0.0 * np.asarray(t, dtype=float))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> SmoothInput:
        """Polynomial with ``coeffs[j]`` multiplying ``t^j``."""
        p = np.polynomial.Polynomial(coeffs)
        return cls(lambda t: p(np.asarray(t, dtype=float)), lambda t, j: p.deriv(j)(np.asarray(t, dtype=float)))

    def __add__(self, other: SmoothInput) -> SmoothInput:
        return SmoothInput(lambda t: self.value(t) + other.value(t),
                           lambda t, k: self.deriv(t, k) + other.deriv(t, k),
                           _min_order(self.max_order, other.max_order))

    def scaled(self, c: float) -> SmoothInput:
        return SmoothInput(lambda t: c * self.value(t), lambda t, k: c * self.deriv(t, k), self.max_order)


def _min_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


@dataclass
class EvalReport:
    """Approximate derivative values on a set of points, with optional error bounds."""

    t: np.ndarray
    values: np.ndarray
    bound: np.ndarray | None = None


# --------------------------------------------------------------------------
# Plans
# --------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _plan(method: Method, alpha: float, N: int, n: int | None):
    """(local weights [(i, w)], moment weights [(e, w)]) for a method."""
    if method is Method.INTEGER:
        return tuple((k, specfun.coeff_c_int(k, alpha)) for k in range(N + 1)), ()
    if method in (Method.MOMENT, Method.MOMENT_NO_B):
        tab = specfun.coeff_table(alpha, N)
        local = [(0, tab.a_coeff)]
        if method is Method.MOMENT:
            local.append((1, tab.b_coeff))
        # -C_p d^(1-p-alpha) V_p with V_p = (1-p) d^(p-1) m_{p-2}
        moments = tuple((p - 2, (p - 1) * tab.c(p)) for p in range(2, N + 1))
        return tuple(local), moments
    local = tuple((i, specfun.coeff_a_gen(alpha, i, n, N)) for i in range(n))
    # B_p d^(n-1-p-alpha) V_p with V_p = (p-n+1) d^(p-n+1) m_{p-n}
    moments = tuple((p - n, (p - n + 1) * specfun.coeff_b_gen(alpha, p, n)) for p in range(n, N + 1))
    return local, moments


def _distance(spec: ExpansionSpec, t: float) -> float:
    if spec.side is Side.LEFT:
        if not t > spec.base:
            raise DomainError(f"left expansion is not computable at t={t} <= a={spec.base}")
        return t - spec.base
    if not t < spec.base:
        raise DomainError(f"right expansion is not computable at t={t} >= b={spec.base}")
    return spec.base - t


def _normalized_moments(x: Callable, spec: ExpansionSpec, d: float, exps: np.ndarray, tol: float):
    sign = 1.0 if spec.side is Side.LEFT else -1.0
    base = spec.base
    return np.atleast_1d(integrate_adaptive(lambda s: s**exps * float(x(base + sign * d * s)), 0.0, 1.0, tol))


def _combine(x: SmoothInput, spec: ExpansionSpec, t: float, d: float, m: np.ndarray | None) -> float:
    local, moments = _plan(spec.method, spec.alpha, spec.N, spec.n)
    al = spec.alpha
    sign = 1.0 if spec.side is Side.LEFT else -1.0
    terms = [w * sign**i * d ** (i - al) * float(x.deriv(t, i)) for i, w in local]
    if moments:
        weights = np.array([w for _, w in moments])
        terms.append(d ** (-al) * math.fsum(weights * m))
    return math.fsum(terms)


def approximate(x: SmoothInput, spec: ExpansionSpec, t: float, tol: float = 1e-12) -> float:
    """Approximate derivative at one point; moments by adaptive quadrature."""
    d = _distance(spec, t)
    _, moments = _plan(spec.method, spec.alpha, spec.N, spec.n)
    m = None
    if moments:
        exps = np.array([e for e, _ in moments], dtype=float)
        m = _normalized_moments(x, spec, d, exps, tol)
    return _combine(x, spec, t, d, m)


def _require(spec: ExpansionSpec, method: Method, side: Side) -> ExpansionSpec:
    if spec.method is not method or spec.side is not side:
        raise DomainError(f"expected a {side.value} {method.value} spec, got {spec.side.value} {spec.method.value}")
    return spec


def approx_left_int(x: SmoothInput, spec: ExpansionSpec, t: float) -> float:
    """``sum_{k<=N} C(k,alpha) (t-a)^(k-alpha) x^(k)(t)``."""
    return approximate(x, _require(spec, Method.INTEGER, Side.LEFT), t)


def approx_left_mom(x: SmoothInput, spec: ExpansionSpec, t: float) -> float:
    return approximate(x, _require(spec, Method.MOMENT, Side.LEFT), t)


def approx_left_mom_noB(x: SmoothInput, spec: ExpansionSpec, t: float) -> float:
    """Moment expansion with the first-derivative term dropped."""
    return approximate(x, _require(spec, Method.MOMENT_NO_B, Side.LEFT), t)


def approx_left_gen(x: SmoothInput, spec: ExpansionSpec, t: float) -> float:
    """Order-``n`` expansion using ``x, x', ..., x^(n-1)`` and moments ``V_n..V_N``."""
    return approximate(x, _require(spec, Method.GENERAL, Side.LEFT), t)


def approx_right_mom(x: SmoothInput, spec: ExpansionSpec, t: float) -> float:
    return approximate(x, _require(spec, Method.MOMENT, Side.RIGHT), t)


def approx_right_gen(x: SmoothInput, spec: ExpansionSpec, t: float) -> float:
    """Right-sided order-``n`` expansion.

    Derivative terms carry ``(-1)^i``; the moment weights are those of the
    left expansion, which keeps the operator exact on constants and equal to
    the left expansion of the reflected input ``s -> x(a + b - s)``.
    """
    return approximate(x, _require(spec, Method.GENERAL, Side.RIGHT), t)


# --------------------------------------------------------------------------
# Moments
# --------------------------------------------------------------------------


def _moment(x, base, p, t, n, side, tol):
    if n is None:
        factor, e = 1.0 - p, p - 2
        if p < 2:
            raise DomainError("classic moments need p >= 2")
    else:
        if not p >= n >= 1:
            raise DomainError(f"general moments need p >= n >= 1, got p={p}, n={n}")
        factor, e = float(p - n + 1), p - n
    d = t - base if side is Side.LEFT else base - t
    if d < 0:
        raise DomainError("moment evaluated on the wrong side of its base point")
    if d == 0:
        return 0.0
    sign = 1.0 if side is Side.LEFT else -1.0
    m = integrate_adaptive(lambda s: s**e * float(x(base + sign * d * s)), 0.0, 1.0, tol)
    return factor * d ** (e + 1) * m


def moment_vp(x: Callable, a: float, p: int, t: float, n: int | None = None, tol: float = 1e-12) -> float:
    """Moment ``V_p(t)`` by quadrature.

    With ``n=None`` the classic form ``(1-p) int_a^t (tau-a)^(p-2) x dtau``;
    otherwise the order-``n`` form ``(p-n+1) int_a^t (tau-a)^(p-n) x dtau``.
    """
    return _moment(x, a, p, t, n, Side.LEFT, tol)


def moment_wp(x: Callable, b: float, p: int, t: float, n: int | None = None, tol: float = 1e-12) -> float:
    """Right-sided moment ``W_p(t)``, the mirror image of :func:`moment_vp`."""
    return _moment(x, b, p, t, n, Side.RIGHT, tol)


def _moment_trajectory(x: Callable, base: float, exps: np.ndarray, u_max: float, side: Side, rel_tol: float,
                       u_min: float | None = None):
    """Dense solution of ``I_e'(u) = u^e x(base +- u)``, ``I_e(0) = 0``, on ``[0, u_max]``.

    Accuracy is relative for ``u >= u_min``: the moments grow like
    ``u^(e+1)``, so each absolute tolerance is scaled to that size at
    ``u_min``. A zero absolute tolerance would stall on rounding noise
    when ``x`` vanishes at the base point.
    """
    sign = 1.0 if side is Side.LEFT else -1.0
    u_min = 1e-3 * u_max if u_min is None else min(float(u_min), u_max)

    def rhs(u, y):
        return u**exps * float(x(base + sign * u))

    probe = np.linspace(0.0, u_max, 9)
    scale = max(abs(float(x(base + sign * u))) for u in probe) or 1.0
    atol = np.maximum(1e-3 * rel_tol * scale * u_min ** (exps + 1.0), 1e-300)
    return solve_ivp(OdeSystem(rhs, 0.0, np.zeros(exps.size)), float(u_max), rel_tol, atol)


def moments_on_grid(
    x: Callable,
    base: float,
    exps: Sequence[int],
    ts,
    side: Side = Side.LEFT,
    rel_tol: float = 1e-12,
) -> np.ndarray:
    """Raw moment integrals ``int_0^d u^e x(base +- u) du`` at every grid point.

    All exponents are integrated together as one ODE system starting from
    zero at the base point, so a single pass serves the whole grid. Returns
    an array of shape ``(len(exps), len(ts))``.
    """
    side = Side(side)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    sign = 1.0 if side is Side.LEFT else -1.0
    ds = sign * (ts - base)
    if np.any(ds < 0):
        raise DomainError("grid points must lie on the expansion side of the base point")
    e = np.asarray(exps, dtype=float)
    if ds.max() == 0:
        return np.zeros((e.size, ts.size))
    return _moment_trajectory(x, base, e, ds.max(), side, rel_tol, ds[ds > 0].min())(ds)


def dense_approximation(x: SmoothInput, spec: ExpansionSpec, t_far: float, rel_tol: float = 1e-12,
                        t_near: float | None = None) -> Callable:
    """Approximate derivative as a callable valid between the base point and ``t_far``.

    The moments come from one dense ODE solve, so each call costs only a few
    evaluations of ``x`` and its derivatives. Suited to error norms and plots.
    Full relative accuracy holds from ``t_near`` on (default: a thousandth of
    the way out from the base point).
    """
    d_far = _distance(spec, t_far)
    d_near = None if t_near is None else _distance(spec, t_near)
    _, plan_moments = _plan(spec.method, spec.alpha, spec.N, spec.n)
    exps = np.array([e for e, _ in plan_moments], dtype=float)
    traj = (_moment_trajectory(x, spec.base, exps, d_far, spec.side, rel_tol, d_near)
            if plan_moments else None)

    def value(t):
        t = float(t)
        d = _distance(spec, t)
        if d > d_far * (1 + 1e-12):
            raise DomainError(f"t={t} lies beyond the prepared range")
        m = traj(d) / d ** (exps + 1.0) if traj is not None else None
        return _combine(x, spec, t, d, m)

    return value


def evaluate_grid(x: SmoothInput, spec: ExpansionSpec, ts, moments: str = "ode", tol: float = 1e-12) -> EvalReport:
    """Approximate derivative on many points.

    ``moments="ode"`` integrates the moment system once for the whole grid;
    ``moments="quad"`` runs one quadrature per point.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    ds = np.array([_distance(spec, t) for t in ts])
    _, plan_moments = _plan(spec.method, spec.alpha, spec.N, spec.n)
    exps = np.array([e for e, _ in plan_moments], dtype=float)
    if plan_moments and moments == "ode":
        raw = moments_on_grid(x, spec.base, exps, ts, spec.side)
        norm = raw / ds[None, :] ** (exps[:, None] + 1.0)
        values = [_combine(x, spec, t, d, norm[:, k]) for k, (t, d) in enumerate(zip(ts, ds))]
    elif plan_moments and moments != "quad":
        raise ValueError(f"unknown moment route {moments!r}")
    else:
        values = [approximate(x, spec, t, tol) for t in ts]
    return EvalReport(ts, np.asarray(values, dtype=float))


# --------------------------------------------------------------------------
# Truncation error bounds
# --------------------------------------------------------------------------


def bound_int(alpha, N: int, M: float, dt: float) -> float:
    """Bound ``M (t-a)^(N+1-alpha) / (Gamma(1-alpha) (N+1)!)`` for the integer series.

    ``M`` is the maximum of ``|x^(N+1)|`` over ``[a, t]`` and ``dt = t - a``.
    """
    al = specfun.as_alpha(alpha)
    if dt <= 0:
        raise DomainError("bound needs t > a")
    log_f = math.lgamma(N + 2.0)
    return M * math.exp((N + 1 - al) * math.log(dt) - log_f) / math.gamma(1.0 - al)


def bound_mom_general(alpha, n: int, N: int, Ln: float, dt: float) -> float:
    """Truncation bound of the order-``n`` moment expansion.

    ``Ln`` is the maximum of ``|x^(n)|`` over ``[a, t]``. Needs ``n >= 2`` so
    that ``n - 1 - alpha > 0``.
    """
    al = specfun.as_alpha(alpha)
    if n < 2:
        raise DomainError("the moment-expansion bound needs n >= 2")
    if N < 1 or dt <= 0:
        raise DomainError("bound needs N >= 1 and t > a")
    k = n - 1 - al
    return Ln * math.exp(k * k + k) / (math.gamma(n - al) * k * N**k) * dt ** (n - al)


def bound_mom(alpha, N: int, L2: float, dt: float) -> float:
    """Bound of the first-derivative moment expansion (the ``n = 2`` case)."""
    return bound_mom_general(alpha, 2, N, L2, dt)
