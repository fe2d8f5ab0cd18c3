"""Reference values for left Riemann-Liouville derivatives.

Closed forms for powers and exponentials, the analytic solutions of the two
variational examples, and a Grunwald-Letnikov evaluator that shares nothing
with the series expansions.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable

import numpy as np

from .errors import DomainError
from .specfun import as_alpha, mittag_leffler, rgamma

__all__ = [
    "OracleKind",
    "exact_power",
    "exact_exp",
    "exact_constant",
    "gl_evaluate",
    "gl_weights",
    "exact_ex51_solution",
    "exact_ex51_second_derivative",
    "exact_ex52_solution",
    "reference",
]


class OracleKind(enum.Enum):
    POWER_RULE = "power"
    EXP_ML = "exp"
    CONSTANT = "constant"
    GRUNWALD_LETNIKOV = "gl"


def exact_power(k: float, alpha, a: float, t):
    """``aD_t^alpha (t-a)^k = Gamma(k+1) / Gamma(k+1-alpha) (t-a)^(k-alpha)``, for t > a."""
    al = as_alpha(alpha)
    if k <= -1:
        raise DomainError(f"power rule needs k > -1, got {k}")
    t = np.asarray(t, dtype=float)
    if np.any(t <= a):
        raise DomainError("power rule is evaluated for t > a only")
    out = math.gamma(k + 1.0) * rgamma(k + 1.0 - al) * (t - a) ** (k - al)
    return float(out) if out.ndim == 0 else out


def exact_constant(c: float, alpha, a: float, t):
    return c * exact_power(0.0, alpha, a, t)


def exact_exp(lam: float, alpha, t):
    """``0D_t^alpha e^(lam t) = t^(-alpha) E_{1,1-alpha}(lam t)`` for t > 0."""
    al = as_alpha(alpha)
    ts = np.asarray(t, dtype=float)
    if np.any(ts <= 0):
        raise DomainError("exponential oracle is evaluated for t > 0 only")
    vals = np.array([s ** (-al) * mittag_leffler(1.0, 1.0 - al, lam * s) for s in ts.ravel()])
    return float(vals[0]) if ts.ndim == 0 else vals.reshape(ts.shape)


def gl_weights(alpha, count: int) -> np.ndarray:
    """``(-1)^k binom(alpha, k)`` for k = 0..count-1 by the stable product recurrence."""
    al = as_alpha(alpha)
    k = np.arange(1, count)
    return np.concatenate([[1.0], np.cumprod((k - 1.0 - al) / k)])


def gl_evaluate(x: Callable, alpha, a: float, t: float, h: float) -> float:
    """Truncated Grunwald-Letnikov sum ``h^-alpha sum_k (-1)^k binom(alpha,k) x(t - k h)``.

    ``x`` is called with an array of times; scalar-only callables are
    vectorized automatically.
    """
    al = as_alpha(alpha)
    if h <= 0:
        raise DomainError("GL step h must be positive")
    n = int(math.floor((t - a) / h + 1e-9))
    if n < 10:
        raise DomainError(f"GL step too coarse: (t-a)/h = {(t - a) / h:.3g} < 10")
    w = gl_weights(al, n + 1)
    pts = np.maximum(t - h * np.arange(n + 1), a)
    try:
        vals = np.asarray(x(pts), dtype=float)
        if vals.shape != pts.shape:
            raise TypeError
    except TypeError:
        vals = np.array([float(x(s)) for s in pts])
    return float(h ** (-al) * math.fsum(w * vals))


def exact_ex51_solution(alpha, t):
    """Analytic minimizer of ``int_0^1 (0D_t^alpha x - x'^2) dt``, x(0)=0, x(1)=1."""
    al = as_alpha(alpha)
    t = np.asarray(t, dtype=float)
    c = 1.0 / (2.0 * math.gamma(3.0 - al))
    out = -c * (1.0 - t) ** (2.0 - al) + (1.0 - c) * t + c
    return float(out) if out.ndim == 0 else out


def exact_ex51_second_derivative(alpha, t):
    al = as_alpha(alpha)
    t = np.asarray(t, dtype=float)
    out = -(1.0 - t) ** (-al) / (2.0 * math.gamma(1.0 - al))
    return float(out) if out.ndim == 0 else out


def exact_ex52_solution(alpha, t):
    """``t^alpha / Gamma(alpha+1)``, the function whose derivative of order alpha is 1."""
    al = as_alpha(alpha)
    t = np.asarray(t, dtype=float)
    out = t**al / math.gamma(al + 1.0)
    return float(out) if out.ndim == 0 else out


def reference(kind: OracleKind, alpha, **params) -> Callable[[float], float]:
    """Reference derivative ``t -> aD_t^alpha x(t)`` of the given kind.

    Parameters per kind: POWER_RULE ``k, a``; EXP_ML ``lam``; CONSTANT ``c, a``;
    GRUNWALD_LETNIKOV ``x, a, h``.
    """
    kind = OracleKind(kind)
    if kind is OracleKind.POWER_RULE:
        return lambda t: exact_power(params["k"], alpha, params.get("a", 0.0), t)
    if kind is OracleKind.EXP_ML:
        return lambda t: exact_exp(params["lam"], alpha, t)
    if kind is OracleKind.CONSTANT:
        return lambda t: exact_constant(params["c"], alpha, params.get("a", 0.0), t)
    return lambda t: gl_evaluate(params["x"], alpha, params.get("a", 0.0), t, params["h"])
