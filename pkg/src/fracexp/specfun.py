"""Special functions and the scalar coefficient series used by the expansions.

All ratios of the form ``Gamma(p + c) / p!`` are produced by running
multiplicative recurrences in ``p`` so that truncation orders well past
170 never overflow, and every partial sum goes through :func:`math.fsum`
because several of the series cancel almost completely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import AccuracyError, DomainError

__all__ = [
    "FracOrder",
    "CoeffTable",
    "as_alpha",
    "gamma",
    "rgamma",
    "binom_real",
    "mittag_leffler",
    "coeff_c_int",
    "coeff_a",
    "coeff_b",
    "coeff_c_mom",
    "moment_coeffs",
    "coeff_table",
    "coeff_a_gen",
    "coeff_a_gen_tail",
    "coeff_b_gen",
]


@dataclass(frozen=True)
class FracOrder:
    """Order of differentiation, restricted to the open interval (0, 1)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a < 1.0) or math.isnan(a):
            raise DomainError(f"fractional order must satisfy 0 < alpha < 1, got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    def __float__(self) -> float:
        return self.alpha


def as_alpha(alpha: float | FracOrder) -> float:
    """Validate ``alpha`` and return it as a plain float."""
    if isinstance(alpha, FracOrder):
        return alpha.alpha
    return FracOrder(alpha).alpha


def _is_pole(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def gamma(x: float) -> float:
    """Euler's Gamma function on the real line.

    Raises:
        DomainError: at the poles ``0, -1, -2, ...``.
    """
    x = float(x)
    if _is_pole(x):
        raise DomainError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def rgamma(x: float) -> float:
    """Reciprocal Gamma function, zero at the poles of Gamma."""
    x = float(x)
    if _is_pole(x):
        return 0.0
    if x > 171.0:
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


def binom_real(alpha: float | FracOrder, n: int) -> float:
    """Generalized binomial coefficient ``binom(alpha, n)`` for real ``alpha``.

    ``binom_real(alpha, 0)`` is exactly 1.
    """
    a = as_alpha(alpha)
    n = _check_nonneg(n, "n")
    if n == 0:
        return 1.0
    sign = -1.0 if (n - 1) % 2 else 1.0
    if n <= 170:
        return sign * a * math.gamma(n - a) / (math.gamma(1.0 - a) * math.gamma(n + 1.0))
    log_mag = math.log(a) + math.lgamma(n - a) - math.lgamma(1.0 - a) - math.lgamma(n + 1.0)
    return sign * math.exp(log_mag)


def mittag_leffler(a: float, b: float, z: float, max_terms: int = 10_000) -> float:
    """Two-parameter Mittag-Leffler function ``E_{a,b}(z)`` for real arguments.

    Sums ``z**k / Gamma(a*k + b)`` until the next term drops below
    ``1e-15 * (1 + |partial sum|)`` past the peak of the term magnitudes.
    Terms whose Gamma argument is a pole contribute zero.
    """
    if not a > 0.0:
        raise DomainError(f"Mittag-Leffler parameter a must be positive, got {a}")
    z = float(z)
    if z == 0.0:
        return rgamma(b)
    log_abs_z = math.log(abs(z))
    terms: list[float] = []
    partial = 0.0
    for k in range(max_terms):
        arg = a * k + b
        if _is_pole(arg):
            continue
        log_pow = k * log_abs_z
        if arg > 171.0 or log_pow > 700.0:
            if arg <= 0.0:
                mag = abs(z) ** k * abs(rgamma(arg))
            else:
                mag = math.exp(log_pow - math.lgamma(arg))
            term = -mag if (z < 0.0 and k % 2) else mag
        else:
            term = z**k * rgamma(arg)
        if k > 0 and arg > 1.0 and abs(term) < 1e-15 * (1.0 + abs(partial)):
            # only stop once the terms are past their peak in k
            if a * (math.log(arg) - 1.0 / arg) > log_abs_z:
                return math.fsum(terms)
        terms.append(term)
        if k % 64 == 0:
            partial = math.fsum(terms)
        else:
            partial += term
    raise AccuracyError(f"Mittag-Leffler series E_{{{a},{b}}}({z}) did not converge in {max_terms} terms")


def coeff_c_int(n: int, alpha: float | FracOrder) -> float:
    """Coefficient ``binom(alpha, n) / Gamma(n + 1 - alpha)`` of the integer-order series."""
    a = as_alpha(alpha)
    n = _check_nonneg(n, "n")
    return binom_real(a, n) * rgamma(n + 1.0 - a)


def _ratios_a(a: float, N: int) -> list[float]:
    """``Gamma(p - 1 + a) / (Gamma(a) (p - 1)!)`` for p = 2..N."""
    out = []
    r = a
    for p in range(2, N + 1):
        out.append(r)
        r *= (p - 1 + a) / p
    return out


def coeff_a(alpha: float | FracOrder, N: int) -> float:
    """Coefficient ``A(alpha, N)`` multiplying ``(t-a)^(-alpha) x(t)``."""
    a = as_alpha(alpha)
    N = _check_int(N, "N", 2)
    return math.fsum([1.0, *_ratios_a(a, N)]) / math.gamma(1.0 - a)


def coeff_b(alpha: float | FracOrder, N: int) -> float:
    """Coefficient ``B(alpha, N)`` multiplying ``(t-a)^(1-alpha) x'(t)``.

    The bracketed series tends to zero as ``N`` grows, so its partial sums
    are accumulated exactly with :func:`math.fsum`.
    """
    a = as_alpha(alpha)
    N = _check_int(N, "N", 1)
    terms = [1.0]
    s = a - 1.0
    for p in range(1, N + 1):
        terms.append(s)
        s *= (p - 1 + a) / (p + 1)
    return math.fsum(terms) / math.gamma(2.0 - a)


def moment_coeffs(alpha: float | FracOrder, N: int) -> list[float]:
    """``[C(alpha, 2), ..., C(alpha, N)]`` in one pass."""
    a = as_alpha(alpha)
    N = _check_int(N, "N", 2)
    scale = (a - 1.0) / math.gamma(2.0 - a)
    return [r * scale for r in _ratios_a(a, N)]


def coeff_c_mom(alpha: float | FracOrder, p: int) -> float:
    """Moment coefficient ``C(alpha, p)``; negative for every p >= 2."""
    p = _check_int(p, "p", 2)
    return moment_coeffs(alpha, p)[-1]


@dataclass(frozen=True)
class CoeffTable:
    alpha: float
    N: int
    a_coeff: float
    b_coeff: float
    c_moment: tuple[float, ...] = field(default=())

    def c(self, p: int) -> float:
        return self.c_moment[p - 2]


def coeff_table(alpha: float | FracOrder, N: int) -> CoeffTable:
    """All coefficients of the truncated moment expansion of order ``N``."""
    a = as_alpha(alpha)
    return CoeffTable(a, N, coeff_a(a, N), coeff_b(a, N), tuple(moment_coeffs(a, N)))


def coeff_a_gen(alpha: float | FracOrder, i: int, n: int, N: int) -> float:
    """Coefficient ``A(alpha, i, N)`` of ``(t-a)^(i-alpha) x^(i)(t)`` in the order-``n`` expansion.

    The inner sum runs over ``p = n-i .. N``. For ``i = 0`` this equals
    ``1/Gamma(1-alpha)`` plus the truncated ``x(t)`` correction series, so the
    whole expansion becomes a single weighted sum.
    """
    a = as_alpha(alpha)
    n = _check_int(n, "n", 1)
    i = _check_int(i, "i", 0)
    N = _check_int(N, "N", 1)
    if i > n - 1:
        raise DomainError(f"need 0 <= i <= n-1, got i={i}, n={n}")
    if N < n:
        raise DomainError(f"need N >= n, got N={N}, n={n}")
    # reindex q = p - n + i + 1: terms Gamma(q + a - i) / (Gamma(a - i) q!), q = 0..N-n+i+1
    c = a - i
    terms = [1.0]
    t = 1.0
    for q in range(1, N - n + i + 2):
        t *= (q - 1 + c) / q
        terms.append(t)
    return math.fsum(terms) * rgamma(i + 1.0 - a)


def coeff_a_gen_tail(alpha: float | FracOrder, i: int, n: int, N: int) -> float:
    """Truncation error of ``A(alpha, i, N)``: the omitted terms ``p = N+1 .. inf``.

    The complete series is ``1F0(alpha - i; 1) = 0`` for ``i >= 1``, so the
    tail is the negated partial value.
    """
    i = _check_int(i, "i", 1)
    return -coeff_a_gen(alpha, i, n, N)


def coeff_b_gen(alpha: float | FracOrder, p: int, n: int, form: str = "gamma") -> float:
    """Moment coefficient ``B(alpha, p)`` of the order-``n`` expansion.

    ``form="gamma"`` evaluates ``Gamma(m+alpha) / (Gamma(-alpha) Gamma(1+alpha) m!)``
    with ``m = p - n + 1``; ``form="reflection"`` uses
    ``-sin(pi alpha) Gamma(m+alpha) / (pi m!)``.
    """
    a = as_alpha(alpha)
    n = _check_int(n, "n", 1)
    p = _check_int(p, "p", n)
    m = p - n + 1
    if form == "gamma":
        g = 1.0  # Gamma(m + a) / (Gamma(1 + a) m!)
        for k in range(1, m):
            g *= (k + a) / (k + 1)
        return g / math.gamma(-a)
    if form == "reflection":
        ratio = math.exp(math.lgamma(m + a) - math.lgamma(m + 1.0))
        return -math.sin(math.pi * a) * ratio / math.pi
    raise ValueError(f"unknown form {form!r}")


def _check_int(v, name: str, lo: int) -> int:
    if isinstance(v, bool) or int(v) != v:
        raise DomainError(f"{name} must be an integer, got {v!r}")
    v = int(v)
    if v < lo:
        raise DomainError(f"{name} must be >= {lo}, got {v}")
    return v


def _check_nonneg(v, name: str) -> int:
    return _check_int(v, name, 0)
