"""Numerical kernels: quadrature, ODE integration, finite differences,
linear two-point boundary value problems and the L2 error functional."""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate

from .errors import AccuracyError, DomainError, IllPosedError, IntegrationError

__all__ = [
    "Grid",
    "OdeSystem",
    "DenseSolution",
    "TpbvpLinear",
    "integrate_adaptive",
    "solve_ivp",
    "finite_difference_first",
    "geometric_nodes",
    "solve_tpbvp_linear",
    "error_norm",
    "start_offset",
]

_SINGULAR_ERRORS = (ZeroDivisionError, OverflowError, ValueError, FloatingPointError)


def start_offset(a: float, b: float) -> float:
    """Offset used to step off a singular left end point: ``1e-6 (b - a)``."""
    return 1e-6 * (b - a)


@dataclass(frozen=True)
class Grid:
    """Strictly increasing time grid with at least two points."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise DomainError("a grid needs at least 2 points")
        if not np.all(np.diff(pts) > 0):
            raise DomainError("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.size


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self, n: int = 1):
        self.used += n
        if self.used > self.limit:
            raise AccuracyError(f"quadrature exceeded its budget of {self.limit} evaluations")


def _finite_at(f, x) -> bool:
    try:
        with np.errstate(all="raise"):
            v = np.asarray(f(x), dtype=float)
    except _SINGULAR_ERRORS:
        return False
    return bool(np.all(np.isfinite(v)))


def _simpson_panel(f, a, b, fa, fb, tol, budget, max_depth=50):
    """Iterative adaptive Simpson on a panel whose end values are finite."""
    m = 0.5 * (a + b)
    fm = np.asarray(f(m), dtype=float)
    budget.spend()
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = []
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm = np.asarray(f(lm), dtype=float)
        frm = np.asarray(f(rm), dtype=float)
        budget.spend(2)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        err = float(np.max(np.abs(delta)))
        if err <= 15.0 * tol or not np.isfinite(err):
            total.append(left + right + delta / 15.0)
        elif depth >= max_depth or m == a or m == b:
            raise AccuracyError(f"quadrature could not resolve the integrand near t={m:.6g}")
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth + 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))
    return math.fsum(total) if np.ndim(total[0]) == 0 else np.sum(total, axis=0)


def _regular(f, a, b, tol, budget, panels=4):
    xs = np.linspace(a, b, panels + 1)
    fx = [np.asarray(f(x), dtype=float) for x in xs]
    budget.spend(panels + 1)
    parts = [
        _simpson_panel(f, xs[k], xs[k + 1], fx[k], fx[k + 1], tol / panels, budget)
        for k in range(panels)
    ]
    return sum(parts[1:], parts[0])


def _graded(f, a, b, tol, budget, toward="left", max_panels=4000):
    """Integral over [a, b] with a singular end point on side ``toward``.

    Panels halve in width toward the singular end; once the panel
    contributions decay geometrically, the remaining tail is summed as a
    geometric series.
    """
    length = b - a
    if toward == "left":
        point, end = (lambda u: a + u), a
    else:
        point, end = (lambda u: b - u), b
    # below this width the panel end points are no longer resolved in floating point
    resolution = 1e3 * np.finfo(float).eps * abs(end)
    u_hi = length
    f_hi = np.asarray(f(point(u_hi)), dtype=float)
    budget.spend()
    total = None
    prev = None
    rho_prev = None
    tail, tail_err = None, np.inf
    for k in range(max_panels):
        u_lo = length * 0.5 ** (k + 1)
        if u_lo <= resolution or u_lo == 0.0:
            break
        f_lo = np.asarray(f(point(u_lo)), dtype=float)
        budget.spend()
        panel_tol = tol * 0.5 ** (k + 2)
        if prev is not None:
            # deep panels shrink like a power law; cap their demand near machine precision
            panel_tol = max(panel_tol, 1e-13 * float(np.max(np.abs(prev))))
        lo, hi = sorted((point(u_lo), point(u_hi)))
        f_left, f_right = (f_lo, f_hi) if toward == "left" else (f_hi, f_lo)
        part = _simpson_panel(f, lo, hi, f_left, f_right, panel_tol, budget)
        total = part if total is None else total + part
        if prev is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                rho = np.where(np.abs(prev) > 0, part / prev, 0.0)
            if rho_prev is not None and k >= 3 and np.all((rho >= 0) & (rho < 1.0)):
                with np.errstate(divide="ignore", invalid="ignore"):
                    tail = np.where(rho > 0, part * rho / (1.0 - rho), 0.0)
                    # uncertainty of the geometric tail from the drift of the decay ratio
                    tail_err = float(np.max(np.abs(tail) * (np.abs(rho - rho_prev) / (1.0 - rho) + 1e-6)))
                if tail_err < 0.25 * tol:
                    break
            rho_prev = rho
        prev = part
        u_hi, f_hi = u_lo, f_lo
    if tail is None or tail_err >= tol:
        raise AccuracyError("singular end point: panel contributions did not decay fast enough")
    return total + (tail if np.ndim(tail) else float(tail))


def integrate_adaptive(
    f: Callable[[float], float | np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_evals: int = 2_000_000,
):
    """Integral of ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    ``f`` may be scalar- or vector-valued; the error of a vector integrand is
    measured in the max norm. Integrable power singularities at either end
    point (where ``f`` is infinite or raises) are handled by geometric
    grading of the panels toward that end.

    Raises:
        DomainError: if ``b < a``.
        AccuracyError: if the evaluation budget runs out first.
    """
    if b < a:
        raise DomainError(f"integration bounds must satisfy a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0
    budget = _Budget(max_evals)
    left_ok = _finite_at(f, a)
    right_ok = _finite_at(f, b)
    budget.spend(2)
    if left_ok and right_ok:
        return _regular(f, a, b, tol, budget)
    if not left_ok and right_ok:
        return _graded(f, a, b, tol, budget, "left")
    if left_ok and not right_ok:
        return _graded(f, a, b, tol, budget, "right")
    m = 0.5 * (a + b)
    return _graded(f, a, m, 0.5 * tol, budget, "left") + _graded(f, m, b, 0.5 * tol, budget, "right")


# --------------------------------------------------------------------------
# ODE integration
# --------------------------------------------------------------------------


@dataclass
class OdeSystem:
    """First-order system ``y' = rhs(t, y)`` with ``y(initial_time) = initial_state``."""

    rhs: Callable[[float, np.ndarray], np.ndarray]
    initial_time: float
    initial_state: np.ndarray
    dimension: int = field(init=False)

    def __post_init__(self):
        self.initial_state = np.atleast_1d(np.asarray(self.initial_state, dtype=float))
        self.dimension = self.initial_state.size


class DenseSolution:
    """Continuous trajectory on ``[t_start, t_end]``.

    Calls with times in ``[extend_left, t_start)`` return the state at
    ``t_start`` (continuous extension to a singular left end point).
    """

    def __init__(self, pieces, t_start: float, t_end: float, extend_left: float | None = None):
        self._pieces = pieces  # list of (t_lo, t_hi, callable t -> (d, m))
        self.t_start = float(t_start)
        self.t_end = float(t_end)
        self.extend_left = self.t_start if extend_left is None else float(extend_left)

    @property
    def breakpoints(self) -> list[float]:
        return [p[0] for p in self._pieces] + [self._pieces[-1][1]]

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        span = self.t_end - self.t_start
        slack = 1e-12 * max(1.0, abs(span))
        if np.any(ts < self.extend_left - slack) or np.any(ts > self.t_end + slack):
            raise DomainError(
                f"trajectory is defined on [{self.extend_left}, {self.t_end}], got t outside it"
            )
        ts = np.clip(ts, self.t_start, self.t_end)
        out = None
        for lo, hi, fn in self._pieces:
            mask = (ts >= lo) & (ts <= hi)
            if out is None:
                first = np.asarray(fn(ts[:1]))
                out = np.empty((first.shape[0], ts.size))
            if np.any(mask):
                out[:, mask] = fn(ts[mask])
        return out[:, 0] if scalar else out

    def component(self, i: int) -> Callable:
        """Scalar callable for state component ``i``."""
        return lambda t: self(t)[i]


def solve_ivp(
    sys: OdeSystem,
    t_end: float,
    rel_tol: float = 1e-6,
    abs_tol: float = 1e-9,
    extend_left: float | None = None,
) -> DenseSolution:
    """Integrate ``sys`` to ``t_end`` with the Dormand-Prince 5(4) pair.

    Raises:
        IntegrationError: when the step size collapses; ``t_fail`` records
            where the integration stopped.
    """
    sol = scipy.integrate.solve_ivp(
        sys.rhs,
        (sys.initial_time, t_end),
        sys.initial_state,
        method="RK45",
        dense_output=True,
        rtol=rel_tol,
        atol=abs_tol,
    )
    if sol.status != 0:
        t_fail = float(sol.t[-1]) if sol.t.size else sys.initial_time
        raise IntegrationError(f"integration failed at t={t_fail:.6g}: {sol.message}", t_fail)
    lo, hi = sorted((sys.initial_time, float(t_end)))
    dense = sol.sol
    return DenseSolution([(lo, hi, lambda ts: dense(ts))], lo, hi, extend_left)


# --------------------------------------------------------------------------
# Finite differences
# --------------------------------------------------------------------------


def finite_difference_first(t, x, index: int | None = None):
    """Second-order first derivative of samples ``x`` on grid ``t``.

    Central three-point weights inside, one-sided three-point formulas at
    both ends; the grid may be non-uniform. Returns the whole derivative
    array, or a single value when ``index`` is given.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if t.size < 3 or x.size != t.size:
        raise DomainError("finite differences need at least 3 samples on a matching grid")
    d = np.gradient(x, t, edge_order=2)
    return d if index is None else float(d[index])


# --------------------------------------------------------------------------
# Linear two-point boundary value problems
# --------------------------------------------------------------------------


@dataclass
class TpbvpLinear:
    """Linear system ``y' = matrix(t) @ y + forcing(t)`` with separated boundary values.

    ``left_fixed`` and ``right_fixed`` map state indices to prescribed values
    at the left and right end; together they must fix exactly ``dimension``
    components.
    """

    dimension: int
    matrix: Callable[[float], np.ndarray]
    forcing: Callable[[float], np.ndarray]
    left_fixed: Mapping[int, float]
    right_fixed: Mapping[int, float]

    def __post_init__(self):
        if len(self.left_fixed) + len(self.right_fixed) != self.dimension:
            raise DomainError("boundary conditions must fix exactly `dimension` components")

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.matrix(t) @ y + self.forcing(t)


def geometric_nodes(a: float, b: float, ratio: float = 10.0) -> list[float]:
    """Shooting nodes spaced geometrically from ``a > 0`` up to ``b``."""
    if not 0 < a < b:
        raise DomainError("geometric nodes need 0 < a < b")
    nodes = [a]
    while nodes[-1] * ratio < b * (1 - 1e-12):
        nodes.append(nodes[-1] * ratio)
    nodes.append(b)
    return nodes


def _propagate(problem: TpbvpLinear, lo: float, hi: float, rtol: float, atol: float):
    """Fundamental matrix and particular solution on one segment, integrated together."""
    d = problem.dimension

    def rhs(t, z):
        Z = z.reshape(d, d + 1)
        dZ = problem.matrix(t) @ Z
        dZ[:, d] += problem.forcing(t)
        return dZ.ravel()

    z0 = np.hstack([np.eye(d), np.zeros((d, 1))]).ravel()
    sol = scipy.integrate.solve_ivp(
        rhs, (lo, hi), z0, method="RK45", dense_output=True, rtol=rtol, atol=atol
    )
    if sol.status != 0:
        t_fail = float(sol.t[-1])
        raise IntegrationError(f"shooting integration failed at t={t_fail:.6g}: {sol.message}", t_fail)
    end = sol.y[:, -1].reshape(d, d + 1)
    return end[:, :d], end[:, d], sol.sol


def solve_tpbvp_linear(
    problem: TpbvpLinear,
    a: float,
    b: float,
    tol: float = 1e-8,
    nodes: Sequence[float] | None = None,
    rel_tol: float = 1e-11,
    abs_tol: float = 1e-13,
    extend_left: float | None = None,
) -> DenseSolution:
    """Solve a linear TPBVP by shooting with superposition.

    On every segment between consecutive ``nodes`` (default: the single
    segment ``[a, b]``) one particular and ``dimension`` homogeneous
    trajectories are integrated. The segment start states are then found
    from one square linear system: left conditions, continuity at interior
    nodes, right conditions. More than one segment keeps the system well
    conditioned when modes grow or decay strongly across ``[a, b]``.

    Raises:
        IllPosedError: singular shooting system, or boundary residuals above ``tol``.
    """
    nodes = [a, b] if nodes is None else [float(v) for v in nodes]
    if nodes[0] != a or nodes[-1] != b or any(n1 <= n0 for n0, n1 in zip(nodes, nodes[1:])):
        raise DomainError("shooting nodes must increase strictly from a to b")
    d = problem.dimension
    K = len(nodes) - 1
    segments = [_propagate(problem, lo, hi, rel_tol, abs_tol) for lo, hi in zip(nodes, nodes[1:])]

    n_unk = K * d
    rows, rhs = [], []
    for i, v in sorted(problem.left_fixed.items()):
        row = np.zeros(n_unk)
        row[i] = 1.0
        rows.append(row)
        rhs.append(v)
    for k in range(K - 1):
        phi, part, _ = segments[k]
        block = np.zeros((d, n_unk))
        block[:, k * d:(k + 1) * d] = phi
        block[:, (k + 1) * d:(k + 2) * d] = -np.eye(d)
        rows.extend(block)
        rhs.extend(-part)
    phi, part, _ = segments[-1]
    for j, v in sorted(problem.right_fixed.items()):
        row = np.zeros(n_unk)
        row[(K - 1) * d:] = phi[j]
        rows.append(row)
        rhs.append(v - part[j])
    M = np.array(rows)
    r = np.array(rhs, dtype=float)

    # equilibrate rows and columns before solving
    col = np.max(np.abs(M), axis=0)
    col[col == 0] = 1.0
    Ms = M / col
    row = np.max(np.abs(Ms), axis=1)
    if np.any(row == 0):
        raise IllPosedError("shooting system has an empty row")
    Ms = Ms / row[:, None]
    if np.linalg.cond(Ms) > 1e14:
        raise IllPosedError("shooting system is numerically singular")
    s = np.linalg.solve(Ms, r / row) / col
    starts = s.reshape(K, d)

    pieces = []
    for k, (lo, hi) in enumerate(zip(nodes, nodes[1:])):
        dense = segments[k][2]
        sk = np.append(starts[k], 1.0)
        pieces.append((lo, hi, lambda ts, dense=dense, sk=sk: np.einsum(
            "ijm,j->im", dense(ts).reshape(d, d + 1, -1), sk)))
    out = DenseSolution(pieces, a, b, extend_left)

    ya, yb = out(a), out(b)
    resid = [abs(ya[i] - v) for i, v in problem.left_fixed.items()]
    resid += [abs(yb[j] - v) for j, v in problem.right_fixed.items()]
    if max(resid) > tol:
        raise IllPosedError(f"boundary residual {max(resid):.3g} exceeds tol={tol:g}")
    return out


# --------------------------------------------------------------------------
# Error functional
# --------------------------------------------------------------------------


def error_norm(f: Callable, g: Callable, a: float, b: float, tol: float = 1e-10) -> float:
    """L2 distance ``(int_a^b (f - g)^2 dt)^(1/2)``."""
    val = integrate_adaptive(lambda t: (float(f(t)) - float(g(t))) ** 2, a, b, tol)
    return math.sqrt(max(val, 0.0))
