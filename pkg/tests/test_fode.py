import math

import numpy as np
import pytest

from fracexp import expansions as E
from fracexp import fode, specfun
from fracexp.errors import DomainError, UnsupportedProblemError

AL = 0.5


def ex1(**kw):
    return fode.FodeProblem(AL, 0.0, 1.0, lambda t, x: x, lambda t: t * t + 2 / math.gamma(2.5) * t**1.5, **kw)


def square(t):
    return t * t


@pytest.fixture(scope="module")
def errors():
    pr = ex1()
    out = {"int": fode.solve_fode_int(pr).error_vs(square, 1e-8)}
    for N in (3, 5, 7):
        out[N] = fode.solve_fode_mom(pr, N).error_vs(square, 1e-8)
    for N in (3, 7):
        out["noB", N] = fode.solve_fode_mom_noB(pr, N).error_vs(square, 1e-8)
    return out


def test_problem_validation():
    with pytest.raises(DomainError):
        fode.FodeProblem(0.5, 1.0, 1.0, lambda t, x: x, lambda t: t)
    with pytest.raises(DomainError):
        fode.FodeProblem(1.2, 0.0, 1.0, lambda t, x: x, lambda t: t)
    assert ex1().delta == pytest.approx(1e-6)
    assert ex1(start=1e-4).delta == 1e-4


def test_moment_beats_integer(errors):
    assert errors[7] < errors["int"]
    assert errors["int"] == pytest.approx(0.033596, rel=1e-3)


def test_regression_pin(errors):
    assert errors[7] < 0.0038
    assert errors[3] == pytest.approx(0.010972, rel=1e-3)


def test_error_non_increasing(errors):
    assert errors[3] >= errors[5] >= errors[7]


def test_without_b_is_worse(errors):
    assert errors["noB", 7] > errors[7]
    assert errors["noB", 3] > errors["noB", 7]


def test_delta_robust(errors):
    e = fode.solve_fode_mom(ex1(start=5e-7), 7).error_vs(square, 1e-8)
    assert abs(e - errors[7]) < 0.05 * errors[7]


@pytest.mark.parametrize("method,N", [("integer", None), ("moment", 4), ("moment-noB", 4)])
def test_zero_problem(method, N):
    pr = fode.FodeProblem(AL, 0.0, 1.0, lambda t, x: x, lambda t: 0.0)
    sol = fode.solve_fode(pr, method, N)
    assert np.all(sol(np.linspace(0, 1, 21)) == 0.0)
    if sol.moments is not None:
        assert np.all(sol.moments(0.5) == 0.0)


def test_initial_value():
    pr = fode.FodeProblem(0.3, 1.0, 2.0, lambda t, x: 0.5 * x, lambda t: 1.0, x0=0.7)
    for sol in (fode.solve_fode_int(pr), fode.solve_fode_mom(pr, 5)):
        assert sol(1.0) == pytest.approx(0.7, abs=1e-9)
        assert sol(pr.a + pr.delta) == pytest.approx(0.7, abs=1e-9)


def test_rhs_only_bounded():
    g = lambda t: 2 / math.gamma(2.5) * t**1.5
    sol = fode.solve_fode_int(fode.FodeProblem(AL, 0.0, 1.0, lambda t, x: 0.0, g))
    vals = sol(np.linspace(1e-6, 1, 200))
    assert np.all(np.isfinite(vals)) and np.max(np.abs(vals)) < 10


def test_non_affine_rejected():
    pr = fode.FodeProblem(AL, 0.0, 1.0, lambda t, x: x**2, lambda t: t)
    with pytest.raises(UnsupportedProblemError):
        fode.solve_fode_mom_noB(pr, 4)
    with pytest.raises(DomainError):
        fode.solve_fode(pr, "moment", 1)
    with pytest.raises(ValueError):
        fode.solve_fode(pr, "euler", 3)


def test_stored_moments_match_quadrature():
    sol = fode.solve_fode_mom(ex1(), 5, rel_tol=1e-9, abs_tol=1e-12)
    x = E.SmoothInput(lambda t: sol(max(t, 0.0)))
    for t in (0.2, 0.6, 1.0):
        stored = sol.moments(t)
        quad = [E.moment_vp(x, 0.0, p, t, tol=1e-11) for p in range(2, 6)]
        assert np.allclose(stored, quad, rtol=1e-6, atol=1e-9)


def test_operator_consistency():
    rt = 1e-6
    pr = ex1()
    sol = fode.solve_fode_mom(pr, 7, rel_tol=rt)
    tab = specfun.coeff_table(AL, 7)
    x = E.SmoothInput(lambda t: sol(max(t, 0.0)))
    h = 1e-6
    for t in np.linspace(0.05, 1.0, 50):
        xd = (sol(t + h) - sol(t - h)) / (2 * h) if t + h <= 1 else (sol(t) - sol(t - 2 * h)) / (2 * h)
        v = [E.moment_vp(x, 0.0, p, t, tol=1e-11) for p in range(2, 8)]
        op = (tab.a_coeff * t**-AL * sol(t) + tab.b_coeff * t ** (1 - AL) * xd
              - sum(c * t ** (1 - p - AL) * vp for c, p, vp in zip(tab.c_moment, range(2, 8), v)))
        assert abs(op - (pr.g(t) - sol(t))) <= 10 * rt * max(1.0, abs(pr.g(t)))
