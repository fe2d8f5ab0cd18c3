import math

import numpy as np
import pytest
import sympy as sp

from fracexp import oracles as O
from fracexp.errors import DomainError
from fracexp.specfun import binom_real


def test_power_rule_examples():
    t = np.linspace(0.1, 1, 5)
    assert np.allclose(O.exact_power(2, 0.5, 0, t), 2 / math.gamma(2.5) * t**1.5, rtol=1e-14)
    assert 2 / math.gamma(2.5) == pytest.approx(1.5045, abs=5e-5)
    assert O.exact_power(0, 0.3, 1.0, 2.0) == pytest.approx(1 / math.gamma(0.7), rel=1e-14)
    assert O.exact_power(4, 0.5, 0, 1.0) == pytest.approx(2.0633, abs=1e-4)


def test_power_rule_domain():
    with pytest.raises(DomainError):
        O.exact_power(-1, 0.5, 0, 1.0)
    with pytest.raises(DomainError):
        O.exact_power(2, 0.5, 0, 0.0)
    with pytest.raises(DomainError):
        O.exact_power(2, 1.0, 0, 1.0)


def test_constant_and_exp_at_zero_rate_agree():
    for al in (0.2, 0.5, 0.8):
        for t in (0.3, 1.0, 2.5):
            assert O.exact_exp(0.0, al, t) == pytest.approx(O.exact_power(0, al, 0, t), rel=1e-13)
            assert O.exact_constant(3.0, al, 0, t) == pytest.approx(3 * O.exact_power(0, al, 0, t), rel=1e-14)


def test_exp_domain():
    with pytest.raises(DomainError):
        O.exact_exp(2.0, 0.5, 0.0)


def test_gl_weights_match_binomials():
    w = O.gl_weights(0.37, 40)
    expect = [(-1) ** k * binom_real(0.37, k) for k in range(40)]
    assert np.allclose(w, expect, rtol=1e-12, atol=0)


def test_gl_examples():
    assert O.gl_evaluate(lambda t: t, 0.5, 0, 1, 1e-4) == pytest.approx(1 / math.gamma(1.5), abs=1e-3)
    assert O.gl_evaluate(lambda t: t**4, 0.5, 0, 1, 1e-4) == pytest.approx(2.0633, abs=2e-3)
    gl = O.gl_evaluate(lambda t: np.exp(2 * t), 0.5, 0, 1, 1e-4)
    assert gl == pytest.approx(O.exact_exp(2.0, 0.5, 1.0), abs=2e-3)


def test_gl_scalar_callable_and_coarse_step():
    assert O.gl_evaluate(lambda t: 1.0, 0.5, 0, 1, 1e-3) == pytest.approx(1 / math.gamma(0.5), rel=5e-3)
    with pytest.raises(DomainError):
        O.gl_evaluate(lambda t: t, 0.5, 0, 1, 0.2)


@pytest.mark.parametrize("k", [0, 1, 4])
def test_gl_converges_linearly(k):
    exact = O.exact_power(k, 0.5, 0, 1.0)
    errs = [abs(O.gl_evaluate(lambda t: t**k, 0.5, 0, 1, h) - exact) for h in (1e-2, 1e-3, 1e-4)]
    for coarse, fine in zip(errs, errs[1:]):
        assert 5 < coarse / fine < 20


def test_gl_converges_linearly_exp():
    exact = O.exact_exp(2.0, 0.5, 1.0)
    errs = [abs(O.gl_evaluate(lambda t: np.exp(2 * t), 0.5, 0, 1, h) - exact) for h in (1e-2, 1e-3, 1e-4)]
    assert 5 < errs[0] / errs[1] < 20 and 5 < errs[1] / errs[2] < 20


def test_ex51_solution():
    assert O.exact_ex51_solution(0.5, 0.0) == 0.0
    assert O.exact_ex51_solution(0.5, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert O.exact_ex51_solution(0.5, 0.5) == pytest.approx(0.5551, abs=1e-4)


def test_ex51_second_derivative_symbolic():
    t = sp.Symbol("t")
    for al in (0.3, 0.5, 0.8):
        a = sp.Float(al, 30)
        c = 1 / (2 * sp.gamma(3 - a))
        x = -c * (1 - t) ** (2 - a) + (1 - c) * t + c
        xdd = sp.lambdify(t, sp.diff(x, t, 2), "mpmath")
        for s in np.linspace(0.01, 0.99, 20):
            assert float(xdd(s)) == pytest.approx(O.exact_ex51_second_derivative(al, s), rel=1e-10)


def test_ex52_solution():
    assert O.exact_ex52_solution(0.4, 0.0) == 0.0
    assert O.exact_ex52_solution(0.4, 1.0) == pytest.approx(1 / math.gamma(1.4), rel=1e-15)
    # derivative of order alpha of t^alpha / Gamma(alpha+1) is identically 1
    for al in (0.2, 0.5, 0.7):
        d = O.exact_power(al, al, 0, np.linspace(0.1, 1, 7)) / math.gamma(al + 1)
        assert np.allclose(d, 1.0, rtol=1e-13)


def test_reference_dispatch():
    assert O.reference(O.OracleKind.POWER_RULE, 0.5, k=2)(1.0) == pytest.approx(1.5045, abs=5e-5)
    assert O.reference("exp", 0.5, lam=0.0)(1.0) == pytest.approx(1 / math.gamma(0.5))
    assert O.reference("constant", 0.5, c=2.0)(1.0) == pytest.approx(2 / math.gamma(0.5))
    gl = O.reference("gl", 0.5, x=lambda t: t, h=1e-3)(1.0)
    assert gl == pytest.approx(1 / math.gamma(1.5), abs=1e-2)
