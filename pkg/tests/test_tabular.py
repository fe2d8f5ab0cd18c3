import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracexp import oracles as O
from fracexp.errors import DomainError, InputFormatError, NonConvergenceError
from fracexp.tabular import SampledFunction, adaptive_order, read_csv, tabular_frac_derivative, write_csv

T = np.linspace(0.0, 1.0, 101)


def sampled(f):
    return SampledFunction.from_function(f, T)


def test_constant_exact():
    res = tabular_frac_derivative(sampled(lambda t: 3.0), 0.5, 6)
    exact = 3.0 * T[1:] ** -0.5 / math.gamma(0.5)
    assert np.allclose(res.values[1:], exact, rtol=1e-12)
    # t_0 carries the extension from half the first spacing
    assert res.values[0] == pytest.approx(3.0 * 0.005**-0.5 / math.gamma(0.5), rel=1e-12)


def test_higher_order_helps_quartic():
    data = sampled(lambda t: t**4)
    mask = T >= 0.2
    exact = np.where(mask, O.exact_power(4, 0.5, 0, np.maximum(T, 0.2)), 1.0)
    e5 = np.max(np.abs(tabular_frac_derivative(data, 0.5, 5).values - exact)[mask] / exact[mask])
    e15 = np.max(np.abs(tabular_frac_derivative(data, 0.5, 15).values - exact)[mask] / exact[mask])
    assert e15 < e5 < 0.08
    assert e15 < 0.02


def test_exponential_converges():
    data = sampled(lambda t: math.exp(2 * t))
    exact = O.exact_exp(2.0, 0.5, 1.0)
    errs = [abs(tabular_frac_derivative(data, 0.5, N).values[-1] - exact) for N in (5, 15, 30, 100)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 6e-3


def test_adaptive_pins():
    res = adaptive_order(sampled(lambda t: t**4), 0.5, 1e-3)
    assert (res.order_used, res.iterations) == (45, 43)
    assert res.last_norm < 1e-3
    res = adaptive_order(sampled(lambda t: math.exp(2 * t)), 0.5, 1e-3)
    assert (res.order_used, res.iterations) == (67, 65)
    res = adaptive_order(sampled(lambda t: 1.0), 0.5, 1e-3)
    assert (res.order_used, res.iterations) == (3, 1)


def test_adaptive_norms_decrease():
    for f in (lambda t: t**4, lambda t: math.exp(2 * t)):
        data = sampled(f)
        vals = [tabular_frac_derivative(data, 0.5, N).values[1:] for N in range(2, 27)]
        norms = [np.linalg.norm(b - a) for a, b in zip(vals, vals[1:])]
        assert all(b < a for a, b in zip(norms, norms[1:]))


def test_adaptive_nonconvergence():
    with pytest.raises(NonConvergenceError) as info:
        adaptive_order(sampled(lambda t: math.exp(2 * t)), 0.5, 1e-12, Nmax=10)
    assert info.value.last_norm > 1e-12


def test_bit_identical_repeat():
    data = sampled(lambda t: math.sin(3 * t))
    a = tabular_frac_derivative(data, 0.3, 12).values
    b = tabular_frac_derivative(data, 0.3, 12).values
    assert a.tobytes() == b.tobytes()


@settings(max_examples=15, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_linearity(c1, c2):
    f = sampled(lambda t: math.exp(t))
    g = sampled(lambda t: t**3)
    combo = SampledFunction(T, c1 * f.x + c2 * g.x)
    lhs = tabular_frac_derivative(combo, 0.6, 8).values
    rhs = c1 * tabular_frac_derivative(f, 0.6, 8).values + c2 * tabular_frac_derivative(g, 0.6, 8).values
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


def test_nonuniform_grid_quadratic():
    t = np.concatenate([[0.0], np.geomspace(1e-3, 1.0, 80)])
    res = tabular_frac_derivative(SampledFunction.from_function(lambda s: s * s, t), 0.5, 30)
    exact = O.exact_power(2, 0.5, 0, t[-20:])
    assert np.max(np.abs(res.values[-20:] - exact) / exact) < 0.02


def test_validation():
    with pytest.raises(DomainError):
        SampledFunction(np.array([0.0, 0.5, 0.4]), np.zeros(3))
    with pytest.raises(DomainError):
        SampledFunction(np.array([0.0, 0.5]), np.zeros(3))
    with pytest.raises(DomainError):
        tabular_frac_derivative(SampledFunction(np.array([0.0, 1.0]), np.zeros(2)), 0.5, 3)
    with pytest.raises(DomainError):
        tabular_frac_derivative(sampled(lambda t: t), 0.5, 1)
    with pytest.raises(DomainError):
        adaptive_order(sampled(lambda t: t), 0.5, 0.0)


def test_csv_roundtrip(tmp_path):
    p = tmp_path / "in.csv"
    p.write_text("t,x\n" + "".join(f"{float(t)!r},{float(t)**2!r}\n" for t in T), encoding="utf-8")
    data = read_csv(p)
    assert np.array_equal(data.t, T)
    res = tabular_frac_derivative(data, 0.5, 5)
    out = tmp_path / "out.csv"
    write_csv(out, res)
    raw = out.read_bytes()
    assert raw.startswith(b"t,dalpha_x\n") and b"\r" not in raw
    back = np.loadtxt(out, delimiter=",", skiprows=1)
    assert np.array_equal(back[:, 1], res.values)


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("a,b\n0,1\n", 1),
    ("t,x\n0,1\n0.5,abc\n", 3),
    ("t,x\n0,1\n0.5\n", 3),
])
def test_csv_errors(tmp_path, text, line):
    p = tmp_path / "bad.csv"
    p.write_text(text, encoding="utf-8")
    with pytest.raises(InputFormatError) as info:
        read_csv(p)
    assert info.value.location == line


def test_csv_unsorted(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("t,x\n0,1\n0.5,2\n0.2,3\n", encoding="utf-8")
    with pytest.raises(InputFormatError):
        read_csv(p)
