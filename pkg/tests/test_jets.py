"""Jet arithmetic against closed forms and finite differences."""

import numpy as np
import pytest

from conftest import fd_gradient, sup
from phifluid import kernels
from phifluid.errors import OrderExceeded
from phifluid.jets import (Jet, cos, exp, jet_space, log, partial, sin,
                           sqrt, tan, value_of)


def _xy(order=4, vals=(0.3, -0.7)):
    sp = jet_space(2, order)
    return (Jet.variable(sp, 0, vals[0]), Jet.variable(sp, 1, vals[1]))


def test_polynomial_coefficients_exact():
    x, y = _xy()
    f = 2.0 + x * x * y - 3.0 * y + x
    xv, yv = 0.3, -0.7
    assert abs(f.value[0] - (2 + xv * xv * yv - 3 * yv + xv)) < 1e-15
    assert abs(f.derivative((1, 0))[0] - (2 * xv * yv + 1)) < 1e-15
    assert abs(f.derivative((2, 1))[0] - 2.0) < 1e-15
    assert abs(f.derivative((0, 2))[0]) < 1e-15


@pytest.mark.parametrize("fn,ref", [
    (sin, np.sin), (cos, np.cos), (exp, np.exp),
    (log, lambda t: np.log(t + 2.0)), (sqrt, lambda t: np.sqrt(t + 2.0)),
    (tan, np.tan),
])
def test_transcendental_derivatives_match_fd(fn, ref):
    sp = jet_space(1, 3)
    t0 = 0.4
    x = Jet.variable(sp, 0, t0)
    if fn in (log, sqrt):
        jet = fn(x + 2.0)
    else:
        jet = fn(x)
    h = 1e-5
    fd1 = (ref(t0 + h) - ref(t0 - h)) / (2 * h)
    fd2 = (ref(t0 + h) - 2 * ref(t0) + ref(t0 - h)) / h ** 2
    assert abs(jet.value[0] - ref(t0)) < 1e-14
    assert abs(jet.derivative((1,))[0] - fd1) < 1e-9
    assert abs(jet.derivative((2,))[0] - fd2) < 1e-5


def test_chain_rule_matches_fd_gradient():
    def fn(x):
        return np.sin(x[0] * x[1]) * np.exp(x[1]) + x[0] ** 3

    sp = jet_space(2, 2)
    pt = np.array([0.5, -0.2])
    jx = Jet.variable(sp, 0, pt[0])
    jy = Jet.variable(sp, 1, pt[1])
    jet = sin(jx * jy) * exp(jy) + jx * jx * jx
    grad = np.array([jet.derivative((1, 0))[0], jet.derivative((0, 1))[0]])
    assert sup(grad - fd_gradient(fn, pt)) < 1e-9


def test_partial_reduces_effective_order():
    x, _ = _xy(order=3)
    d = partial(x * x * x, 0)
    assert d.eff == 2
    assert abs(d.value[0] - 3 * 0.3 ** 2) < 1e-14
    dd = partial(partial(d, 0), 0)
    with pytest.raises(OrderExceeded):
        partial(dd, 0)


def test_division_and_negative_powers():
    x, y = _xy()
    f = (1.0 + x) / (2.0 - y)
    v = (1 + 0.3) / (2 + 0.7)
    assert abs(f.value[0] - v) < 1e-14
    g = x ** -2
    assert abs(g.value[0] - 0.3 ** -2) < 1e-12


def test_batched_values():
    sp = jet_space(1, 2)
    x = Jet.variable(sp, 0, np.array([0.1, 0.2, 0.3]))
    f = sin(x)
    assert sup(value_of(f) - np.sin([0.1, 0.2, 0.3])) < 1e-15
    assert f.batch == 3


def test_product_backends_agree():
    """The numpy segment reduction and the active kernel give the same
    coefficients."""
    sp = jet_space(3, 4)
    gen = np.random.default_rng(1)
    a = gen.normal(size=(sp.n, 8))
    b = gen.normal(size=(sp.n, 8))
    out_active = np.empty_like(a)
    kernels.taylor_mul(a, b, sp.mul_ai, sp.mul_bi, sp.mul_seg, out_active)
    out_numpy = np.empty_like(a)
    kernels._mul_numpy(a, b, sp.mul_ai, sp.mul_bi, sp.mul_seg, out_numpy)
    assert sup(out_active - out_numpy) < 1e-13
