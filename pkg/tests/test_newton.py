"""Newton operators, symmetric functions, quadrature, integral identity."""

from itertools import combinations
from math import comb

import numpy as np
import pytest

from conftest import sup
from phifluid import catalog
from phifluid.errors import (KOutOfRange, NotClosed, NotCodazzi,
                             UPositivityViolated)
from phifluid.newton import (build_grid, codazzi_and_divergence,
                             codazzi_w_field, divergence_selftest,
                             integrate_scalar, kazdan_warner, lk_apply,
                             metric_field, newton_operator, schouten_field,
                             sym_functions)


def _sigma_oracle(ev, k):
    """Normalized elementary symmetric function via explicit products."""
    if k == 0:
        return 1.0
    return sum(np.prod(c) for c in combinations(ev, k)) / comb(len(ev), k)


def test_sym_functions_eigenvalue_oracle(rng):
    for m in (2, 3, 4, 5):
        A = rng.normal(size=(m, m))
        A = (A + A.T) / 2
        ev = np.linalg.eigvalsh(A)
        for k in range(m + 1):
            out = sym_functions(A, k)
            assert abs(out["sigma_k"] - _sigma_oracle(ev, k)) < 1e-10


def test_trace_identities_and_cayley_hamilton(rng):
    for _ in range(100):
        A = rng.normal(size=(5, 5))
        A = (A + A.T) / 2
        for k in range(5):
            Pk = newton_operator(A, k)
            Sk = sym_functions(A, k)["S_k"]
            Sk1 = sym_functions(A, k + 1)["S_k"]
            assert abs(np.trace(Pk) - (5 - k) * Sk) < 1e-10 * max(
                1, abs(Sk))
            assert abs(np.trace(A @ Pk) - (k + 1) * Sk1) < 1e-9
        assert sup(newton_operator(A, 5)) < 1e-9


def test_newton_and_garding_inequalities(rng):
    """sigma_{k-1} sigma_{k+1} <= sigma_k^2 always; the Garding chain
    sigma_1 >= sigma_2^(1/2) >= ... holds when all sigma_j > 0."""
    for _ in range(1000):
        m = int(rng.integers(3, 6))
        A = rng.normal(size=(m, m))
        A = (A + A.T) / 2
        sig = [sym_functions(A, k)["sigma_k"] for k in range(m + 1)]
        for k in range(1, m):
            assert sig[k - 1] * sig[k + 1] <= sig[k] ** 2 + 1e-9
        if all(s > 0 for s in sig[1:]):
            chain = [sig[k] ** (1.0 / k) for k in range(1, m + 1)]
            for a, b in zip(chain, chain[1:]):
                assert a >= b - 1e-9


def test_equality_at_isotropic_matrices():
    A = 1.7 * np.eye(4)
    sig = [sym_functions(A, k)["sigma_k"] for k in range(5)]
    for k in range(1, 4):
        assert abs(sig[k - 1] * sig[k + 1] - sig[k] ** 2) < 1e-9


def test_k_out_of_range():
    with pytest.raises(KOutOfRange):
        sym_functions(np.eye(3), 4)
    with pytest.raises(KOutOfRange):
        newton_operator(np.eye(3), -1)


def test_divergence_identity_unconditional():
    """div(P_k) = -A div(P_{k-1}) - C(A):P_{k-1} holds even when A is far
    from Codazzi."""
    scn = catalog.random_scene(seed=3, m=3)
    pts = scn.sample_points(4, np.random.default_rng(1))
    for k in (1, 2):
        out = codazzi_and_divergence(scn, schouten_field(), k, pts)
        assert sup(out["codazzi"]) > 0.1          # genuinely non-Codazzi
        assert sup(out["identity_defect"]) < 1e-12


def test_codazzi_field_has_divergence_free_newton_operators():
    scn = catalog.codazzi_sphere()
    pts = scn.sample_points(4, np.random.default_rng(2))
    for k in (1, 2):
        out = codazzi_and_divergence(scn, codazzi_w_field(), k, pts)
        assert sup(out["codazzi"]) < 1e-12
        assert sup(out["div_Pk"]) < 1e-12


def test_lk_structured_form():
    """On the unit sphere Hess u = -cos r g for u = shift + cos r; with
    A = g this matches the structured closed form for any split."""
    from phifluid.jets import cos as jcos
    scn = catalog.codazzi_sphere()
    pts = scn.sample_points(4, np.random.default_rng(3))
    ell = 0.7
    structured = {"p": lambda geo: ell - jcos(geo.x[0]),
                  "q": lambda geo: 0.0,
                  "l": lambda geo: ell}
    out = lk_apply(scn, metric_field(), 2, pts, structured=structured)
    assert sup(out["structured_defect"]) < 1e-12


def test_lk_divergence_form_cross_check():
    """tr(P_k Hess u) = div(P_k grad u) - g(div P_k, grad u)."""
    from phifluid.curvature import Geometry, asjet
    from phifluid.newton import _field_chain
    from phifluid.tensors import values

    scn = catalog.random_scene(seed=3, m=3)
    pts = scn.sample_points(3, np.random.default_rng(4))
    for k in (1, 2):
        geo = Geometry(scn, pts, 4)
        A, B, S, P = _field_chain(geo, schouten_field(), k)
        ginv = np.asarray(geo.ginv)
        du_up = np.tensordot(ginv, np.asarray(geo.du), axes=([1], [0]))
        pk_du = np.tensordot(np.asarray(geo.g),
                             np.tensordot(P[k], du_up, axes=([1], [0])),
                             axes=([1], [0]))
        div_vec = np.tensordot(geo.covd(pk_du), ginv,
                               axes=([0, 1], [0, 1]))
        dP = geo.covd(np.einsum("ik,kj->ij", np.asarray(geo.g), P[k]))
        divP = np.tensordot(dP, ginv, axes=([1, 2], [0, 1]))
        lk_div = values(asjet(div_vec
                              - np.tensordot(divP, du_up, axes=([0], [0]))))
        lk = lk_apply(scn, schouten_field(), k, pts)["Lk"]
        assert sup(lk - lk_div) < 1e-12


def test_sphere_volume_with_richardson():
    scn = catalog.round_sphere()

    def vol(eps):
        grid = build_grid("sphere", 3, 2, eps)
        return integrate_scalar(scn, grid, lambda geo: {},
                                order=0)["volume"]

    v = (4 * vol(1e-3) - vol(2e-3)) / 3
    assert abs(v - 2 * np.pi ** 2) < 1e-6


def test_quadrature_divergence_selftest():
    """int div V = 0 on closed scenes validates the grid."""
    from phifluid.jets import cos as jcos, sin as jsin

    scn = catalog.round_sphere()

    def vec(geo):
        r, t, s = geo.x
        return np.array([jsin(r) * jcos(t), jcos(2.0 * r),
                         jsin(s) * jsin(r)], dtype=object)

    out = divergence_selftest(scn, build_grid("sphere", 3, 3), vec, order=2)
    assert abs(out["div"]) < 1e-4

    tor = catalog.flat_torus()

    def vec_t(geo):
        x, y, z = geo.x
        return np.array([jsin(x) * jcos(y), jcos(y + z), jsin(2.0 * z)],
                        dtype=object)

    out = divergence_selftest(tor, build_grid("torus", 3, 2), vec_t,
                              order=2)
    assert abs(out["div"]) < 1e-10


def test_kazdan_warner_round_sphere():
    """phi constant, U = 0, u = 1.5 + cos r: A = g/2, both integrals 0."""
    out = kazdan_warner(catalog.round_sphere(), k=1, level=1)
    assert abs(out["lhs"]) < 1e-6
    assert abs(out["rhs"]) < 1e-6
    # near-pole nodes amplify jet roundoff in covd(A); far below the gate
    assert out["hypotheses"]["codazzi_sup"] < 1e-8
    assert out["hypotheses"]["positive_eigen_node"]


def test_kazdan_warner_flat_torus():
    out = kazdan_warner(catalog.flat_torus(), k=1, level=2,
                        A_field=metric_field())
    assert abs(out["lhs"]) < 1e-12
    assert abs(out["rhs"]) < 1e-12


def test_kazdan_warner_conformal_identity():
    """Codazzi tensor with nonconstant sigma_k, X = grad u conformal:
    the closed-manifold integral identity with empty boundary."""
    scn = catalog.codazzi_sphere()
    for k in (1, 2):
        out = kazdan_warner(scn, k=k, level=2, A_field=codazzi_w_field(),
                            mode="conformal")
        assert abs(out["defect"]) < 1e-4


def test_kazdan_warner_gates():
    with pytest.raises(NotClosed):
        kazdan_warner(catalog.flat(), k=1, level=1)
    with pytest.raises(UPositivityViolated):
        kazdan_warner(catalog.round_sphere(shift=0.5), k=1, level=1)

    def bad(geo):
        return (np.einsum("i,j->ij", np.asarray(geo.du),
                          np.asarray(geo.du)) + np.asarray(geo.g))

    with pytest.raises(NotCodazzi):
        kazdan_warner(catalog.round_sphere(), k=1, level=1, A_field=bad)
    with pytest.raises(KOutOfRange):
        kazdan_warner(catalog.round_sphere(), k=3, level=1)
