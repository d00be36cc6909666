"""Curvature pipeline against closed forms and finite differences."""

import numpy as np

from conftest import sup
from phifluid import catalog
from phifluid.curvature import (Geometry, classical_curvature,
                                conformal_cotton_residual, map_quantities,
                                phi_bundle, schur_residual,
                                trace_identities)
from phifluid.tensors import values


def _pts(scene, n=4, seed=0):
    return scene.sample_points(n, np.random.default_rng(seed))


def test_flat_space_is_flat():
    scn = catalog.flat()
    out = classical_curvature(scn, _pts(scn))
    assert sup(out["gamma"]) < 1e-14
    assert sup(out["riemann"]) < 1e-14


def test_round_sphere_curvature_closed_form():
    """Unit S^3: Riem_ijkl = g_ik g_jl - g_il g_jk, Ric = 2 g, S = 6."""
    scn = catalog.round_sphere()
    pts = _pts(scn)
    geo = Geometry(scn, pts, 3)
    g = values(geo.g)
    riem = (np.einsum("bik,bjl->bijkl", g, g)
            - np.einsum("bil,bjk->bijkl", g, g))
    assert sup(values(geo.riemann) - riem) < 1e-11
    assert sup(values(geo.ric) - 2.0 * g) < 1e-11
    assert sup(values(geo.scal) - 6.0) < 1e-11


def test_christoffel_fd_oracle():
    """Christoffels of a random metric vs finite differences of g."""
    scn = catalog.random_scene(seed=7, m=3)
    pts = _pts(scn, n=2, seed=1)
    geo = Geometry(scn, pts, 2)
    gamma = values(geo.gamma)

    def gmat(x):
        from phifluid.tensors import values as tv
        geo2 = Geometry(scn, np.atleast_2d(x), 0)
        return tv(geo2.g)[0]

    h = 1e-5
    for b, pt in enumerate(pts):
        dg = np.zeros((3, 3, 3))
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            dg[:, :, k] = (gmat(pt + e) - gmat(pt - e)) / (2 * h)
        ginv = np.linalg.inv(gmat(pt))
        # dg[a, b, k] = d_k g_ab; Gamma^i_jk = g^il (d_j g_lk + d_k g_lj
        # - d_l g_jk) / 2
        term = (np.einsum("lkj->ljk", dg) + dg
                - np.einsum("jkl->ljk", dg))
        ref = 0.5 * np.einsum("il,ljk->ijk", ginv, term)
        assert sup(gamma[b] - ref) < 1e-6


def test_costa_map_quantities():
    """Projection of the product onto the second factor: tau = 0,
    nabla dphi = 0, |dphi|^2 = q / rho."""
    scn = catalog.costa()
    out = map_quantities(scn, _pts(scn))
    assert sup(out["tau"]) < 1e-12
    assert sup(out["nabla_dphi"]) < 1e-12
    assert sup(out["dphi_norm2"] - 2.0) < 1e-12


def test_costa_phi_scalar():
    scn = catalog.costa()
    bundle = phi_bundle(scn, _pts(scn), order=3, with_bach=False,
                        with_dbar=False)
    assert sup(bundle.s_phi - 12.0) < 1e-10


def test_schur_residual_all_catalog():
    for name in catalog.examples_catalog():
        scn = catalog.build(name)
        assert sup(schur_residual(scn, _pts(scn, n=3))) < 1e-6, name


def test_trace_identities_random_scene():
    scn = catalog.random_scene(seed=5, m=4)
    out = trace_identities(scn, _pts(scn, n=3))
    for key, res in out.items():
        assert sup(res) < 1e-10, key


def test_conformal_cotton_law():
    scn = catalog.random_scene(seed=2, m=4)
    assert sup(conformal_cotton_residual(scn, _pts(scn, n=3))) < 1e-8
