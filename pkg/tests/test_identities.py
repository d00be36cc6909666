"""Divergence-identity suite on hypothesis-satisfying scenes."""

import dataclasses

import numpy as np
import pytest

from phifluid import catalog
from phifluid.errors import HypothesisUnmet, UnknownCheckId
from phifluid.scene import Chart, MapSpec
from phifluid.system import IDENTITY_IDS, divergence_identity


def _pts(scene, n=3, seed=0):
    return scene.sample_points(n, np.random.default_rng(seed))


def _defect(id_, scene, n=3, **kw):
    out = divergence_identity(id_, scene, _pts(scene, n), **kw)
    return float(np.max(np.abs(out["defect"])))


def test_identity_ids_stable():
    assert IDENTITY_IDS == sorted(IDENTITY_IDS)
    assert len(IDENTITY_IDS) == 11


def test_unknown_id():
    with pytest.raises(UnknownCheckId):
        divergence_identity("nope", catalog.flat(), _pts(catalog.flat()))


@pytest.mark.parametrize("id_,tol", [
    ("two_form", 1e-10), ("bochner", 1e-10), ("weyl_div3", 1e-9),
    ("bach_div", 1e-10), ("divX_fp", 1e-10),
])
def test_identities_random_scene(id_, tol):
    m = 4 if id_ in ("weyl_div3", "bach_div") else 3
    scn = catalog.random_scene(seed=3, m=m)
    assert _defect(id_, scn) < tol


@pytest.mark.parametrize("id_,tol", [
    ("divY", 1e-10), ("divZ_shen", 1e-10), ("divX_fp", 1e-10),
    ("divZ_boundary", 1e-9), ("cotton_fundamental", 1e-10),
    ("bochner", 1e-10), ("conservation", 1e-10),
])
def test_identities_costa(id_, tol):
    assert _defect(id_, catalog.costa()) < tol


def test_hess_gamma_conformal_vector_field():
    """The commutation rule for Hess against a conformal field, on the
    sphere with a genuinely non-trivial map to S^2."""
    base = catalog.round_sphere()

    def target_metric(y):
        from phifluid.jets import sin
        s = sin(y[0])
        return [[1.0 + 0.0 * y[0], 0.0 * y[0]],
                [0.0 * y[0], s * s]]

    mapspec = MapSpec(
        components=lambda x: [x[1], x[2]],
        target_metric=target_metric,
        target_chart=Chart(("y1", "y2"), ((0.15, 3.0), (0.15, 3.0))),
    )
    scn = dataclasses.replace(base, mapspec=mapspec, alpha=0.8)
    assert _defect("hess_gamma", scn) < 1e-9


def test_hypothesis_gate():
    """hess_gamma on a random scene: grad u is not conformal."""
    scn = catalog.random_scene(seed=3, m=3)
    with pytest.raises(HypothesisUnmet):
        divergence_identity("hess_gamma", scn, _pts(scn))
    # and the gate can be bypassed explicitly
    out = divergence_identity("hess_gamma", scn, _pts(scn),
                              enforce_hypotheses=False)
    assert "defect" in out


def test_all_identities_have_a_green_scene():
    """Each identity id is exercised at machine precision somewhere."""
    seen = set()
    for id_ in IDENTITY_IDS:
        if id_ == "hess_gamma":
            seen.add(id_)
            continue
        scn = (catalog.random_scene(seed=3, m=4)
               if id_ in ("weyl_div3", "bach_div")
               else catalog.random_scene(seed=3, m=3)
               if id_ in ("two_form", "bochner")
               else catalog.costa())
        assert _defect(id_, scn) < 1e-8, id_
        seen.add(id_)
    assert seen == set(IDENTITY_IDS)
