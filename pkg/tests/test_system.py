"""System residuals, integrability, level sets, and the warped-split ODE."""

import numpy as np
import pytest

from conftest import sup
from phifluid import catalog
from phifluid.errors import (BoundaryPoint, CriticalPoint, MissingField,
                             MissingProfile)
from phifluid.system import (integrability_residuals, level_set_geometry,
                             system_residual, warped_split_residual)


def _pts(scene, n=4, seed=0):
    return scene.sample_points(n, np.random.default_rng(seed))


@pytest.mark.parametrize("name", ["costa-product", "hemisphere-SPFST"])
def test_gianny_system_solutions(name):
    scn = catalog.build(name)
    res = system_residual(scn, _pts(scn, n=8), which="gianny")
    assert res.max_norm < 1e-10, res.norms


def test_eta_system_costa():
    scn = catalog.costa()
    res = system_residual(scn, _pts(scn, n=8), which="eta_system")
    assert res.max_norm < 1e-10, res.norms


def test_eta_system_gaussian_soliton():
    scn = catalog.gaussian_soliton()
    res = system_residual(scn, _pts(scn, n=8), which="eta_system")
    assert res.max_norm < 1e-10, res.norms


def test_gianny_missing_fields():
    scn = catalog.round_sphere()  # no mu, p
    with pytest.raises(MissingField):
        system_residual(scn, _pts(scn, n=2), which="gianny")


def test_boundary_point_rejected():
    scn = catalog.hemisphere()
    pts = _pts(scn, n=2)
    pts[0, 0] = np.pi / 2 - 1e-10  # u = cos r below the regularity floor
    with pytest.raises(BoundaryPoint):
        system_residual(scn, pts, which="gianny")


def test_integrability_costa():
    scn = catalog.costa()
    out = integrability_residuals(scn, _pts(scn, n=4))
    assert sup(out["first"]) < 1e-10
    assert sup(out["second"]) < 1e-10


def test_integrability_gaussian_degenerate():
    """On the soliton the first condition collapses identically."""
    scn = catalog.gaussian_soliton()
    out = integrability_residuals(scn, _pts(scn, n=4))
    assert sup(out["first"]) < 1e-12


def test_level_set_identity_costa():
    """The quadratic level-set identity, in the non-umbilical case."""
    scn = catalog.costa()
    frames = level_set_geometry(scn, _pts(scn, n=8))
    for fr in frames:
        assert abs(fr.a2_defect) < 1e-10
        # the defect must be exercised with a genuinely non-umbilical
        # second fundamental form
        assert sup(fr.traceless_form) > 1e-2


def test_level_set_round_sphere_umbilical():
    scn = catalog.round_sphere()
    fr = level_set_geometry(scn, _pts(scn, n=1)[0])
    assert sup(fr.traceless_form) < 1e-10
    assert abs(fr.a2_defect) < 1e-10


def test_level_set_critical_point():
    """f = lam |x|^2 / 2 has a genuine critical point at the origin."""
    scn = catalog.gaussian_soliton()
    with pytest.raises(CriticalPoint):
        level_set_geometry(scn, np.zeros(scn.dim))


def test_warped_split_ode():
    scn = catalog.warped_profile()
    rs = np.linspace(0.2, 1.2, 7)
    out = warped_split_residual(scn, rs)
    assert sup(out) < 1e-10


def test_warped_split_needs_profiles():
    scn = catalog.flat()
    with pytest.raises(MissingProfile):
        warped_split_residual(scn, np.array([0.3]))
