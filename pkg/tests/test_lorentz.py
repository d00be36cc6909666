"""Static Lorentzian lift, Einstein equations, and energy conditions."""

import dataclasses

import numpy as np
import pytest

from conftest import sup
from phifluid import catalog
from phifluid.errors import AlphaNonPositive, NotPSD
from phifluid.lorentz import (EPS_EC, einstein_residual, energy_conditions,
                              lift_static, observer_forms, psd_trace_bound)
from phifluid.scene import ScalarField, Scene, Chart, MapSpec


def _pts(scene, n=4, seed=0):
    return scene.sample_points(n, np.random.default_rng(seed))


def test_lift_scalar_curvature_costa():
    """S-hat = S - 2 Du/u on the Costa product. There S^phi = 12 and
    S = S^phi + alpha |dphi|^2 = 12 - 2*2 = 8, while Du = -(n+1) u,
    so S-hat = 8 + 2(n+1) = 14."""
    scn = catalog.costa()
    lift = lift_static(scn, _pts(scn))
    assert sup(lift.scal - 14.0) < 1e-10


def test_lift_mixed_block_vanishes():
    scn = catalog.costa()
    lift = lift_static(scn, _pts(scn))
    assert sup(lift.ric_mixed) < 1e-12


@pytest.mark.parametrize("name", ["costa-product", "hemisphere-SPFST",
                                  "flat"])
def test_einstein_residual(name):
    scn = catalog.build(name)
    out = einstein_residual(scn, _pts(scn))
    assert sup(out["time"]) < 1e-10, name
    assert sup(out["spatial"]) < 1e-10, name


def _fluid_scene(rng, m=3):
    """Flat scene with constant fluid data and a linear map; parameters
    drawn so that every sufficiency inequality holds with alpha > 0."""
    while True:
        alpha = rng.uniform(0.2, 2.0)
        coef = rng.normal(size=m)

        def phi(x, c=coef):
            acc = 0.0 * x[0]
            for k in range(m):
                acc = acc + c[k] * x[k]
            return [acc]

        e = float(coef @ coef)  # |dphi|^2 for the flat metric
        p = rng.uniform(-1.0, 1.0)
        U = p + rng.uniform(0.0, 1.5)          # U >= p
        mu = abs(p) + rng.uniform(0.0, 2.0)    # mu + p >= 0, mu >= 0
        if mu + alpha * e / 2 + U < 0:
            continue
        if (m - 2) * mu + m * p < 2 * U:
            continue
        mapspec = MapSpec(components=phi,
                          target_metric=lambda y: [[1.0]],
                          target_chart=Chart(("y",), ((-50.0, 50.0),)))
        return Scene(
            name="fluid-flat", chart=catalog.flat(m).chart,
            metric=catalog.flat(m).metric, mapspec=mapspec,
            alpha=alpha,
            u=ScalarField(lambda x: 1.0 + 0.0 * x[0]),
            mu=ScalarField(lambda x, v=mu: v + 0.0 * x[0]),
            p=ScalarField(lambda x, v=p: v + 0.0 * x[0]),
            potential=ScalarField(lambda y, v=U: v + 0.0 * y[0]),
        )


def test_sufficiency_implies_sampling(rng):
    """Whenever a sufficient inequality certifies a condition, every
    sampled observer agrees up to the sampling slack."""
    for trial in range(20):
        scn = _fluid_scene(rng)
        pt = _pts(scn, n=1, seed=trial)[0]
        verdict = energy_conditions(scn, pt, samples=300, seed=trial)
        certified = [c for c, rep in verdict.conditions.items()
                     if rep.sufficient_holds]
        assert certified, "draw should satisfy the sufficiency battery"
        for cond in certified:
            rep = verdict.conditions[cond]
            assert rep.sampled_min >= -EPS_EC, (cond, rep.sampled_min)


def test_dec_is_wec_and_fec(rng):
    scn = _fluid_scene(rng)
    pt = _pts(scn, n=1)[0]
    verdict = energy_conditions(scn, pt, samples=200, seed=3)
    dec = verdict.conditions["DEC"].sampled_min
    wec = verdict.conditions["WEC"].sampled_min
    fec = verdict.conditions["FEC"].sampled_min
    assert abs(dec - min(wec, fec)) < 1e-12


def test_alpha_nonpositive_gate():
    scn = catalog.costa()  # alpha = -2
    pt = _pts(scn, n=1)[0]
    verdict = energy_conditions(scn, pt, samples=50, seed=0)
    assert all(rep.sufficient_holds is None
               for rep in verdict.conditions.values())
    with pytest.raises(AlphaNonPositive):
        energy_conditions(scn, pt, samples=50, seed=0,
                          require_sufficiency=True)


def test_observer_forms_closed_algebra(rng):
    scn = _fluid_scene(rng)
    pt = _pts(scn, n=1)[0]
    w = rng.uniform(-0.5, 0.5, size=scn.dim)
    out = observer_forms(scn, pt, w)
    for key in out["direct"]:
        assert abs(out["direct"][key] - out["algebra"][key]) < 1e-10, key


def test_psd_trace_bound():
    out = psd_trace_bound(np.diag([1.0, 2.0]), np.array([1.0, 2.0]))
    assert out["lhs"] <= out["rhs"]
    with pytest.raises(NotPSD):
        psd_trace_bound(np.diag([1.0, -2.0]), np.array([1.0, 2.0]))
