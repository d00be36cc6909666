"""Singular Cauchy problem, critical curves, criteria, verdicts."""

import numpy as np
import pytest
from scipy.special import jn_zeros

from phifluid import catalog
from phifluid.errors import (ProfileSingular, TailDivergent,
                             UnsupportedFamily)
from phifluid.oscillation import (RadialProfile, critical_curve,
                                  nonexistence_verdict, profile_from_scene,
                                  solve_cauchy, zero_criteria)


def test_constant_solution():
    prof = RadialProfile(v=lambda t: t, A=lambda t: 0.0, T=10.0)
    rep = solve_cauchy(prof)
    assert rep.first_zero is None
    assert np.max(np.abs(rep.z - 1.0)) < 1e-12


def test_bessel_first_zero():
    """v = t, A = 1 gives z = z0 J0(t); oracle: scipy's Bessel zeros."""
    prof = RadialProfile(v=lambda t: t, A=lambda t: 1.0, T=10.0)
    rep = solve_cauchy(prof, z0=2.0)
    assert abs(rep.kappa - 1.0) < 1e-6
    assert abs(rep.first_zero - jn_zeros(0, 1)[0]) < 1e-6


def test_sinc_first_zero():
    """v = t^2, A = 1 gives z = z0 sin(t)/t; first zero pi exactly."""
    prof = RadialProfile(v=lambda t: t * t, A=lambda t: 1.0, T=10.0)
    rep = solve_cauchy(prof)
    assert abs(rep.first_zero - np.pi) < 1e-8


def test_z0_scaling_invariance():
    prof = RadialProfile(v=lambda t: t * t, A=lambda t: 1.0, T=10.0)
    r1 = solve_cauchy(prof, z0=1.0)
    r3 = solve_cauchy(prof, z0=3.0)
    assert abs(r1.first_zero - r3.first_zero) < 1e-9
    assert np.max(np.abs(r3.z - 3.0 * r1.z)) < 1e-8


def test_zeros_are_isolated():
    prof = RadialProfile(v=lambda t: t, A=lambda t: 1.0, T=30.0)
    rep = solve_cauchy(prof)
    sign = np.sign(rep.z)
    flips = rep.t[:-1][sign[:-1] * sign[1:] < 0]
    assert len(flips) >= 3
    assert np.min(np.diff(flips)) > 1e-2


def test_profile_singular():
    with pytest.raises(ProfileSingular):
        solve_cauchy(RadialProfile(v=lambda t: t - 1.0,
                                   A=lambda t: 1.0, T=3.0))
    with pytest.raises(ProfileSingular):
        solve_cauchy(RadialProfile(v=lambda t: t, A=lambda t: 1.0,
                                   T=3.0), z0=-1.0)


def test_critical_curve_power_closed_form():
    r = np.array([0.5, 1.0, 3.0])
    out = critical_curve({"family": "power", "C": 2.0, "theta": 3.0}, r)
    assert np.max(np.abs(out["chi"] - (1.0 / r) ** 2)) < 1e-14


def test_critical_curve_tail_divergent():
    with pytest.raises(TailDivergent):
        critical_curve({"family": "power", "C": 1.0, "theta": 1.0},
                       np.array([1.0]))
    with pytest.raises(UnsupportedFamily):
        critical_curve({"family": "nope"}, np.array([1.0]))


def test_critical_curve_exponential_asymptote():
    """h = Lam e^{a r}: chi~ = (a/2)^2 and chi/chi~ -> 1."""
    r = np.array([5.0, 20.0])
    out = critical_curve({"family": "expgamma", "Lam": 1.5, "a": 0.7,
                          "gamma": 1.0, "beta": 0.0}, r)
    assert np.max(np.abs(out["chi_tilde"] - 0.35 ** 2)) < 1e-14
    assert np.max(np.abs(out["chi"] / out["chi_tilde"] - 1.0)) < 1e-5


def test_polynomial_criterion_cross_validated(rng):
    """10 draws with D > (theta-1)/2: criterion (b) fires AND the
    integrated solution actually has a first zero."""
    for _ in range(10):
        theta = rng.uniform(1.5, 4.0)
        D = (theta - 1) / 2 + rng.uniform(0.3, 1.5)
        prof = RadialProfile(v=lambda t, th=theta: t ** th,
                             A=lambda t, d=D: d * d / (t * t), T=3000.0)
        crit = zero_criteria(prof, {"family": "power", "C": 1.0,
                                    "theta": theta})
        assert crit["polynomial-growth"]["satisfied"]
        assert solve_cauchy(prof).first_zero is not None


def test_superexponential_criterion_cross_validated():
    a, b = 1.0, 2.0
    prof = RadialProfile(v=lambda t: np.exp(a * t),
                         A=lambda t: b * (a / 2) ** 2, T=60.0)
    crit = zero_criteria(prof, {"family": "expgamma", "Lam": 1.0, "a": a,
                                "gamma": 1.0, "beta": 0.0})
    assert crit["superexponential"]["satisfied"]
    assert solve_cauchy(prof).first_zero is not None


def test_integral_divergence_criterion():
    prof = RadialProfile(v=lambda t: t, A=lambda t: 1.0, T=50.0)
    assert zero_criteria(prof)["integral-divergence"]["satisfied"]
    # 1/v integrable at infinity for v = t^2: not certified
    prof2 = RadialProfile(v=lambda t: t * t, A=lambda t: 1.0, T=50.0)
    assert not zero_criteria(prof2)["integral-divergence"]["satisfied"]


def test_all_criteria_unsatisfied_for_zero_coefficient():
    prof = RadialProfile(v=lambda t: t * t, A=lambda t: 0.0, T=50.0)
    crit = zero_criteria(prof, {"family": "power", "C": 1.0, "theta": 2.0})
    assert all(not v["satisfied"] for v in crit.values())
    assert solve_cauchy(prof).first_zero is None


def test_hemisphere_verdict_must_not_fire():
    """u = cos r is a positive solution on the open hemisphere, so the
    non-existence verdict must stay silent on every scanned horizon."""
    scn = catalog.hemisphere()
    out = nonexistence_verdict(scene=scn)
    assert not out["fires"]
    prof = profile_from_scene(scn)
    rep = solve_cauchy(prof)
    assert np.max(np.abs(rep.z - np.cos(rep.t))) < 1e-5


def test_positive_coefficient_verdict_fires():
    """Euclidean profile with constant coefficient c: z = sinc(sqrt(c) t),
    first zero pi/sqrt(c)."""
    c = 4.0
    prof = RadialProfile(v=lambda t: t * t, A=lambda t: c, T=5.0)
    out = nonexistence_verdict(profile=prof)
    assert out["fires"]
    assert abs(out["first_zero"] - np.pi / 2.0) < 1e-9
