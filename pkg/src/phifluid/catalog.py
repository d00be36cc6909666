"""Built-in example scenes.

The catalog exposes parametrized fixtures used by the test-suite and the
CLI: flat space, round spheres, the hemisphere solution, the product
example S^{n+1} x S^q with the projection map, the Gaussian soliton, a
warped-profile scene, and a sphere carrying a Codazzi tensor Hess w + w g.
Random perturbed scenes (used by property tests) are built here as well so
that every module draws from the same generator.
"""

import math

import numpy as np

from .jets import cos, exp, log, sin
from .scene import Chart, MapSpec, ScalarField, Scene

PI = math.pi


def _diag(entries, m):
    return [[entries[i] if i == j else 0.0 for j in range(m)] for i in range(m)]


def sphere_diag(coords, start, k, prefactor):
    """Diagonal entries of prefactor * g_{S^k} in nested polar coordinates."""
    entries = []
    fac = prefactor
    for i in range(k):
        entries.append(fac)
        s = sin(coords[start + i])
        fac = fac * (s * s)
    return entries


def _angle_names(prefix, k):
    return tuple(f"{prefix}{i+1}" for i in range(k))


def _sphere_box(k):
    # polar angles away from the axis, last angle azimuthal
    return tuple((0.15, PI - 0.15) for _ in range(k))


def _closed_sphere_box(m):
    # full fundamental domain minus hairline polar caps; quadrature grids
    # stay inside this by construction
    return tuple((5e-4, PI - 5e-4) for _ in range(m - 1)) + ((0.0, 2 * PI),)


def flat(m=3):
    def metric(x):
        return _diag([1.0] * m, m)

    return Scene(
        name="flat", chart=Chart(_angle_names("x", m), tuple((-1.0, 1.0) for _ in range(m))),
        metric=metric, alpha=1.0,
        u=ScalarField(lambda x: 1.0 + 0.0 * x[0]),
        mu=ScalarField(lambda x: 0.0 * x[0]),
        p=ScalarField(lambda x: 0.0 * x[0]),
        params={"m": m},
    )


def flat_torus(m=3):
    """Flat T^m = (R/2piZ)^m with a periodic positive u; A = g is Codazzi."""

    def metric(x):
        return _diag([1.0] * m, m)

    return Scene(
        name="flat-torus",
        chart=Chart(_angle_names("x", m), tuple((0.0, 2 * PI) for _ in range(m))),
        metric=metric, alpha=1.0,
        u=ScalarField(lambda x: 1.5 + 0.5 * sin(x[0]) * cos(x[1])),
        params={"m": m, "closed": "torus"},
    )


def round_sphere(m=3, shift=1.5):
    """Unit S^m with u = shift + cos r; solves u Ric - Hess u + Du g = l g."""

    def metric(x):
        return _diag(sphere_diag(x, 0, m, 1.0), m)

    lam = (m - 1) * shift
    return Scene(
        name="round-sphere",
        chart=Chart(("r",) + _angle_names("t", m - 1),
                    _closed_sphere_box(m)),
        metric=metric, alpha=1.0,
        u=ScalarField(lambda x: shift + cos(x[0])),
        lam=ScalarField(lambda x: lam + 0.0 * x[0]),
        params={"m": m, "shift": shift, "lambda": lam, "closed": "sphere"},
    )


def hemisphere(m=3):
    """Hemisphere solution: u = cos r on S^m_+, mu = m(m-1)/2, p = -mu."""

    def metric(x):
        return _diag(sphere_diag(x, 0, m, 1.0), m)

    mu = 0.5 * m * (m - 1)
    return Scene(
        name="hemisphere-SPFST",
        chart=Chart(("r",) + _angle_names("t", m - 1),
                    ((0.05, PI / 2),) + _closed_sphere_box(m - 1)),
        metric=metric, alpha=1.0, eta=1.0,
        u=ScalarField(lambda x: cos(x[0])),
        mu=ScalarField(lambda x: mu + 0.0 * x[0]),
        p=ScalarField(lambda x: -mu + 0.0 * x[0]),
        lam=ScalarField(lambda x: float(m) + 0.0 * x[0]),
        params={"m": m, "mu": mu, "p": -mu},
    )


def costa(n=2, q=2, rho=1.0):
    """Product S^{n+1} x S^q with the projection map onto the second factor.

    Coordinates (r, t_1..t_n, s_1..s_q); metric dr^2 + sin^2 r g_{S^n}
    + rho g_{S^q}; u = cos r; alpha = (q-1)/rho - (n+1).
    """
    m = n + q + 1
    alpha = (q - 1) / rho - (n + 1)
    if alpha == 0:
        raise ValueError("coupling alpha vanishes for these (n, q, rho)")
    s_phi = (m - 1) * (n + 1)
    mu = s_phi / 2.0

    def metric(x):
        first = [1.0] + sphere_diag(x, 1, n, sin(x[0]) * sin(x[0]))
        second = sphere_diag(x, 1 + n, q, rho + 0.0 * x[0])
        return _diag(first + second, m)

    def phi(x):
        return [x[1 + n + a] for a in range(q)]

    def target_metric(y):
        return _diag(sphere_diag(y, 0, q, rho), q)

    mapspec = MapSpec(
        components=phi,
        target_metric=target_metric,
        target_chart=Chart(_angle_names("y", q), _sphere_box(q)),
    )
    return Scene(
        name="costa-product",
        chart=Chart(("r",) + _angle_names("t", n) + _angle_names("s", q),
                    ((0.05, PI / 2),) + _sphere_box(n) + _sphere_box(q)),
        metric=metric, mapspec=mapspec, alpha=alpha, eta=1.0,
        u=ScalarField(lambda x: cos(x[0])),
        mu=ScalarField(lambda x: mu + 0.0 * x[0]),
        p=ScalarField(lambda x: -mu + 0.0 * x[0]),
        lam=ScalarField(lambda x: float(n + 1) + 0.0 * x[0]),
        fields={"w": lambda x: -1.0 / (n + 1) + 0.0 * x[0]},
        params={"n": n, "q": q, "rho": rho, "m": m, "alpha": alpha,
                "s_phi": s_phi, "mu": mu, "p": -mu, "lambda": n + 1},
    )


def gaussian_soliton(lam=0.7, m=3):
    """Flat chart with f = lam |x|^2 / 2: Ric^phi + Hess f = lam g (eta=0)."""

    def metric(x):
        return _diag([1.0] * m, m)

    def ffn(x):
        acc = 0.0
        for k in range(m):
            acc = acc + x[k] * x[k]
        return 0.5 * lam * acc

    return Scene(
        name="gaussian-soliton",
        chart=Chart(_angle_names("x", m), tuple((-1.0, 1.0) for _ in range(m))),
        metric=metric, alpha=1.0, eta=0.0,
        f=ScalarField(ffn),
        lam=ScalarField(lambda x: lam + 0.0 * x[0]),
        params={"m": m, "lambda": lam},
    )


def warped_profile(m=3, rho=None, f=None, eta=1.0, name="warped-profile"):
    """Warped product I x_rho S^{m-1} with radial profiles rho(r), f(r).

    Defaults reproduce the hemisphere solution (rho = sin, f = -log cos).
    The radial profiles are kept in ``params`` for the warped-split ODE.
    """
    if rho is None:
        rho = lambda r: sin(r)
    if f is None:
        f = lambda r: -1.0 * log(cos(r))

    def metric(x):
        rr = rho(x[0])
        return _diag([1.0] + sphere_diag(x, 1, m - 1, rr * rr), m)

    sigma = round_sphere(m - 1) if m - 1 >= 2 else None
    return Scene(
        name=name,
        chart=Chart(("r",) + _angle_names("t", m - 1),
                    ((0.05, PI / 2 - 0.05),) + _sphere_box(m - 1)),
        metric=metric, alpha=1.0, eta=eta,
        f=ScalarField(lambda x: f(x[0])),
        params={"m": m, "rho_profile": rho, "f_profile": f,
                "sigma_scene": sigma, "eta": eta},
    )


def codazzi_sphere(m=3, shift=1.5):
    """Unit S^m with the Codazzi tensor A = Hess w + w g, w = cos 2r.

    Carries u = shift + cos r, whose gradient is a conformal field; sigma_k
    of A is genuinely nonconstant.
    """
    scn = round_sphere(m=m, shift=shift)
    scn.name = "codazzi-sphere"
    scn.fields["w"] = ScalarField(lambda x: cos(2.0 * x[0]), name="w")
    scn.params["w"] = "cos(2r)"
    return scn


def _rand_sinusoid(rng, coords_count, amp):
    freq = rng.integers(-2, 3, size=coords_count)
    phase = rng.uniform(0, 2 * PI)
    coef = amp * rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])

    def fn(x):
        arg = phase
        for k in range(coords_count):
            if freq[k]:
                arg = arg + float(freq[k]) * x[k]
        return coef * sin(arg)

    return fn


def random_scene(m=3, seed=0, amp=0.05, with_map=True, name=None):
    """Perturbed metric on a flat chart, optionally coupled to a map to S^2.

    Small-amplitude sinusoidal perturbations keep the metric SPD on the box
    while exciting every curvature quantity.
    """
    rng = np.random.default_rng(seed)
    pert = [[_rand_sinusoid(rng, m, amp) for _ in range(m)] for _ in range(m)]

    def metric(x):
        comp = [[None] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                entry = pert[i][j](x) if j > i else 1.0 + pert[i][i](x)
                comp[i][j] = entry
                comp[j][i] = entry
        return comp

    if with_map:
        c1 = [_rand_sinusoid(rng, m, 0.3) for _ in range(2)]
        c2 = [_rand_sinusoid(rng, m, 0.3) for _ in range(2)]

        def phi(x):
            return [1.2 + c1[0](x) + c1[1](x), 1.5 + c2[0](x) + c2[1](x)]

        def target_metric(y):
            s = sin(y[0])
            return [[1.0, 0.0], [0.0, s * s]]

        mapspec = MapSpec(components=phi, target_metric=target_metric,
                          target_chart=Chart(("y1", "y2"),
                                             ((0.05, PI - 0.05), (0.0, PI))))
        pot = _rand_sinusoid(rng, 2, 0.5)
        potential = ScalarField(lambda y: pot(y), name="U")
    else:
        mapspec = None
        potential = None

    fpert = _rand_sinusoid(rng, m, 0.4)
    upert = _rand_sinusoid(rng, m, 0.3)
    mupert = _rand_sinusoid(rng, m, 0.5)
    ppert = _rand_sinusoid(rng, m, 0.5)
    lampert = _rand_sinusoid(rng, m, 0.5)
    om = [[_rand_sinusoid(rng, m, 0.5) for _ in range(m)] for _ in range(m)]

    def omega(x):
        comp = [[0.0] * m for _ in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                entry = om[i][j](x)
                comp[i][j] = entry
                comp[j][i] = -1.0 * entry
        return comp

    kwargs = {}
    if mapspec is not None:
        kwargs["mapspec"] = mapspec
    scn = Scene(
        name=name or f"random-{m}d-{seed}",
        chart=Chart(_angle_names("x", m), tuple((-1.0, 1.0) for _ in range(m))),
        metric=metric, alpha=rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]),
        eta=rng.uniform(-0.5, 1.5),
        f=ScalarField(fpert),
        potential=potential,
        mu=ScalarField(mupert), p=ScalarField(ppert),
        lam=ScalarField(lampert),
        params={"m": m, "seed": seed, "amp": amp},
        **kwargs,
    )
    scn.u = ScalarField(lambda x: 1.5 + upert(x), name="u")
    scn.fields["omega"] = omega
    scn.fields["w"] = ScalarField(lambda x: 0.7 + upert(x) * 0.5, name="w")
    return scn


CATALOG = {
    "flat": flat,
    "flat-torus": flat_torus,
    "round-sphere": round_sphere,
    "hemisphere-SPFST": hemisphere,
    "costa-product": costa,
    "gaussian-soliton": gaussian_soliton,
    "warped-profile": warped_profile,
    "codazzi-sphere": codazzi_sphere,
}


def examples_catalog():
    """Names of the built-in parametrized fixtures."""
    return sorted(CATALOG)


def build(name, **params):
    if name not in CATALOG:
        raise KeyError(f"unknown catalog scene {name!r}")
    return CATALOG[name](**params)
