"""Scene description: chart, metric field, coupled map, scalar fields.

All component functions are plain callables taking a sequence of coordinate
values (floats, arrays, or Jets) and using the dispatching math functions of
:mod:`phifluid.jets`, so the same closure serves numeric evaluation and
forward-mode differentiation.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import MissingField, OrderExceeded, OutOfChart
from .jets import MAX_ORDER, exp, log

EPS_REG = 1e-8


@dataclass(frozen=True)
class Chart:
    names: tuple
    box: tuple  # per-coordinate (lo, hi) open intervals

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("chart needs at least one coordinate")
        for lo, hi in self.box:
            if not lo < hi:
                raise ValueError("empty chart box interval")

    @property
    def dim(self):
        return len(self.names)

    def contains(self, point):
        point = np.atleast_2d(np.asarray(point, dtype=float))
        ok = np.ones(point.shape[0], dtype=bool)
        for k, (lo, hi) in enumerate(self.box):
            ok &= (point[:, k] > lo) & (point[:, k] < hi)
        return ok

    def require(self, point):
        if not np.all(self.contains(point)):
            raise OutOfChart(f"point outside chart box {self.box}")


@dataclass
class ScalarField:
    """A smooth scalar component function with a declared derivative budget."""

    fn: callable
    order: int = MAX_ORDER
    name: str = ""

    def __call__(self, coords):
        return self.fn(coords)

    def require_order(self, order):
        if order > self.order:
            raise OrderExceeded(
                f"field {self.name or '<anon>'} declared smooth to order "
                f"{self.order}, requested {order}"
            )


def as_field(obj, name=""):
    if obj is None:
        return None
    if isinstance(obj, ScalarField):
        return obj
    return ScalarField(obj, name=name)


@dataclass
class MapSpec:
    """Map phi: M -> N given by component functions and a target metric."""

    components: callable          # x -> sequence of n values
    target_metric: callable       # y -> n x n nested sequence
    target_chart: Chart

    @property
    def n(self):
        return self.target_chart.dim


def trivial_map():
    """Constant map to a one-dimensional flat target (phi*h = 0)."""
    return MapSpec(
        components=lambda x: [0.0 * x[0]],
        target_metric=lambda y: [[1.0]],
        target_chart=Chart(("y",), ((-10.0, 10.0),)),
    )


@dataclass
class Scene:
    name: str
    chart: Chart
    metric: callable              # x -> m x m nested sequence
    mapspec: MapSpec = field(default_factory=trivial_map)
    alpha: float = 1.0
    eta: float = 0.0
    u: ScalarField = None
    f: ScalarField = None
    potential: ScalarField = None   # U as a function of target coordinates
    mu: ScalarField = None
    p: ScalarField = None
    lam: ScalarField = None
    fields: dict = field(default_factory=dict)  # extra named closures
    params: dict = field(default_factory=dict)
    sample_margin: float = 0.1

    def __post_init__(self):
        self.u = as_field(self.u, "u")
        self.f = as_field(self.f, "f")
        self.potential = as_field(self.potential, "U")
        self.mu = as_field(self.mu, "mu")
        self.p = as_field(self.p, "p")
        self.lam = as_field(self.lam, "lambda")

    @property
    def dim(self):
        return self.chart.dim

    def u_fn(self):
        if self.u is not None:
            return self.u.fn
        if self.f is not None:
            ffn = self.f.fn
            return lambda x: exp(-ffn(x))
        raise MissingField("scene has neither u nor f")

    def f_fn(self):
        if self.f is not None:
            return self.f.fn
        if self.u is not None:
            ufn = self.u.fn
            return lambda x: -log(ufn(x))
        raise MissingField("scene has neither u nor f")

    def require(self, *names):
        for nm in names:
            if getattr(self, nm, None) is None and nm not in self.fields:
                raise MissingField(f"scene {self.name!r} lacks field {nm!r}")

    def sample_points(self, count, rng, margin=None):
        """Uniform interior points of the chart box."""
        margin = self.sample_margin if margin is None else margin
        lo = np.array([b[0] for b in self.chart.box])
        hi = np.array([b[1] for b in self.chart.box])
        span = hi - lo
        return rng.uniform(lo + margin * span, hi - margin * span,
                           size=(count, self.dim))
