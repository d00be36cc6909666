"""Static Lorentzian lift, stress-energy tensor and energy conditions.

A scene's Riemannian base (M, g) with lapse u > 0 lifts to the static
space-time (R x M, -u^2 dt^2 + g). This module assembles the lifted Ricci
tensor, the stress-energy tensor of the fluid coupled to the map, the
Einstein-equation residual, and energy-condition verdicts obtained both
from pointwise sufficient inequalities and from direct sampling of
timelike/null observers.
"""

from dataclasses import dataclass, field

import numpy as np

from .curvature import Geometry
from .errors import AlphaNonPositive, BoundaryPoint, MissingField, NotPSD
from .scene import EPS_REG
from .system import _field_jet, _du_up
from .tensors import values

EPS_EC = 1e-9
_BALL_DELTA = 1e-6

CONDITIONS = ("NEC", "WEC", "SEC", "FEC", "DEC")


@dataclass
class LorentzLift:
    """Split components of the lifted Ricci tensor at a batch of points.

    ``ric_spatial`` is the g-block, ``ric_time`` the frame component
    Ric-hat(e_0, e_0) with e_0 = (1/u) d/dt, and ``ric_mixed`` the (0j)
    block, identically zero for a static lift.
    """

    points: np.ndarray
    ric_spatial: np.ndarray
    ric_time: np.ndarray
    ric_mixed: np.ndarray
    scal: np.ndarray
    tau_hat: np.ndarray
    lapse: np.ndarray


@dataclass
class ConditionReport:
    sufficient_holds: object      # bool, or None when not applicable
    necessary_violated: object    # bool, or None when unknown
    sampled_min: float
    samples: int


@dataclass
class EnergyVerdict:
    point: np.ndarray
    conditions: dict
    seed: int
    samples: int
    alpha: float
    scalars: dict = field(default_factory=dict)


def _pointwise(scene, points, order=3):
    geo = Geometry(scene, points, order)
    uv = values(geo.u)
    if np.min(uv) <= EPS_REG:
        raise BoundaryPoint("lapse u below regularity threshold")
    return geo, uv


def lift_static(scene, points, order=3):
    """Ricci tensor, scalar curvature and tension field of the static lift."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    geo, uv = _pointwise(scene, points, order)
    ric_sp = values(geo.ric) - values(geo.hess_u) / uv[:, None, None]
    ric_time = values(geo.lap_u) / uv
    scal = values(geo.scal) - 2.0 * values(geo.lap_u) / uv
    dphi_du = np.einsum("bai,bi->ba", values(geo.dphi), values(_du_up(geo)))
    tau_hat = values(geo.tau) + dphi_du / uv[:, None]
    mixed = np.zeros((points.shape[0], geo.m))
    return LorentzLift(points=points, ric_spatial=ric_sp, ric_time=ric_time,
                       ric_mixed=mixed, scal=scal, tau_hat=tau_hat, lapse=uv)


def _fluid_scalars(geo, uv):
    scene = geo.scene
    if scene.mu is None or scene.p is None:
        raise MissingField("stress-energy needs mu and p fields")
    mu = values(_field_jet(geo, scene.mu, "mu"))
    p = values(_field_jet(geo, scene.p, "p"))
    U = values(geo.U)
    e = values(geo.dphi_norm2)
    alpha = scene.alpha
    time_coef = mu + 0.5 * alpha * e + U      # coefficient of u^2 dt x dt
    space_coef = p - 0.5 * alpha * e - U      # coefficient of g
    return mu, p, U, e, time_coef, space_coef


def stress_energy(scene, points, order=3):
    """Stress-energy tensor in the split representation.

    Returns a dict with the coefficient of u^2 dt x dt, the coefficient of
    g, and the full spatial block (coefficient-of-g part plus alpha phi*h).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    geo, uv = _pointwise(scene, points, order)
    mu, p, U, e, time_coef, space_coef = _fluid_scalars(geo, uv)
    gv = values(geo.g)
    spatial = (space_coef[:, None, None] * gv
               + scene.alpha * values(geo.phistar_h))
    return {"time_coef": time_coef, "space_coef": space_coef,
            "spatial": spatial, "lapse": uv}


def einstein_residual(scene, points, order=3):
    """Residual of Ric-hat - (S-hat/2) g-hat = T-hat, split in blocks."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lift = lift_static(scene, points, order)
    T = stress_energy(scene, points, order)
    geo, uv = _pointwise(scene, points, order)
    gv = values(geo.g)
    # Einstein tensor, time block on the u^2 dt x dt basis:
    # Ric-hat time coefficient is u Delta u = u^2 * (Delta u / u).
    time_lhs = lift.ric_time + 0.5 * lift.scal
    spatial_lhs = lift.ric_spatial - 0.5 * lift.scal[:, None, None] * gv
    return {"time": time_lhs - T["time_coef"],
            "spatial": spatial_lhs - T["spatial"]}


def _frame(g_point):
    """Columns of B form a g-orthonormal frame: B^T g B = I."""
    L = np.linalg.cholesky(g_point)
    return np.linalg.inv(L).T


def psd_trace_bound(A, u):
    """Both sides of <Au, u> <= (tr A) <u, u> for PSD symmetric A."""
    A = np.asarray(A, dtype=float)
    u = np.asarray(u, dtype=float)
    if not np.allclose(A, A.T, atol=1e-12):
        raise NotPSD("matrix is not symmetric")
    w = np.linalg.eigvalsh(A)
    if np.min(w) < -1e-10:
        raise NotPSD(f"matrix has negative eigenvalue {np.min(w):.3e}")
    return {"lhs": float(u @ A @ u), "rhs": float(np.trace(A) * (u @ u))}


def energy_conditions(scene, point, samples=500, seed=0, order=3,
                      require_sufficiency=False):
    """Energy-condition verdict at one point.

    Sufficiency flags evaluate the pointwise inequalities (only meaningful
    for alpha > 0; reported as None otherwise, or raise AlphaNonPositive
    when ``require_sufficiency`` is set). Necessity flags cover the two
    conditions with a known necessary inequality; the rest are None.
    Sampling draws timelike observers w = e_0 + w^i e_i with
    sum (w^i)^2 < 1 (null observers on the unit sphere) and evaluates the
    relevant quadratic forms directly from the framed stress-energy tensor.
    """
    point = np.asarray(point, dtype=float)
    pts = np.atleast_2d(point)
    geo, uv = _pointwise(scene, pts, order)
    alpha = scene.alpha
    mu, p, U, e, time_coef, space_coef = (
        float(np.asarray(v).ravel()[0]) for v in _fluid_scalars(geo, uv))
    m = geo.m
    gv = values(geo.g)[0]
    B = _frame(gv)
    P = B.T @ values(geo.phistar_h)[0] @ B      # phi*h in the g-frame

    # framed stress-energy: eta = diag(-1, 1, ..., 1), T-hat(e_0,e_0) = time
    That = np.zeros((m + 1, m + 1))
    That[0, 0] = time_coef
    That[1:, 1:] = space_coef * np.eye(m) + alpha * P
    eta = np.diag([-1.0] + [1.0] * m)
    trT = float(np.einsum("ab,ab->", np.linalg.inv(eta), That))

    rng = np.random.default_rng(seed)
    # timelike: uniform direction, radius scaled into the unit ball
    dirs = rng.normal(size=(samples, m))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    radii = (1.0 - _BALL_DELTA) * rng.random(samples) ** (1.0 / m)
    w_time = np.concatenate([np.ones((samples, 1)), radii[:, None] * dirs],
                            axis=1)
    w_null = np.concatenate([np.ones((samples, 1)), dirs], axis=1)

    def quad(W):
        return np.einsum("sa,ab,sb->s", W, That, W)

    def gw(W):
        return np.einsum("sa,ab,sb->s", W, eta, W)

    def flux_norm(W):
        J = -np.einsum("ab,sb->sa", np.linalg.inv(eta) @ That, W)
        return np.einsum("sa,ab,sb->s", J, eta, J)

    q_time = quad(w_time)
    q_null = quad(w_null)
    sec_q = q_time - trT / (m - 1.0) * gw(w_time)
    fec_q = -flux_norm(w_time)          # must be >= 0 for the FEC

    sampled = {
        "NEC": float(np.min(q_null)),
        "WEC": float(np.min(q_time)),
        "SEC": float(np.min(sec_q)),
        "FEC": float(np.min(fec_q)),
        "DEC": float(min(np.min(q_time), np.min(fec_q))),
    }

    if alpha > 0:
        wec_aux = mu + 0.5 * alpha * e + U
        suff = {
            "NEC": p + mu >= -EPS_EC,
            "WEC": (p + mu >= -EPS_EC) and (wec_aux >= -EPS_EC),
            "SEC": (p + mu >= -EPS_EC)
                   and ((m - 2) * mu + m * p - 2 * U >= -EPS_EC),
            "FEC": (U - p >= -EPS_EC)
                   and (wec_aux ** 2 >= (p - 0.5 * alpha * e - U) ** 2
                        - EPS_EC),
            "DEC": (U - p >= -EPS_EC) and (mu + p >= -EPS_EC)
                   and (wec_aux >= -EPS_EC),
        }
    else:
        if require_sufficiency:
            raise AlphaNonPositive(
                "sufficient inequalities assume a positive coupling alpha")
        suff = {c: None for c in CONDITIONS}

    necessary = {
        "NEC": None,
        "WEC": mu + 0.5 * alpha * e + U < -EPS_EC,
        "SEC": (m - 2) * mu + m * p - 2 * U < -EPS_EC,
        "FEC": None,
        "DEC": mu + 0.5 * alpha * e + U < -EPS_EC,
    }

    conditions = {c: ConditionReport(sufficient_holds=suff[c],
                                     necessary_violated=necessary[c],
                                     sampled_min=sampled[c],
                                     samples=samples)
                  for c in CONDITIONS}
    return EnergyVerdict(point=point, conditions=conditions, seed=seed,
                         samples=samples, alpha=alpha,
                         scalars={"mu": mu, "p": p, "U": U,
                                  "dphi_norm2": e, "time_coef": time_coef,
                                  "space_coef": space_coef})


def observer_forms(scene, point, w_spatial, order=3):
    """Closed-form quadratic forms for an observer w = e_0 + w^i e_i.

    Returns the direct-assembly values of T-hat(w,w), the SEC form and the
    flux norm together with the algebraic expressions in the coefficients
    w^i, enabling a pure-algebra cross-check.
    """
    point = np.asarray(point, dtype=float)
    pts = np.atleast_2d(point)
    geo, uv = _pointwise(scene, pts, order)
    alpha = scene.alpha
    m = geo.m
    mu, p, U, e, time_coef, space_coef = (
        float(np.asarray(v).ravel()[0]) for v in _fluid_scalars(geo, uv))
    gv = values(geo.g)[0]
    B = _frame(gv)
    P = B.T @ values(geo.phistar_h)[0] @ B
    w = np.asarray(w_spatial, dtype=float)
    s2 = float(w @ w)
    pw = float(w @ P @ w)

    That = np.zeros((m + 1, m + 1))
    That[0, 0] = time_coef
    That[1:, 1:] = space_coef * np.eye(m) + alpha * P
    eta = np.diag([-1.0] + [1.0] * m)
    W = np.concatenate([[1.0], w])
    trT = float(np.einsum("ab,ab->", np.linalg.inv(eta), That))
    J = -np.linalg.inv(eta) @ That @ W

    direct = {
        "T(w,w)": float(W @ That @ W),
        "SEC(w,w)": float(W @ That @ W - trT / (m - 1.0) * (W @ eta @ W)),
        "flux_norm": float(J @ eta @ J),
    }
    # framed phi*h columns give dphi(e_i); Gram matrix entries reuse P
    pw_vec = P @ w
    algebra = {
        "T(w,w)": (1.0 - s2) * (mu + 0.5 * alpha * e + U)
                  + s2 * (mu + p) + alpha * pw,
        "SEC(w,w)": (1.0 - s2) * (((m - 2.0) * mu + m * p - 2.0 * U)
                                  / (m - 1.0))
                    + s2 * (mu + p) + alpha * pw,
        "flux_norm": (-(1.0 - s2) * (mu + 0.5 * alpha * e + U) ** 2
                      + s2 * ((p - 0.5 * alpha * e - U) ** 2
                              - (mu + 0.5 * alpha * e + U) ** 2)
                      + alpha ** 2 * float(pw_vec @ P @ w)
                      + 2.0 * alpha * (p - 0.5 * alpha * e - U) * pw),
    }
    return {"direct": direct, "algebra": algebra}
