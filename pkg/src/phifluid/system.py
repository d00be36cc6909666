"""Residuals of the static fluid system coupled to a map, and related checks.

Provides the per-equation residuals of the two system parametrizations
(u-form and exponential f-form), the first and second integrability
conditions, the adapted level-set frame with its quadratic defect, the
warped-product radial ODE, and a suite of divergence identities whose left
sides are computed by differentiating the defining vector-field closure and
whose right sides are the independent closed-form expressions.
"""

from dataclasses import dataclass, field

import numpy as np

from .curvature import Geometry, asjet, smul
from .errors import (BoundaryPoint, CriticalPoint, HypothesisUnmet,
                     MissingField, MissingProfile, UnknownCheckId)
from .jets import Jet, jet_space, partial as jpartial
from .scene import EPS_REG
from .tensors import values


def _sup(arr):
    return float(np.max(np.abs(np.asarray(arr, dtype=float))))


# ---- scalar fields attached to a geometry ------------------------------------


def _field_jet(geo, fld, name):
    if fld is None:
        raise MissingField(f"scene {geo.scene.name!r} lacks field {name!r}")
    val = fld.fn(geo.x)
    if not isinstance(val, Jet):
        val = Jet.constant(geo.space, np.broadcast_to(
            float(val), (geo.points.shape[0],)).copy())
    return val


def _mu(geo):
    return _field_jet(geo, geo.scene.mu, "mu")


def _p(geo):
    return _field_jet(geo, geo.scene.p, "p")


def _lam(geo):
    if geo.scene.lam is not None:
        return _field_jet(geo, geo.scene.lam, "lambda")
    # trace fallback: lambda = (S^phi + Delta f - eta |grad f|^2) / m
    eta = geo.scene.eta
    return (geo.s_phi + geo.lap_f - eta * geo.df_norm2) / geo.m


def _du_up(geo):
    return np.tensordot(geo.ginv, geo.du, axes=([1], [0]))


def _u_pull(geo):
    """(U^a phi^a_i): pullback of the target differential of U."""
    return np.tensordot(geo.dU, geo.dphi, axes=([0], [0]))


def _div_vec(geo, X):
    """Divergence of a covariant vector field given as jets."""
    dX = geo.covd(X)
    return asjet(np.tensordot(geo.ginv, dX, axes=([0, 1], [0, 1])))


def _div_last(geo, T):
    """Divergence over the last covariant slot of a jet tensor."""
    dT = geo.covd(T)
    return np.tensordot(dT, geo.ginv, axes=([T.ndim - 1, T.ndim], [0, 1]))


def _norm2_cov(geo, T):
    """Full g-norm squared of an all-covariant jet tensor."""
    cur = T
    up = T
    for s in range(T.ndim):
        up = np.moveaxis(np.tensordot(up, geo.ginv, axes=([0], [0])),
                         -1, T.ndim - 1)
    return asjet(np.tensordot(cur, up, axes=(tuple(range(T.ndim)),
                                              tuple(range(T.ndim)))))


def _lie_sym2(geo, T, X):
    """Lie derivative of a covariant symmetric 2-tensor along X (covariant)."""
    Xup = np.tensordot(geo.ginv, X, axes=([1], [0]))
    dX = geo.covd(X)                       # X_{i,j}
    dXup = np.einsum("ts,si->ti", geo.ginv, dX)   # (grad X)^t_i
    adv = np.tensordot(geo.covd(T), Xup, axes=([2], [0]))
    return (adv + np.einsum("tj,ti->ij", T, dXup)
            + np.einsum("it,tj->ij", T, dXup))


# ---- system residuals ---------------------------------------------------------


@dataclass
class SystemResidual:
    which: str
    residuals: dict
    norms: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.norms:
            self.norms = {k: _sup(v) for k, v in self.residuals.items()}

    @property
    def max_norm(self):
        return max(self.norms.values())


def system_residual(scene, points, which="gianny", order=3):
    """Per-equation residuals of the fluid system at a batch of points.

    ``which`` selects the u-parametrized five-equation system ("gianny") or
    the exponential-change f-parametrized pair ("eta_system").
    """
    geo = Geometry(scene, points, order)
    m, alpha, eta = geo.m, scene.alpha, scene.eta
    res = {}
    if which == "gianny":
        uv = values(geo.u)
        if np.min(uv) <= EPS_REG:
            raise BoundaryPoint("u below regularity threshold at a point")
        mu, p, U = _mu(geo), _p(geo), geo.U
        coef = (geo.s_phi / 2 - p + U) / (m - 1)
        e1 = geo.hess_u - smul(geo.u, geo.ric_phi - smul(coef, geo.g))
        e2 = geo.lap_u - (geo.u / (m - 1)) * (
            m * p - m * U + 0.5 * (m - 2) * geo.s_phi)
        dphi_gradu = np.tensordot(geo.dphi, _du_up(geo), axes=([1], [0]))
        e3 = (smul(geo.u, geo.tau) + dphi_gradu
              - smul(geo.u / alpha, geo.dU_up))
        e4 = mu + U - geo.s_phi / 2
        dp = geo.covd_scalar(p)
        e5 = smul(mu + p, geo.du) + smul(geo.u, dp)
        # derived conservation of energy-momentum: u grad(mu) = grad(u(mu+p))
        dmu = geo.covd_scalar(mu)
        cons = smul(geo.u, dmu) - geo.covd_scalar(geo.u * (mu + p))
        res = {"i": values(e1), "ii": values(e2), "iii": values(e3),
               "iv": values(e4), "v": values(e5),
               "conservation": values(cons)}
    elif which == "eta_system":
        lam = _lam(geo)
        e1 = (geo.ric_phi + geo.hess_f
              - eta * np.einsum("i,j->ij", geo.df, geo.df)
              - smul(lam, geo.g))
        dphi_gradf = np.tensordot(geo.dphi, geo.df_up, axes=([1], [0]))
        e2 = geo.tau - dphi_gradf - geo.dU_up / alpha
        res = {"i": values(e1), "ii": values(e2)}
    else:
        raise ValueError(f"unknown system {which!r}")
    return SystemResidual(which=which, residuals=res)


# ---- integrability conditions --------------------------------------------------


def integrability_residuals(scene, points, order=5):
    """Defects of the first and second integrability conditions."""
    geo = Geometry(scene, points, order)
    m, alpha, eta = geo.m, scene.alpha, scene.eta
    c = 1.0 + eta * (m - 2)
    upull = _u_pull(geo)

    fW = np.tensordot(geo.df_up, geo.w_phi, axes=([0], [0]))
    first = (c * geo.dbar_phi - geo.c_phi - fW
             - (np.einsum("j,ik->ijk", upull, geo.g)
                - np.einsum("k,ij->ijk", upull, geo.g)) / (m - 1))

    div_dbar = _div_last(geo, geo.dbar_phi)
    tau_pull = np.tensordot(geo.tau_low, geo.dphi, axes=([0], [0]))  # phi^a_ss phi^a_i
    t_a = c * (div_dbar - (alpha / (m - 2)) * np.einsum(
        "i,j->ij", tau_pull, geo.df))
    fC = np.tensordot(geo.df_up, np.transpose(geo.c_phi, (2, 1, 0)),
                      axes=([0], [0]))  # f_k C_{jik} -> [i,j]
    t_b = ((m - 3.0) / (m - 2)) * fC
    t_c = -eta * np.einsum("ijk,k->ij",
                           np.tensordot(geo.df_up, geo.w_phi, axes=([0], [0])),
                           geo.df_up)
    nd_pull = np.tensordot(geo.dU, geo.nabla_dphi, axes=([0], [0]))
    utau = asjet(np.tensordot(geo.dU, geo.tau, axes=([0], [0])))
    t_d = ((m - 2.0) * nd_pull - smul(utau / (m - 2), geo.g)) / (m - 1)
    hU_pull = np.einsum("ab,ai,bj->ij", geo.hess_U, geo.dphi, geo.dphi)
    trUH = asjet(np.tensordot(hU_pull, geo.ginv, axes=([0, 1], [0, 1])))
    t_e = (smul(trUH, geo.g) - m * hU_pull) / (m - 1)
    t_f = eta * np.einsum("j,i->ij", geo.df, upull)
    second = (m - 2.0) * geo.b_phi - (t_a + t_b + t_c + t_d + t_e + t_f)
    return {"first": values(first), "second": values(second)}


# ---- level-set geometry --------------------------------------------------------


@dataclass
class LevelSetFrame:
    point: np.ndarray
    normal: np.ndarray          # e_m, contravariant components
    frame: np.ndarray           # (m-1, m) tangent vectors, contravariant
    second_form: np.ndarray     # h_AB
    mean_curvature: float       # H
    traceless_form: np.ndarray  # h_AB - H delta_AB
    grad_norm: float            # |grad f|
    a2_defect: float


def level_set_geometry(scene, point, order=3):
    """Adapted orthonormal frame of the f-level set through ``point``.

    Also evaluates the quadratic identity linking |Dbar|^2 to the traceless
    second fundamental form and the normal components of the phi-Ricci
    tensor; for exact solutions of the f-system the defect vanishes.
    """
    point = np.asarray(point, dtype=float)
    single = point.ndim == 1
    pts = np.atleast_2d(point)
    geo = Geometry(scene, pts, order)
    m = geo.m
    gv = values(geo.g)
    dfv = values(geo.df)
    dfup = values(np.asarray(_df_up(geo)))
    hessf = values(geo.hess_f)
    ricp = values(geo.ric_phi)
    sphi = values(geo.s_phi)
    dbar = values(geo.dbar_phi)
    ginv = values(geo.ginv)
    out = []
    for b in range(pts.shape[0]):
        g_b = gv[b]
        grad = dfup[b]
        nrm2 = float(dfv[b] @ grad)
        if nrm2 <= EPS_REG ** 2 or np.sqrt(nrm2) <= EPS_REG:
            raise CriticalPoint("grad f below regularity threshold")
        nrm = np.sqrt(nrm2)
        e_m = grad / nrm
        # tangent frame: Gram-Schmidt of coordinate directions against e_m
        basis = [e_m]
        for k in range(m):
            v = np.zeros(m)
            v[k] = 1.0
            for w in basis:
                v = v - (w @ g_b @ v) * w
            nv = np.sqrt(max(v @ g_b @ v, 0.0))
            if nv > 1e-8:
                basis.append(v / nv)
            if len(basis) == m:
                break
        frame = np.array(basis[1:])
        # second fundamental form w.r.t. inward normal: -Hess f / |grad f|
        hAB = -np.einsum("Ai,Bj,ij->AB", frame, frame, hessf[b]) / nrm
        H = np.trace(hAB) / (m - 1)
        h0 = hAB - H * np.eye(m - 1)
        # quadratic defect
        dbar2 = np.einsum("ijk,abc,ia,jb,kc->", dbar[b], dbar[b],
                          ginv[b], ginv[b], ginv[b])
        ric_f = ricp[b] @ grad                       # Ric^phi(grad f, .)_i
        ric_f_up = ginv[b] @ ric_f
        ric_ff = float(grad @ ricp[b] @ grad)
        lhs = (m - 2) ** 2 / (2 * nrm2) * dbar2
        rhs = (np.sum(h0 * h0) * nrm2
               + ((m - 2) / (m - 1)) * (float(ric_f @ ric_f_up) / nrm2
                                        - ric_ff ** 2 / nrm2 ** 2))
        out.append(LevelSetFrame(
            point=pts[b], normal=e_m, frame=frame, second_form=hAB,
            mean_curvature=float(H), traceless_form=h0,
            grad_norm=float(nrm), a2_defect=float(lhs - rhs)))
    return out[0] if single else out


def _df_up(geo):
    return geo.df_up


# ---- warped-product radial ODE -------------------------------------------------


def warped_split_residual(scene, r_values, order=3):
    """Defect of the radial ODE of a warped product I x_rho Sigma.

    The profiles rho(r), f(r) and the cross-section scene must be stored in
    ``scene.params`` as ``rho_profile``, ``f_profile`` and ``sigma_scene``.
    """
    params = scene.params
    for key in ("rho_profile", "f_profile"):
        if key not in params:
            raise MissingProfile(f"scene lacks radial profile {key!r}")
    rho_fn, f_fn = params["rho_profile"], params["f_profile"]
    m = scene.dim
    eta = params.get("eta", scene.eta)
    sigma = params.get("sigma_scene")
    if sigma is None:
        raise MissingProfile("scene lacks the cross-section 'sigma_scene'")
    rng = np.random.default_rng(0)
    sp = sigma.sample_points(4, rng)
    sgeo = Geometry(sigma, sp, 3)
    s_sigma_vals = values(sgeo.s_phi)
    s_sigma = float(np.mean(s_sigma_vals))

    r = np.atleast_1d(np.asarray(r_values, dtype=float))
    sp1 = jet_space(1, order)
    rj = Jet.variable(sp1, 0, r)
    rho = rho_fn(rj)
    fj = f_fn(rj)
    if not isinstance(rho, Jet):
        rho = Jet.constant(sp1, np.broadcast_to(float(rho), r.shape).copy())
    if not isinstance(fj, Jet):
        fj = Jet.constant(sp1, np.broadcast_to(float(fj), r.shape).copy())
    rho_v = rho.value
    drho = jpartial(rho, 0)
    rho1 = drho.value
    rho2 = jpartial(drho, 0).value
    dfj = jpartial(fj, 0)
    f1 = dfj.value
    f2 = jpartial(dfj, 0).value
    if np.any(np.abs(rho_v) <= EPS_REG):
        raise MissingProfile("warping profile vanishes at a sample radius")
    defect = (s_sigma / rho_v ** 2
              + (m - 1) * (m - 2) * (rho2 / rho_v - (rho1 / rho_v) ** 2)
              - (m - 1) * f2 + eta * (m - 1) * f1 ** 2
              + (m - 1) * f1 * rho1 / rho_v)
    return defect if defect.size > 1 else float(defect[0])


# ---- divergence-identity suite -------------------------------------------------


def _hyp_eta_system(scene, geo):
    res = system_residual(scene, geo.points, which="eta_system",
                          order=min(geo.order, 3))
    return res.max_norm


def _hyp_gianny(scene, geo):
    res = system_residual(scene, geo.points, which="gianny",
                          order=min(geo.order, 3))
    return res.max_norm


def _hyp_u_positive(scene, geo):
    uv = values(geo.u)
    return 0.0 if np.min(uv) > EPS_REG else 1.0


def _hyp_antisymmetric(scene, geo):
    om = _omega(geo)
    return _sup(values(om + np.swapaxes(om, 0, 1)))


def _hyp_u_harmonic(scene, geo):
    res = geo.tau - geo.dU_up / scene.alpha
    return _sup(values(res))


def _hyp_eigenvector(scene, geo):
    """Component of Ric^phi(grad u)# orthogonal to grad u."""
    duu = _du_up(geo)
    ric_f = np.tensordot(geo.ric_phi, duu, axes=([1], [0]))
    ric_f_up = np.tensordot(geo.ginv, ric_f, axes=([1], [0]))
    n2 = asjet(np.tensordot(geo.du, duu, axes=([0], [0])))
    coef = asjet(np.tensordot(ric_f, duu, axes=([0], [0]))) / n2
    orth = ric_f_up - smul(coef, duu)
    return _sup(values(orth))


def _hyp_conformal(scene, geo):
    X = _conformal_field(geo)
    dX = geo.covd(X)
    gamma = asjet(np.tensordot(geo.ginv, dX, axes=([0, 1], [0, 1])))
    res = dX + np.swapaxes(dX, 0, 1) - smul(2.0 * gamma / geo.m, geo.g)
    return _sup(values(res))


def _hyp_eta_generic(scene, geo):
    m = geo.m
    bad = abs(scene.eta + 1.0 / (m - 2)) < 1e-12
    return 1.0 if bad else 0.0


def _hyp_eta_nonzero(scene, geo):
    return 1.0 if abs(scene.eta) < 1e-12 else 0.0


def _omega(geo):
    fn = geo.scene.fields.get("omega")
    if fn is None:
        raise MissingField("scene lacks the 2-form field 'omega'")
    comp = fn(geo.x)
    m = geo.m
    om = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(m):
            entry = comp[i][j]
            om[i, j] = entry if isinstance(entry, Jet) else Jet.constant(
                geo.space, np.broadcast_to(float(entry),
                                           (geo.points.shape[0],)).copy())
    return om


def _conformal_field(geo):
    fn = geo.scene.fields.get("X")
    if fn is None:
        return geo.du  # gradient of u, covariant components
    comp = fn(geo.x)
    X = np.empty((geo.m,), dtype=object)
    for i in range(geo.m):
        X[i] = comp[i]
    return X


def _w_field(geo):
    fld = geo.scene.fields.get("w")
    if fld is None:
        raise MissingField("scene lacks the auxiliary field 'w'")
    fn = fld.fn if hasattr(fld, "fn") else fld
    val = fn(geo.x)
    if not isinstance(val, Jet):
        val = Jet.constant(geo.space, np.broadcast_to(
            float(val), (geo.points.shape[0],)).copy())
    return val


def _tau2(geo):
    """Bi-tension components: Delta tau^a - NRiem correction."""
    dtau2 = geo.covd(geo.dtau, map_axes=(0,))
    lap_tau = np.tensordot(dtau2, geo.ginv, axes=([1, 2], [0, 1]))
    nriem_up = np.tensordot(geo.hinv_x, geo.nriem_x, axes=([1], [0]))
    corr = np.einsum("abcd,bs,ct,st,d->a", nriem_up, geo.dphi, geo.dphi,
                     geo.ginv, geo.tau)
    return lap_tau - corr


# -- identity builders: each returns (lhs values, rhs values) --


def _id_two_form(geo):
    om = _omega(geo)
    d1 = np.tensordot(geo.covd(om), geo.ginv, axes=([1, 2], [0, 1]))
    lhs = asjet(np.tensordot(geo.covd(d1), geo.ginv, axes=([0, 1], [0, 1])))
    return values(lhs), np.zeros_like(values(lhs))


def _id_divY(geo):
    scene = geo.scene
    m, alpha, eta = geo.m, scene.alpha, scene.eta
    c = 1.0 + eta * (m - 2)
    upull = _u_pull(geo)
    fterm = asjet(np.tensordot(upull, geo.df_up, axes=([0], [0])))
    Y = (c * np.einsum("i,j,ijk->k", geo.df_up, geo.df_up, geo.dbar_phi)
         - (smul(fterm, geo.df) - smul(geo.df_norm2, upull)) / (m - 1))
    lhs = _div_vec(geo, Y)

    dbar2 = _norm2_cov(geo, geo.dbar_phi)
    bff = asjet(np.einsum("ij,i,j->", geo.b_phi, geo.df_up, geo.df_up))
    t3 = -asjet(np.einsum("a,aij,i,j->", geo.dU, geo.nabla_dphi,
                          geo.df_up, geo.df_up))
    t4 = asjet(np.einsum("ab,ai,bj,i,j->", geo.hess_U, geo.dphi, geo.dphi,
                         geo.df_up, geo.df_up))
    dn2 = geo.covd_scalar(geo.df_norm2)
    t5 = asjet(np.einsum("k,ks,s->", upull, geo.ginv, dn2)) / (2 * (m - 1))
    t6 = -(geo.lap_f / (m - 1)) * fterm
    t7 = (alpha / (m - 2)) * geo.df_norm2 * geo.tau_norm2
    V = geo.tau - geo.dU_up / alpha
    vnorm = asjet(np.einsum("ab,a,b->", geo.h_x, V, V))
    t8 = alpha * eta * geo.df_norm2 * vnorm
    rhs = (0.5 * c * (m - 2) * dbar2 + (m - 2) * bff
           + t3 + t4 + t5 + t6 + t7 + t8)
    return values(lhs), values(rhs)


def _id_divZ_shen(geo):
    scene = geo.scene
    m, alpha = geo.m, scene.alpha
    mu, p, U = _mu(geo), _p(geo), geo.U
    V = (m - 2.0) * mu + m * p
    dV = geo.covd_scalar(V)
    upull = _u_pull(geo)
    duu = _du_up(geo)
    cm = m * (m - 1.0)
    Z = (2.0 * np.tensordot(geo.hess_u, duu, axes=([0], [0]))
         - smul(geo.u * geo.u / cm, dV)
         - smul(2.0 * geo.u * V / cm, geo.du)
         + smul(2.0 * geo.u * geo.u / cm, upull)
         + smul(4.0 * U / cm, smul(geo.u, geo.du)))
    Z = smul(1.0 / geo.u, Z)
    lhs = _div_vec(geo, Z)

    hess2 = _norm2_cov(geo, geo.hess_u)
    r1 = (2.0 / geo.u) * (hess2 - geo.lap_u * geo.lap_u / m)
    r2 = ((2 * m - 3.0) / cm) * asjet(
        np.tensordot(dV, duu, axes=([0], [0])))
    trH = asjet(np.einsum("ab,ai,bj,ij->", geo.hess_U, geo.dphi, geo.dphi,
                          geo.ginv))
    r3 = (2.0 * geo.u / cm) * trH
    un2 = asjet(np.einsum("ab,a,b->", geo.hinv_x, geo.dU, geo.dU))
    r4 = (2.0 * geo.u / (alpha * m * m * (m - 1))) * un2
    lapV = asjet(np.tensordot(geo.covd(dV), geo.ginv, axes=([0, 1], [0, 1])))
    r5 = -(geo.u / cm) * lapV
    dphi_du = np.tensordot(geo.dphi, duu, axes=([1], [0]))      # dphi(grad u)^a
    hUd = asjet(np.tensordot(geo.dU, dphi_du, axes=([0], [0])))
    dpn2 = asjet(np.einsum("ab,a,b->", geo.h_x, dphi_du, dphi_du))
    r6 = ((2.0 / (alpha * m * m)) * geo.u * un2
          - (4.0 / m) * hUd + (2.0 * alpha / geo.u) * dpn2)
    du_n2 = asjet(np.tensordot(geo.du, duu, axes=([0], [0])))
    r7 = (2.0 / geo.u) * (mu + p) * du_n2
    rhs = r1 + r2 + r3 + r4 + r5 + r6 + r7
    return values(lhs), values(rhs)


def _id_divX_fp(geo):
    scene = geo.scene
    m, alpha = geo.m, scene.alpha
    w = _w_field(geo)
    dw = geo.covd_scalar(w)
    hess_w = geo.covd(dw)
    lap_w = asjet(np.tensordot(geo.ginv, hess_w, axes=([0, 1], [0, 1])))
    duu = _du_up(geo)
    dwu = np.tensordot(geo.ginv, dw, axes=([1], [0]))
    X = (smul(geo.u, np.tensordot(hess_w, dwu, axes=([0], [0])))
         + smul(w * w / geo.u, np.tensordot(geo.hess_u, duu, axes=([0], [0])))
         - smul(w, np.tensordot(geo.hess_u, dwu, axes=([0], [0])))
         - smul(w, np.tensordot(hess_w, duu, axes=([0], [0])))
         + (smul(geo.u, dw) - smul(w, geo.du)) / m)
    lhs = _div_vec(geo, X)

    r = w / geo.u
    Dv = dw - smul(r, geo.du)                             # covariant
    Dvu = dwu - smul(r, duu)
    hw0 = hess_w - smul(lap_w / m, geo.g)
    hu0 = geo.hess_u - smul(geo.lap_u / m, geo.g)
    diff = hw0 - smul(r, hu0)
    a1 = geo.u * _norm2_cov(geo, diff)
    s = lap_w - r * geo.lap_u
    a2 = (geo.u / m) * s * (s + 1.0)
    Q = (geo.hess_u - smul(geo.lap_u / m, geo.g)
         - smul(geo.u, geo.ric_phi - smul(geo.s_phi / m, geo.g)))
    qvv = asjet(np.einsum("ij,i,j->", Q, Dvu, Dvu))
    dvn2 = asjet(np.tensordot(Dv, Dvu, axes=([0], [0])))
    a4 = -(1.0 / m) * dvn2 * (geo.lap_u - geo.s_phi * geo.u)
    dlw = geo.covd_scalar(lap_w)
    dlu = geo.covd_scalar(geo.lap_u)
    a5 = geo.u * asjet(np.tensordot(Dvu, dlw - smul(r, dlu),
                                    axes=([0], [0])))
    dphi_dv = np.tensordot(geo.dphi, Dvu, axes=([1], [0]))
    a6 = alpha * geo.u * asjet(np.einsum("ab,a,b->", geo.h_x,
                                         dphi_dv, dphi_dv))
    rhs = a1 + a2 - qvv + a4 + a5 + a6
    return values(lhs), values(rhs)


def _id_divZ_boundary(geo):
    scene = geo.scene
    m, alpha, eta = geo.m, scene.alpha, scene.eta
    ricup = np.einsum("ts,kl,sl->tk", geo.ginv, geo.ginv, geo.ric_phi)
    # Z assembly
    M = np.einsum("tk,tikj->ij", ricup, geo.w_phi)
    t1 = smul(geo.u, _div_last(geo, M))
    Ctki = np.einsum("tk,tki->i", ricup, geo.c_phi)
    t2 = -((m - 4.0) / (m - 2)) * smul(geo.u, Ctki)
    t3 = 2.0 * alpha * smul(geo.u, np.einsum(
        "ab,ai,bjk,jk->i", geo.h_x, geo.dphi, geo.nabla_dphi, ricup))
    dps = geo.covd(geo.phistar_h)
    t4 = -alpha * smul(geo.u, np.einsum("tk,tik->i", ricup, dps))
    q = np.einsum("ab,a,bt->t", geo.h_x, geo.tau, geo.dphi)  # phi^b_ss phi^b_t
    psh_up = np.tensordot(geo.ginv, geo.phistar_h, axes=([1], [0]))  # (ph)^t_i
    dsup = np.tensordot(geo.ginv, geo.ds_phi, axes=([1], [0]))
    t5 = -alpha * smul(geo.u, 0.5 * np.einsum("t,ti->i", dsup,
                                              geo.phistar_h)
                       - alpha * np.einsum("t,ti->i",
                                           np.tensordot(geo.ginv, q,
                                                        axes=([1], [0])),
                                           geo.phistar_h))
    K = smul(geo.u, np.einsum("a,aik->ik", geo.dU, geo.nabla_dphi)
             - np.einsum("ab,bk,ai->ik", geo.hess_U, geo.dphi, geo.dphi)
             - (alpha / (m - 2)) * smul(geo.tau_norm2, geo.g))
    t6 = _div_last(geo, K)
    Z = t1 + t2 + t3 + t4 + t5 + t6
    lhs = _div_vec(geo, Z)

    # rhs assembly
    duu = _du_up(geo)
    uhu = np.tensordot(duu, geo.hess_u, axes=([0], [0]))   # u_t u_{tj}
    D = (np.einsum("ik,j->ijk", geo.hess_u, geo.du)
         - np.einsum("ij,k->ijk", geo.hess_u, geo.du)
         + (np.einsum("j,ik->ijk", uhu, geo.g)
            - np.einsum("k,ij->ijk", uhu, geo.g)) / (m - 1)
         + smul(geo.lap_u / (m - 1),
                np.einsum("k,ij->ijk", geo.du, geo.g)
                - np.einsum("j,ik->ijk", geo.du, geo.g))) / (m - 2)
    uW = np.tensordot(duu, geo.w_phi, axes=([0], [0]))     # u_t W_{tijk}
    Dup = D
    for s in range(3):
        Dup = np.moveaxis(np.tensordot(Dup, geo.ginv, axes=([0], [0])), -1, 2)
    dric = geo.dric_phi
    dric_up = dric
    for s in range(3):
        dric_up = np.moveaxis(np.tensordot(dric_up, geo.ginv,
                                           axes=([0], [0])), -1, 2)
    eu2 = (eta * geo.u) * (eta * geo.u)
    r1 = (-asjet(np.tensordot(uW, Dup, axes=([0, 1, 2], [0, 1, 2])))
          / (2.0 * eu2)
          - asjet(np.tensordot(uW, dric_up, axes=([0, 1, 2], [0, 1, 2]))))
    d2 = _norm2_cov(geo, D)
    r2 = -(1.0 + eta * (m - 2)) / (2.0 * (eta * geo.u) ** 3) * d2
    cikj = np.transpose(geo.c_phi, (0, 2, 1))              # C_{ikj} as [i,j,k]
    g1 = np.tensordot(geo.covd(cikj), geo.ginv, axes=([1, 3], [0, 1]))  # over j
    g2 = np.tensordot(geo.covd(g1), geo.ginv, axes=([1, 2], [0, 1]))    # over k
    g3 = asjet(np.tensordot(geo.covd(g2), geo.ginv, axes=([0, 1], [0, 1])))
    r3 = -geo.u * g3
    Vb = (np.einsum("a,ab,bi->i", geo.dU_up, geo.hess_U, geo.dphi) / alpha
          + np.einsum("ij,jk,k->i", geo.ric_phi, geo.ginv, _u_pull(geo)))
    r4 = ((m - 4.0) / (m - 2)) * geo.u * _div_vec(geo, Vb)
    upull = _u_pull(geo)
    B1 = (m / ((m - 1.0) * (m - 2))) * smul(geo.s_phi, upull)
    B2 = 2.0 * alpha * np.einsum("j,jk,ki->i", upull, geo.ginv,
                                 geo.phistar_h)
    B3 = -(alpha / 2.0) * ((m - 2.0) / (m - 1)) * np.einsum(
        "ij,jk,k->i", geo.phistar_h, geo.ginv, geo.ds_phi)
    B4 = -2.0 * alpha * np.einsum("ab,ajk,jk,bi->i", geo.h_x,
                                  geo.nabla_dphi, ricup, geo.dphi)
    tau2 = _tau2(geo)
    B5 = -alpha * np.einsum("ab,a,bi->i", geo.h_x, tau2, geo.dphi)
    r5 = geo.u * _div_vec(geo, B1 + B2 + B3 + B4 + B5)
    rhs = r1 + r2 + r3 + r4 + r5
    return values(lhs), values(rhs)


def _id_cotton_fundamental(geo):
    scene = geo.scene
    m, eta = geo.m, scene.eta
    c = (m - 2.0) * eta + 1.0
    lam = _lam(geo)
    cn2 = _norm2_cov(geo, geo.c_phi)
    lhs = cn2 / (2.0 * c)

    dc = geo.covd(geo.c_phi)
    div_c = np.tensordot(dc, geo.ginv, axes=([2, 3], [0, 1]))  # C_{tj k,k}->[t,j]
    div2 = np.tensordot(geo.covd(div_c), geo.ginv, axes=([1, 2], [0, 1]))
    r1 = asjet(np.tensordot(geo.df_up, div2, axes=([0], [0])))
    cup = geo.c_phi
    for s in range(3):
        cup = np.moveaxis(np.tensordot(cup, geo.ginv, axes=([0], [0])), -1, 2)
    fW = np.tensordot(geo.df_up, geo.w_phi, axes=([0], [0]))   # f_t W_{ptjk}? slot
    # f_t W_{ptjk}: contract slot 1 of W with f
    fW2 = np.tensordot(geo.df_up, np.swapaxes(geo.w_phi, 0, 1),
                       axes=([0], [0]))                        # -> [p,j,k]
    r2 = -(eta * (m - 2.0) / (2.0 * c)) * asjet(
        np.tensordot(fW2, cup, axes=([0, 1, 2], [0, 1, 2])))
    ctr = np.tensordot(geo.ginv, geo.c_phi, axes=([0, 1], [0, 1]))  # C_{ttk}
    dlam = geo.covd_scalar(lam)
    vec = (dlam - geo.ds_phi / (2.0 * (m - 1)) - eta * smul(lam, geo.df))
    r3 = asjet(np.einsum("k,ks,s->", vec, geo.ginv, ctr)) / c
    fric = np.tensordot(geo.df_up, geo.ric_phi, axes=([0], [0]))
    vec2 = fric - smul(geo.s_phi / (m - 1.0), geo.df)
    r4 = -(eta / c) * asjet(np.einsum("k,ks,s->", vec2, geo.ginv, ctr))
    rhs = r1 + r2 + r3 + r4
    return values(lhs), values(rhs)


def _id_bochner(geo):
    e = geo.dphi_norm2
    hess_e = geo.covd(geo.covd_scalar(e))
    lhs = 0.5 * asjet(np.tensordot(geo.ginv, hess_e, axes=([0, 1], [0, 1])))
    nd2 = asjet(np.einsum("ab,aij,bkl,ik,jl->", geo.h_x, geo.nabla_dphi,
                          geo.nabla_dphi, geo.ginv, geo.ginv))
    t2 = asjet(np.einsum("ab,ai,bj,ij->", geo.h_x, geo.dphi, geo.dtau,
                         geo.ginv))
    t3 = asjet(np.einsum("ABCD,Ai,Bk,Cl,Dj,ij,kl->", geo.nriem_x, geo.dphi,
                         geo.dphi, geo.dphi, geo.dphi, geo.ginv, geo.ginv))
    psh_upup = np.einsum("ti,ts,ij->sj", geo.phistar_h, geo.ginv, geo.ginv)
    t4 = asjet(np.einsum("ti,ti->", geo.ric, psh_upup))
    rhs = nd2 + t2 + t3 + t4
    return values(lhs), values(rhs)


def _id_hess_gamma(geo):
    scene = geo.scene
    m, alpha = geo.m, scene.alpha
    X = _conformal_field(geo)
    dX = geo.covd(X)
    gamma = asjet(np.tensordot(geo.ginv, dX, axes=([0, 1], [0, 1])))
    lhs = geo.covd(geo.covd_scalar(gamma))

    Xup = np.tensordot(geo.ginv, X, axes=([1], [0]))
    dS_X = asjet(np.tensordot(geo.ds_phi, Xup, axes=([0], [0])))
    lie_ric = _lie_sym2(geo, geo.ric_phi, X)
    lie_ph = _lie_sym2(geo, geo.phistar_h, X)
    tr_lie = asjet(np.tensordot(geo.ginv, lie_ph, axes=([0, 1], [0, 1])))
    rhs = (smul(geo.s_phi * gamma / ((m - 1.0) * (m - 2)), geo.g)
           + smul(m * dS_X / (2.0 * (m - 1) * (m - 2)), geo.g)
           - (m / (m - 2.0)) * lie_ric
           - (m * alpha / (m - 2.0)) * (
               lie_ph - smul(tr_lie / (2.0 * (m - 1)), geo.g)))
    return values(lhs), values(rhs)


def _id_weyl_div3(geo):
    m, alpha = geo.m, geo.scene.alpha
    d1 = np.tensordot(geo.covd(geo.w_phi), geo.ginv,
                      axes=([0, 4], [0, 1]))               # W_{tijk,t} -> [i,j,k]
    d2 = np.tensordot(geo.covd(d1), geo.ginv, axes=([2, 3], [0, 1]))  # over k
    d3 = np.tensordot(geo.covd(d2), geo.ginv, axes=([1, 2], [0, 1]))  # over j
    lhs = asjet(np.tensordot(geo.covd(d3), geo.ginv, axes=([0, 1], [0, 1])))

    e2 = np.tensordot(geo.covd(geo.c_phi), geo.ginv, axes=([2, 3], [0, 1]))
    e1 = np.tensordot(geo.covd(e2), geo.ginv, axes=([1, 2], [0, 1]))
    e0 = asjet(np.tensordot(geo.covd(e1), geo.ginv, axes=([0, 1], [0, 1])))
    r1 = -((m - 3.0) / (m - 2)) * e0
    Q = np.einsum("ab,aj,btk->jtk", geo.h_x, geo.dphi, geo.nabla_dphi)
    Qup = Q                                               # [j, t, k]
    for s in range(3):
        Qup = np.moveaxis(np.tensordot(Qup, geo.ginv, axes=([0], [0])), -1, 2)
    V = np.einsum("tijk,jtk->i", geo.riemann, Qup)
    r2 = alpha * _div_vec(geo, V)
    ctr = np.tensordot(geo.ginv, geo.c_phi, axes=([0, 1], [0, 1]))  # C_{tts}
    Mv = np.einsum("si,st,t->i",
                   geo.ric_phi + alpha * geo.phistar_h, geo.ginv, ctr)
    r3 = _div_vec(geo, Mv) / (m - 2.0)
    rhs = r1 + r2 + r3
    return values(lhs), values(rhs)


def _id_bach_div(geo):
    m, alpha = geo.m, geo.scene.alpha
    lhs = (m - 2.0) * _div_last(geo, geo.b_phi)

    ricup = np.einsum("ts,kl,sl->tk", geo.ginv, geo.ginv, geo.ric_phi)
    r_c = np.einsum("jk,jki->i", ricup, geo.c_phi)
    q = np.einsum("ab,a,bj->j", geo.h_x, geo.tau, geo.dphi)   # phi^b_tt phi^b_j
    tau_dtau = np.einsum("ab,a,bi->i", geo.h_x, geo.tau, geo.dtau)
    tau_ric = np.einsum("ij,jk,k->i", geo.ric_phi, geo.ginv, q)
    t1 = ((m - 4.0) / (m - 2)) * (r_c + alpha * (tau_dtau + tau_ric))
    t2 = alpha * ((m / ((m - 1.0) * (m - 2))) * smul(geo.s_phi, q)
                  + 2.0 * alpha * np.einsum("j,jk,ki->i", q, geo.ginv,
                                            geo.phistar_h))
    t3 = -(alpha / 2.0) * ((m - 2.0) / (m - 1)) * np.einsum(
        "ij,jk,k->i", geo.phistar_h, geo.ginv, geo.ds_phi)
    t4 = -2.0 * alpha * np.einsum("ab,ajk,jk,bi->i", geo.h_x,
                                  geo.nabla_dphi, ricup, geo.dphi)
    tau2 = _tau2(geo)
    t5 = -alpha * np.einsum("ab,a,bi->i", geo.h_x, tau2, geo.dphi)
    rhs = t1 + t2 + t3 + t4 + t5
    return values(lhs), values(rhs)


def _id_conservation(geo):
    lhs = 0.5 * smul(geo.u, geo.ds_phi)
    rhs = smul(geo.u, _u_pull(geo))
    return values(lhs), values(rhs)


_IDENTITIES = {
    "two_form": (_id_two_form, 4, [("omega antisymmetric", _hyp_antisymmetric)]),
    "divY": (_id_divY, 5, [("eta-system holds", _hyp_eta_system)]),
    "divZ_shen": (_id_divZ_shen, 4, [("fluid system holds", _hyp_gianny)]),
    "divX_fp": (_id_divX_fp, 4, [("u positive", _hyp_u_positive)]),
    "divZ_boundary": (_id_divZ_boundary, 6,
                      [("u-system holds", _hyp_gianny),
                       ("map potential-harmonic", _hyp_u_harmonic),
                       ("grad u eigenvector of phi-Ricci", _hyp_eigenvector),
                       ("eta nonzero", _hyp_eta_nonzero),
                       ("eta generic", _hyp_eta_generic)]),
    "cotton_fundamental": (_id_cotton_fundamental, 6,
                           [("eta-system holds", _hyp_eta_system),
                            ("eta generic", _hyp_eta_generic)]),
    "bochner": (_id_bochner, 5, []),
    "hess_gamma": (_id_hess_gamma, 6, [("X conformal", _hyp_conformal)]),
    "weyl_div3": (_id_weyl_div3, 6, []),
    "bach_div": (_id_bach_div, 6, []),
    "conservation": (_id_conservation, 4,
                     [("fluid system holds", _hyp_gianny)]),
}

IDENTITY_IDS = sorted(_IDENTITIES)


def divergence_identity(id_, scene, points, order=None,
                        enforce_hypotheses=True, hypothesis_tol=1e-6):
    """Evaluate one divergence identity: lhs, rhs, defect, hypotheses.

    The left side is always the direct divergence of the defining closure,
    computed with one extra jet level; the right side is the independent
    closed form.
    """
    if id_ not in _IDENTITIES:
        raise UnknownCheckId(f"unknown identity {id_!r}; "
                             f"choose from {IDENTITY_IDS}")
    builder, default_order, hyps = _IDENTITIES[id_]
    geo = Geometry(scene, points, order or default_order)
    hyp_report = {}
    for name, fn in hyps:
        res = float(fn(scene, geo))
        hyp_report[name] = res
        if enforce_hypotheses and res > hypothesis_tol:
            raise HypothesisUnmet(
                f"identity {id_!r}: hypothesis {name!r} fails "
                f"(residual {res:.3e})")
    lhs, rhs = builder(geo)
    defect = np.asarray(lhs, dtype=float) - np.asarray(rhs, dtype=float)
    return {"id": id_, "lhs": np.asarray(lhs, dtype=float),
            "rhs": np.asarray(rhs, dtype=float), "defect": defect,
            "hypotheses": hyp_report}
