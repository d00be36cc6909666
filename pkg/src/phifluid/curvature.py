"""Curvature engine: classical, map-coupled, and phi-curvature tensors.

Everything is computed in coordinate-basis components with jets as entries,
so covariant derivatives of any assembled tensor are available by one more
coefficient extraction.  The paper-style orthonormal-frame formulas are
translated by contracting repeated indices with g^{-1} (h^{-1} on the
target) and replacing delta_ij by g_ij.

Sign conventions (pinned, see tests): Riem_{ijkl} stores
g(R(e_i, e_j) e_l, e_k), so that on the unit sphere
Riem_{ijkl} = g_ik g_jl - g_il g_jk and Ric_{ij} = g^{kl} Riem_{kilj}
= (m-1) g_ij > 0.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionTooSmall, MissingField
from .jets import Jet, jet_space, partial as jpartial
from .scene import Scene
from .tensors import inv_matrix, kulkarni_nomizu, otensor, values


def compose(fjet, dys, xspace):
    """Evaluate a target-space jet at map components given as base-space jets.

    ``dys`` are the nilpotent parts phi^a(x) - phi^a(x0) (zero constant term).
    """
    sp = fjet.space
    batch = max([1] + [d.batch for d in dys])
    res = Jet.constant(xspace, np.broadcast_to(fjet.c[0], (batch,)).copy())
    powers = {}
    eff = fjet.eff
    for idx, mono in enumerate(sp.monomials):
        deg = sum(mono)
        if deg == 0 or deg > fjet.eff:
            continue
        if mono not in powers:
            v = next(k for k in range(sp.nvars) if mono[k] > 0)
            parent = list(mono)
            parent[v] -= 1
            parent = tuple(parent)
            if sum(parent) == 0:
                powers[mono] = dys[v]
            else:
                powers[mono] = powers[parent] * dys[v]
        term = powers[mono] * fjet.c[idx]
        eff = min(eff, term.eff)
        res = res + term
    res.eff = min(res.eff, eff)
    return res


def tensor_map(fn, t):
    out = np.empty(t.shape, dtype=object)
    for idx in np.ndindex(t.shape):
        out[idx] = fn(t[idx])
    return out


def asjet(x):
    """Unwrap the 0-d object array produced by full contractions."""
    if isinstance(x, np.ndarray) and x.ndim == 0:
        return x.item()
    return x


def smul(s, t):
    """Scalar (Jet) times tensor, elementwise."""
    return tensor_map(lambda e: s * e, t)


class Geometry:
    """All curvature quantities of a scene at a batch of points, jet-valued.

    ``order`` is the jet truncation order of the metric components; every
    derivative taken while assembling tensors consumes one order.
    """

    def __init__(self, scene: Scene, points, order):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        scene.chart.require(points)
        self.scene = scene
        self.points = points
        self.m = scene.dim
        self.order = order
        self.space = jet_space(self.m, order)
        self.x = [Jet.variable(self.space, i, points[:, i])
                  for i in range(self.m)]

    # ---- generic differential operators ---------------------------------

    def partial_tensor(self, t):
        """d_k applied elementwise; new last axis is the derivative index."""
        out = np.empty(t.shape + (self.m,), dtype=object)
        for idx in np.ndindex(t.shape):
            entry = t[idx]
            for k in range(self.m):
                out[idx + (k,)] = (jpartial(entry, k)
                                   if isinstance(entry, Jet) else 0.0)
        return out

    def covd(self, t, map_axes=()):
        """Covariant derivative; the derivative index is appended last.

        Axes listed in ``map_axes`` are contravariant target(N) indices and
        receive pullback-connection corrections; all other axes are covariant
        base indices.
        """
        out = self.partial_tensor(t)
        rank = t.ndim
        for s in range(rank):
            if s in map_axes:
                corr = np.tensordot(t, self.ngam_dphi, axes=([s], [1]))
                corr = np.moveaxis(corr, -2, s)
                out = out + corr
            else:
                corr = np.tensordot(t, self.gamma, axes=([s], [0]))
                corr = np.moveaxis(corr, -2, s)
                out = out - corr
        return out

    def covd_scalar(self, jet):
        out = np.empty((self.m,), dtype=object)
        for k in range(self.m):
            out[k] = jpartial(jet, k)
        return out

    def trace(self, t, a, b):
        """Contract two covariant slots with g^{-1}."""
        tt = np.tensordot(t, self.ginv, axes=([a, b], [0, 1]))
        return tt

    def raise_slot(self, t, a):
        tt = np.tensordot(t, self.ginv, axes=([a], [0]))
        return np.moveaxis(tt, -1, a)

    # ---- base geometry ----------------------------------------------------

    @cached_property
    def g(self):
        comp = self.scene.metric(self.x)
        g = otensor((self.m, self.m))
        for i in range(self.m):
            for j in range(self.m):
                g[i, j] = comp[i][j]
        return g

    @cached_property
    def ginv(self):
        return inv_matrix(self.g)

    @cached_property
    def gamma(self):
        """gamma[p, i, j] = Gamma^p_ij."""
        dg = self.partial_tensor(self.g)  # dg[i,j,k] = d_k g_ij
        low = (np.moveaxis(dg, (0, 1, 2), (1, 2, 0))
               + np.moveaxis(dg, (0, 1, 2), (0, 2, 1))
               - dg)  # low[i,j,s] = d_i g_js + d_j g_is - d_s g_ij
        return 0.5 * np.moveaxis(np.tensordot(low, self.ginv,
                                              axes=([2], [0])), -1, 0)

    @cached_property
    def riemann(self):
        """Riem_{ijkl}; see module docstring for the sign convention."""
        dgam = self.partial_tensor(self.gamma)  # dgam[p,j,q,i] = d_i G^p_jq
        # F[p,q,i,j] = (R(e_i,e_j) e_q)^p
        F = (np.moveaxis(dgam, (0, 1, 2, 3), (0, 3, 1, 2))
             - np.moveaxis(dgam, (0, 1, 2, 3), (0, 2, 1, 3))
             + np.einsum("pis,sjq->pqij", self.gamma, self.gamma)
             - np.einsum("pjs,siq->pqij", self.gamma, self.gamma))
        return np.einsum("pk,plij->ijkl", self.g, F)

    @cached_property
    def ric(self):
        return np.tensordot(self.ginv, self.riemann, axes=([0, 1], [0, 2]))

    @cached_property
    def scal(self):
        return asjet(np.tensordot(self.ginv, self.ric, axes=([0, 1], [0, 1])))

    # ---- scalar fields ----------------------------------------------------

    @cached_property
    def u(self):
        return self.scene.u_fn()(self.x)

    @cached_property
    def du(self):
        return self.covd_scalar(self.u)

    @cached_property
    def hess_u(self):
        return self.covd(self.du)

    @cached_property
    def lap_u(self):
        return asjet(np.tensordot(self.ginv, self.hess_u, axes=([0, 1], [0, 1])))

    @cached_property
    def f(self):
        return self.scene.f_fn()(self.x)

    @cached_property
    def df(self):
        return self.covd_scalar(self.f)

    @cached_property
    def hess_f(self):
        return self.covd(self.df)

    @cached_property
    def lap_f(self):
        return asjet(np.tensordot(self.ginv, self.hess_f, axes=([0, 1], [0, 1])))

    @cached_property
    def df_up(self):
        return np.tensordot(self.ginv, self.df, axes=([1], [0]))

    @cached_property
    def df_norm2(self):
        return asjet(np.tensordot(self.df, self.df_up, axes=([0], [0])))

    # ---- map quantities ----------------------------------------------------

    @cached_property
    def n(self):
        return self.scene.mapspec.n

    @cached_property
    def phi(self):
        comp = self.scene.mapspec.components(self.x)
        out = np.empty((self.n,), dtype=object)
        for a in range(self.n):
            val = comp[a]
            out[a] = val if isinstance(val, Jet) else Jet.constant(self.space, val)
        return out

    @cached_property
    def _target(self):
        """Target-space geometry at phi(x), later composed into base jets."""
        y0 = np.stack([jet.value for jet in self.phi], axis=1)
        yspace = jet_space(self.n, self.order)
        y = [Jet.variable(yspace, a, y0[:, a]) for a in range(self.n)]
        comp = self.scene.mapspec.target_metric(y)
        h = otensor((self.n, self.n))
        for a in range(self.n):
            for b in range(self.n):
                entry = comp[a][b]
                h[a, b] = entry if isinstance(entry, Jet) else Jet.constant(yspace, entry)
        return yspace, y, h

    def _compose_target(self, t):
        """Compose a target-space jet tensor with phi into base-space jets."""
        dys = []
        for a in range(self.n):
            d = self.phi[a] + (-self.phi[a].value)
            dys.append(d)

        def cmp(entry):
            if isinstance(entry, Jet):
                return compose(entry, dys, self.space)
            return entry
        return tensor_map(cmp, np.asarray(t, dtype=object)) if isinstance(t, np.ndarray) else cmp(t)

    @cached_property
    def h_x(self):
        """Target metric evaluated along the map, as base-space jets."""
        comp = self.scene.mapspec.target_metric(self.phi)
        h = otensor((self.n, self.n))
        for a in range(self.n):
            for b in range(self.n):
                h[a, b] = comp[a][b]
        return h

    @cached_property
    def hinv_x(self):
        return inv_matrix(self.h_x)

    @cached_property
    def ngamma_x(self):
        """Target Christoffel symbols along the map: ngamma[a, b, c]."""
        yspace, y, h = self._target
        m_save, self_space = self.m, self.space
        # Build target Christoffels in the target space, then compose.
        dh = np.empty(h.shape + (self.n,), dtype=object)
        for idx in np.ndindex(h.shape):
            for k in range(self.n):
                dh[idx + (k,)] = jpartial(h[idx], k)
        hinv = inv_matrix(h)
        low = (np.moveaxis(dh, (0, 1, 2), (1, 2, 0))
               + np.moveaxis(dh, (0, 1, 2), (0, 2, 1))
               - dh)
        ngam = 0.5 * np.moveaxis(np.tensordot(low, hinv, axes=([2], [0])), -1, 0)
        return self._compose_target(ngam)

    @cached_property
    def nriem_x(self):
        """Target Riemann tensor (all-covariant) along the map."""
        yspace, y, h = self._target
        dh = np.empty(h.shape + (self.n,), dtype=object)
        for idx in np.ndindex(h.shape):
            for k in range(self.n):
                dh[idx + (k,)] = jpartial(h[idx], k)
        hinv = inv_matrix(h)
        low = (np.moveaxis(dh, (0, 1, 2), (1, 2, 0))
               + np.moveaxis(dh, (0, 1, 2), (0, 2, 1))
               - dh)
        ngam = 0.5 * np.moveaxis(np.tensordot(low, hinv, axes=([2], [0])), -1, 0)
        dgam = np.empty(ngam.shape + (self.n,), dtype=object)
        for idx in np.ndindex(ngam.shape):
            entry = ngam[idx]
            for k in range(self.n):
                dgam[idx + (k,)] = (jpartial(entry, k)
                                    if isinstance(entry, Jet) else 0.0)
        F = (np.moveaxis(dgam, (0, 1, 2, 3), (0, 3, 1, 2))
             - np.moveaxis(dgam, (0, 1, 2, 3), (0, 2, 1, 3))
             + np.einsum("pis,sjq->pqij", ngam, ngam)
             - np.einsum("pjs,siq->pqij", ngam, ngam))
        nriem = np.einsum("pk,plij->ijkl", h, F)
        return self._compose_target(nriem)

    @cached_property
    def dphi(self):
        """dphi[a, i] = d_i phi^a."""
        out = otensor((self.n, self.m))
        for a in range(self.n):
            for i in range(self.m):
                out[a, i] = jpartial(self.phi[a], i)
        return out

    @cached_property
    def ngam_dphi(self):
        """ngam_dphi[a, b, k] = NGamma^a_bc(phi) d_k phi^c."""
        return np.tensordot(self.ngamma_x, self.dphi, axes=([2], [0]))

    @cached_property
    def nabla_dphi(self):
        """Generalized second fundamental form (nabla dphi)^a_{ij}."""
        return self.covd(self.dphi, map_axes=(0,))

    @cached_property
    def tau(self):
        return np.tensordot(self.nabla_dphi, self.ginv, axes=([1, 2], [0, 1]))

    @cached_property
    def dtau(self):
        """dtau[a, j] = phi^a_{kkj} (pullback covariant derivative of tau)."""
        return self.covd(self.tau, map_axes=(0,))

    @cached_property
    def phistar_h(self):
        return np.einsum("ab,ai,bj->ij", self.h_x, self.dphi, self.dphi)

    @cached_property
    def dphi_norm2(self):
        return asjet(np.tensordot(self.ginv, self.phistar_h, axes=([0, 1], [0, 1])))

    @cached_property
    def tau_norm2(self):
        return asjet(np.einsum("ab,a,b->", self.h_x, self.tau, self.tau))

    @cached_property
    def tau_low(self):
        """tau with its target index lowered by h."""
        return np.tensordot(self.h_x, self.tau, axes=([1], [0]))

    # ---- potential U on the target -----------------------------------------

    @cached_property
    def U(self):
        if self.scene.potential is None:
            return Jet.constant(self.space, np.zeros(self.points.shape[0]))
        return self.scene.potential.fn(self.phi)

    @cached_property
    def _U_target(self):
        yspace, y, h = self._target
        if self.scene.potential is None:
            zero = Jet.constant(yspace, np.zeros(self.points.shape[0]))
            return yspace, zero, h
        return yspace, self.scene.potential.fn(y), h

    @cached_property
    def dU(self):
        """dU[a] = U_a (covector on N) along the map, base-space jets."""
        yspace, Uy, _ = self._U_target
        out = np.empty((self.n,), dtype=object)
        for a in range(self.n):
            out[a] = jpartial(Uy, a)
        return self._compose_target(out)

    @cached_property
    def hess_U(self):
        """Target Hessian of U along the map: hess_U[a, b] covariant."""
        yspace, Uy, h = self._U_target
        dU = np.empty((self.n,), dtype=object)
        for a in range(self.n):
            dU[a] = jpartial(Uy, a)
        dh = np.empty(h.shape + (self.n,), dtype=object)
        for idx in np.ndindex(h.shape):
            for k in range(self.n):
                dh[idx + (k,)] = jpartial(h[idx], k)
        hinv = inv_matrix(h)
        low = (np.moveaxis(dh, (0, 1, 2), (1, 2, 0))
               + np.moveaxis(dh, (0, 1, 2), (0, 2, 1))
               - dh)
        ngam = 0.5 * np.moveaxis(np.tensordot(low, hinv, axes=([2], [0])), -1, 0)
        hess = np.empty((self.n, self.n), dtype=object)
        for a in range(self.n):
            for b in range(self.n):
                hess[a, b] = jpartial(dU[a], b)
        corr = np.einsum("pab,p->ab", ngam, dU)
        hess = hess - corr
        return self._compose_target(hess)

    @cached_property
    def dU_up(self):
        return np.tensordot(self.hinv_x, self.dU, axes=([1], [0]))

    # ---- phi-curvatures -----------------------------------------------------

    def _need_m3(self, what):
        if self.m < 3:
            raise DimensionTooSmall(f"{what} requires m >= 3")

    @cached_property
    def ric_phi(self):
        return self.ric - self.scene.alpha * self.phistar_h

    @cached_property
    def s_phi(self):
        return self.scal - self.scene.alpha * self.dphi_norm2

    @cached_property
    def a_phi(self):
        self._need_m3("A^phi")
        return self.ric_phi - (1.0 / (2 * (self.m - 1))) * smul(
            self.s_phi, self.g)

    @cached_property
    def w_phi(self):
        self._need_m3("W^phi")
        return self.riemann - (1.0 / (self.m - 2)) * kulkarni_nomizu(
            self.a_phi, self.g)

    @cached_property
    def da_phi(self):
        return self.covd(self.a_phi)

    @cached_property
    def c_phi(self):
        """C^phi_{ijk} = A^phi_{ij,k} - A^phi_{ik,j}."""
        self._need_m3("C^phi")
        da = self.da_phi
        return da - np.swapaxes(da, 1, 2)

    @cached_property
    def dric_phi(self):
        return self.covd(self.ric_phi)

    @cached_property
    def ds_phi(self):
        return self.covd_scalar(self.s_phi)

    @cached_property
    def b_phi(self):
        """phi-Bach tensor from the literal component formula."""
        self._need_m3("B^phi")
        m, alpha = self.m, self.scene.alpha
        div_c = np.tensordot(self.covd(self.c_phi), self.ginv,
                             axes=([2, 3], [0, 1]))
        ric_phi_up = np.einsum("ts,kl,sl->tk", self.ginv, self.ginv,
                               self.ric_phi)
        term_w = np.einsum("tk,tikj->ij", ric_phi_up, self.w_phi)
        dphi_low = np.tensordot(self.h_x, self.dphi, axes=([1], [0]))
        # -alpha R^phi_{tk} phi^a_t phi^a_i delta_{jk}
        term_r = -alpha * np.einsum("ts,ai,as,tj->ij", self.ginv,
                                    dphi_low, self.dphi, self.ric_phi)
        term_map = alpha * (
            np.einsum("a,aij->ij", self.tau_low, self.nabla_dphi)
            - np.einsum("aj,bi,ab->ij", self.dtau, self.dphi, self.h_x)
            - (1.0 / (m - 2)) * smul(self.tau_norm2, self.g))
        return (div_c + term_w + term_r + term_map) / (m - 2)

    @cached_property
    def dbar_phi(self):
        """D bar tensor of the eta-system analysis (needs an f-field)."""
        self._need_m3("Dbar^phi")
        if self.scene.f is None and self.scene.u is None:
            raise MissingField("Dbar^phi needs an f (or u) field")
        m = self.m
        rf = np.tensordot(self.df_up, self.ric_phi, axes=([0], [0]))  # f_t R^phi_{tk}
        t1 = np.einsum("ij,k->ijk", self.ric_phi, self.df)
        t2 = np.einsum("ik,j->ijk", self.ric_phi, self.df)
        t3 = np.einsum("k,ij->ijk", rf, self.g) - np.einsum(
            "j,ik->ijk", rf, self.g)
        t4 = smul(self.s_phi, np.einsum("k,ij->ijk", self.df, self.g)
                  - np.einsum("j,ik->ijk", self.df, self.g))
        return (t1 - t2 + t3 / (m - 1) - t4 / (m - 1)) / (m - 2)


# ---- public pointwise API ----------------------------------------------------


@dataclass
class CurvatureBundle:
    """Pointwise curvature quantities as float arrays (batch axis first)."""

    gamma: np.ndarray
    riemann: np.ndarray
    ric: np.ndarray
    scal: np.ndarray
    phistar_h: np.ndarray = None
    nabla_dphi: np.ndarray = None
    tau: np.ndarray = None
    dphi_norm2: np.ndarray = None
    ric_phi: np.ndarray = None
    s_phi: np.ndarray = None
    a_phi: np.ndarray = None
    w_phi: np.ndarray = None
    c_phi: np.ndarray = None
    b_phi: np.ndarray = None
    dbar_phi: np.ndarray = None


def classical_curvature(scene, points, order=3):
    geo = Geometry(scene, points, order)
    return {"gamma": values(geo.gamma), "riemann": values(geo.riemann),
            "ric": values(geo.ric), "scal": values(geo.scal)}


def map_quantities(scene, points, order=3):
    geo = Geometry(scene, points, order)
    return {"phistar_h": values(geo.phistar_h),
            "nabla_dphi": values(geo.nabla_dphi),
            "tau": values(geo.tau),
            "dphi_norm2": values(geo.dphi_norm2)}


def phi_bundle(scene, points, order=5, with_bach=True, with_dbar=None):
    """Assemble the full phi-curvature bundle at a batch of points."""
    geo = Geometry(scene, points, order)
    if with_dbar is None:
        with_dbar = scene.f is not None or scene.u is not None
    return CurvatureBundle(
        gamma=values(geo.gamma), riemann=values(geo.riemann),
        ric=values(geo.ric), scal=values(geo.scal),
        phistar_h=values(geo.phistar_h), nabla_dphi=values(geo.nabla_dphi),
        tau=values(geo.tau), dphi_norm2=values(geo.dphi_norm2),
        ric_phi=values(geo.ric_phi), s_phi=values(geo.s_phi),
        a_phi=values(geo.a_phi), w_phi=values(geo.w_phi),
        c_phi=values(geo.c_phi),
        b_phi=values(geo.b_phi) if with_bach else None,
        dbar_phi=values(geo.dbar_phi) if with_dbar else None,
    )


def trace_identities(scene, points, order=5):
    """Residuals of the three contraction identities of the phi-tensors:
    W^phi_{kikj} = alpha (phi*h)_ij, C^phi_{kki} = alpha tau^a phi^a_i, and
    B^phi_{ii} = alpha (m-4)/(m-2)^2 |tau(phi)|^2.
    """
    geo = Geometry(scene, points, order)
    m = geo.m
    al = scene.alpha
    w_trace = geo.trace(geo.w_phi, 0, 2)
    c_trace = geo.trace(geo.c_phi, 0, 1)
    b_trace = geo.trace(geo.b_phi, 0, 1)
    tau_pull = np.tensordot(geo.tau_low, geo.dphi, axes=([0], [0]))
    return {
        "weyl_trace": values(w_trace - al * np.asarray(geo.phistar_h)),
        "cotton_trace": values(c_trace - al * tau_pull),
        "bach_trace": values(asjet(b_trace)
                             - al * (m - 4) / (m - 2) ** 2 * geo.tau_norm2),
    }


def schur_residual(scene, points, order=4):
    """R^phi_{ij,i} - (S^phi_j / 2 - alpha phi^a_{tt} phi^a_j); target 0."""
    geo = Geometry(scene, points, order)
    div_ric = np.tensordot(geo.dric_phi, geo.ginv, axes=([0, 2], [0, 1]))
    rhs = 0.5 * geo.ds_phi - geo.scene.alpha * np.tensordot(
        geo.tau_low, geo.dphi, axes=([0], [0]))
    return values(div_ric - rhs)


def conformal_scene(scene):
    """The conformally changed scene gtilde = exp(-2 f / (m-2)) g."""
    from .jets import exp as jexp
    m = scene.dim
    ffn = scene.f_fn()
    base_metric = scene.metric

    def metric(x):
        lam = jexp((-2.0 / (m - 2)) * ffn(x))
        comp = base_metric(x)
        return [[lam * comp[i][j] for j in range(m)] for i in range(m)]

    return Scene(name=scene.name + "~conformal", chart=scene.chart,
                 metric=metric, mapspec=scene.mapspec, alpha=scene.alpha,
                 eta=scene.eta, potential=scene.potential,
                 params=dict(scene.params))


def conformal_cotton_residual(scene, points, order=4):
    """Difference between the two pipelines of the conformal Cotton law.

    Pipeline 1: the Cotton tensor of gtilde = exp(-2 f/(m-2)) g (same map).
    Pipeline 2: C^phi + W^phi(grad f, ., ., .) on g.
    """
    geo = Geometry(scene, points, order)
    tilde = Geometry(conformal_scene(scene), points, order)
    rhs = geo.c_phi + np.tensordot(geo.df_up, geo.w_phi, axes=([0], [0]))
    return values(tilde.c_phi) - values(rhs)
