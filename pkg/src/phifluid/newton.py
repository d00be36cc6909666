"""Symmetric functions, Newton operators and integral obstructions.

Provides the elementary/normalized symmetric functions S_k and sigma_k of a
symmetric 2-tensor, the Newton endomorphisms P_k with their trace and
divergence identities, the second-order operators L_k, and quadrature-based
integral identities of Kazdan-Warner type on closed scenes (spheres in
geodesic polar coordinates, flat tori).
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .curvature import Geometry, asjet, smul
from .errors import (DerivativeBudget, KOutOfRange, NotClosed, NotCodazzi,
                     UPositivityViolated)
from .tensors import values


# ---- pointwise symmetric-function machinery ------------------------------------


def _newton_chain(B, m):
    """S_0..S_m and P_0..P_m of an endomorphism via the trace recursion.

    Works for float matrices and for object (jet-valued) matrices alike;
    this is the characteristic-polynomial (Faddeev-LeVerrier) recursion,
    so S_k are the char-poly coefficients, not eigenvalue sums.
    """
    eye = np.eye(m)
    S = [1.0]
    P = [eye]
    for j in range(1, m + 1):
        M = np.einsum("ij,jk->ik", B, P[-1])
        tr = M[0, 0]
        for i in range(1, m):
            tr = tr + M[i, i]
        Sj = tr / j
        S.append(Sj)
        if isinstance(B, np.ndarray) and B.dtype == object:
            Pj = smul(Sj, eye.astype(object)) - M
        else:
            Pj = Sj * eye - M
        P.append(Pj)
    return S, P


def _check_k(k, m):
    if not 0 <= k <= m:
        raise KOutOfRange(f"k={k} outside 0..{m}")


def sym_functions(A, k):
    """S_k and the normalized sigma_k = S_k / C(m, k) of a symmetric matrix."""
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    _check_k(k, m)
    S, _ = _newton_chain(A, m)
    return {"S_k": float(S[k]), "sigma_k": float(S[k]) / comb(m, k)}


def newton_operator(A, k):
    """k-th Newton operator P_k = S_k id - A P_{k-1} of a symmetric matrix."""
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    _check_k(k, m)
    _, P = _newton_chain(A, m)
    return P[k]


# ---- tensor-field builders ------------------------------------------------------


def schouten_field(subtract_potential=True):
    """A = A^phi - V/(m-1) g with V = U(phi) (or plain A^phi)."""

    def build(geo):
        A = np.asarray(geo.a_phi).copy()
        if subtract_potential:
            A = A - values_free(geo)
        return A

    def values_free(geo):
        return np.asarray(smul(geo.U / (geo.m - 1), geo.g))

    return build


def codazzi_w_field(name="w"):
    """A = Hess w + w g, a Codazzi tensor on unit space forms."""

    def build(geo):
        fld = geo.scene.fields.get(name)
        if fld is None:
            from .errors import MissingField
            raise MissingField(f"scene lacks the scalar field {name!r}")
        w = fld.fn(geo.x)
        dw = geo.covd_scalar(w)
        return geo.covd(dw) + np.asarray(smul(w, geo.g))

    return build


def metric_field():
    """A = g (parallel, trivially Codazzi)."""
    return lambda geo: np.asarray(geo.g).copy()


def _field_chain(geo, A_field, k):
    """Covariant A, its mixed form, and the Newton chain at a geometry."""
    m = geo.m
    _check_k(k, m)
    A = A_field(geo)
    B = np.einsum("ij,jk->ik", np.asarray(geo.ginv), A)
    S, P = _newton_chain(B, m)
    return A, B, S, P


def codazzi_and_divergence(scene, A_field, k, points, order=4):
    """Codazzi defect of A, divergence of P_k, and the defect of the
    identity div(P_k)_i = -A_{ij} div(P_{k-1})_j - C(A)_{jit} (P_{k-1})^{jt}.
    """
    if order < 2:
        raise DerivativeBudget("codazzi_and_divergence needs jet order >= 2")
    geo = Geometry(scene, np.atleast_2d(points), order)
    A, B, S, P = _field_chain(geo, A_field, k)
    if k < 1:
        raise KOutOfRange("the divergence identity needs k >= 1")
    dA = geo.covd(A)
    C = dA - np.transpose(dA, (0, 2, 1))          # C(A)_{jit}

    def div_p(j):
        low = np.einsum("ik,kj->ij", np.asarray(geo.g), P[j])
        dP = geo.covd(low)
        return np.tensordot(dP, np.asarray(geo.ginv),
                            axes=([1, 2], [0, 1]))

    div_k = div_p(k)
    div_km1 = div_p(k - 1)
    div_km1_up = np.tensordot(np.asarray(geo.ginv), div_km1,
                              axes=([1], [0]))
    P_up = np.einsum("js,st->jt", P[k - 1], np.asarray(geo.ginv))
    rhs = (-np.tensordot(A, div_km1_up, axes=([1], [0]))
           - np.einsum("jit,jt->i", C, P_up))
    return {"codazzi": values(C), "div_Pk": values(div_k),
            "identity_defect": values(div_k - rhs)}


def lk_apply(scene, A_field, k, points, order=4, structured=None):
    """L_k u = tr(P_k Hess u), with an optional structured cross-check.

    ``structured`` may supply closures p, q, l such that
    Hess u = p g + q du x du - l A; then the closed expression
    c_k [p sigma_k - l sigma_{k+1}] + q g(P_k grad u, grad u) is returned
    alongside for comparison.
    """
    if order < 2:
        raise DerivativeBudget("lk_apply needs jet order >= 2")
    geo = Geometry(scene, np.atleast_2d(points), order)
    m = geo.m
    A, B, S, P = _field_chain(geo, A_field, k)
    hess_mixed = np.einsum("ij,jk->ik", np.asarray(geo.ginv),
                           np.asarray(geo.hess_u))
    lk = asjet(np.einsum("ij,ji->", P[k], hess_mixed))
    out = {"Lk": values(lk)}
    if structured is not None:
        p = structured["p"](geo)
        q = structured["q"](geo)
        ell = structured["l"](geo)
        ck = (m - k) * comb(m, k)
        sig_k = S[k] / comb(m, k)
        sig_k1 = S[k + 1] / comb(m, k + 1) if k + 1 <= m else 0.0
        du_up = np.tensordot(np.asarray(geo.ginv), np.asarray(geo.du),
                             axes=([1], [0]))
        pk_du = np.tensordot(P[k], du_up, axes=([1], [0]))
        quad = asjet(np.tensordot(np.asarray(geo.du), pk_du,
                                  axes=([0], [0])))
        closed = ck * (p * sig_k - ell * sig_k1) + q * quad
        out["structured"] = values(closed)
        out["structured_defect"] = values(lk - closed)
    return out


# ---- quadrature on closed scenes -------------------------------------------------


@dataclass
class QuadratureGrid:
    nodes: np.ndarray       # (n, m) coordinates
    weights: np.ndarray     # (n,) coordinate-cell weights (no volume element)
    level: int
    kind: str               # "sphere" | "torus"
    eps: float = 0.0


def _gl_nodes(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _periodic_nodes(n):
    # half-step offset keeps nodes strictly inside (0, 2pi); the shifted
    # trapezoid rule is still spectrally accurate for periodic integrands
    h = 2.0 * np.pi / n
    x = h / 2.0 + h * np.arange(n)
    return x, np.full(n, h)


def build_grid(kind, m, level, eps=1e-3):
    """Product quadrature grid covering a closed model manifold.

    Sphere: geodesic polar coordinates (r, t_1..t_{m-2}, t_{m-1}) with
    Gauss-Legendre nodes on the polar intervals [eps, pi - eps] and a
    trapezoid rule on the 2pi-periodic azimuth. Torus: trapezoid
    everywhere (spectrally accurate for periodic integrands).
    """
    n = 4 * 2 ** level
    axes = []
    if kind == "sphere":
        for _ in range(m - 1):
            axes.append(_gl_nodes(eps, np.pi - eps, n))
        axes.append(_periodic_nodes(2 * n))
    elif kind == "torus":
        for _ in range(m):
            axes.append(_periodic_nodes(2 * n))
    else:
        raise NotClosed(f"no closed model of kind {kind!r}")
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([w.ravel() for w in wgrids], axis=1), axis=1)
    return QuadratureGrid(nodes=nodes, weights=weights, level=level,
                          kind=kind, eps=eps)


def _chunks(n, size=2048):
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def integrate_scalar(scene, grid, integrand, order=4, need=()):
    """Integrate closures over the grid with the Riemannian volume element.

    ``integrand`` maps a Geometry to a dict of per-point float arrays; the
    returned dict contains the weighted sums plus the total volume.
    """
    totals = {}
    volume = 0.0
    for sl in _chunks(grid.nodes.shape[0]):
        geo = Geometry(scene, grid.nodes[sl], order)
        dets = np.linalg.det(values(geo.g))
        if np.min(dets) <= 0:
            raise NotClosed("volume element degenerates on the grid")
        w = grid.weights[sl] * np.sqrt(dets)
        volume += float(np.sum(w))
        for key, arr in integrand(geo).items():
            totals[key] = totals.get(key, 0.0) + float(np.sum(w * arr))
    totals["volume"] = volume
    return totals


def divergence_selftest(scene, grid, vector_field, order=4):
    """Integral of div(V) over a closed scene; should vanish."""

    def integrand(geo):
        V = vector_field(geo)
        dV = geo.covd(V)
        div = np.tensordot(dV, np.asarray(geo.ginv), axes=([0, 1], [0, 1]))
        return {"div": values(asjet(div))}

    return integrate_scalar(scene, grid, integrand, order)


def _grid_for(scene, level, eps):
    kind = scene.params.get("closed")
    if kind is None:
        raise NotClosed(f"scene {scene.name!r} is not marked as a closed "
                        "model (params['closed'])")
    # the excluded polar caps are Richardson-extrapolated by the caller
    return build_grid(kind, scene.dim, level, eps)


def kazdan_warner(scene, k, level=3, A_field=None, mode="kw", order=4,
                  eps=1e-3, codazzi_tol=1e-5, richardson=True):
    """Quadrature obstruction of Kazdan-Warner type on a closed scene.

    mode "kw": lhs = int grad(u)(sigma_k), rhs = -int m (sigma_1 sigma_k -
    sigma_{k+1}) u for A = A^phi - U(phi)/(m-1) g (or a supplied A-field).
    mode "conformal": lhs = ((m-k)/m) int grad(u)(S_k), rhs = 0 (closed
    manifold, X = grad u conformal).

    The Codazzi gate rejects A-fields with sup |C(A)| above ``codazzi_tol``;
    the quadrature removes polar caps of radius eps and, when ``richardson``
    is set, extrapolates the cap contribution from levels eps and 2 eps.
    """
    m = scene.dim
    _check_k(k, m)
    if not 1 <= k <= m - 1:
        raise KOutOfRange("the integral identity needs 1 <= k <= m-1")
    if A_field is None:
        A_field = schouten_field()

    state = {"codazzi": 0.0, "u_min": np.inf, "anselli_min": np.inf,
             "sigma_k_min": np.inf, "positive_node": False}

    def integrand(geo):
        A, B, S, P = _field_chain(geo, A_field, k)
        dA = geo.covd(A)
        C = dA - np.transpose(dA, (0, 2, 1))
        state["codazzi"] = max(state["codazzi"], float(np.max(np.abs(
            values(C)))))
        uv = values(geo.u)
        state["u_min"] = min(state["u_min"], float(np.min(uv)))

        def vals(s):
            # S_k may collapse to a plain constant (e.g. A = g)
            return values(s) if hasattr(s, "eff") else np.full_like(uv, s)

        sk = S[k]
        if hasattr(sk, "eff"):
            dsk = geo.covd_scalar(sk)
            du_up = np.tensordot(np.asarray(geo.ginv), np.asarray(geo.du),
                                 axes=([1], [0]))
            grad_u_sk = values(asjet(np.tensordot(dsk, du_up,
                                                  axes=([0], [0]))))
        else:
            grad_u_sk = np.zeros_like(uv)
        sig1 = vals(S[1]) / comb(m, 1)
        sigk = vals(sk) / comb(m, k)
        sigk1 = vals(S[k + 1]) / comb(m, k + 1)
        state["sigma_k_min"] = min(state["sigma_k_min"], float(np.min(sigk)))
        anselli = sig1 * sigk - sigk1
        state["anselli_min"] = min(state["anselli_min"],
                                   float(np.min(anselli)))
        Bv = values(B)
        eig = np.linalg.eigvals(Bv)
        if np.any(np.all(eig.real > 0, axis=1)):
            state["positive_node"] = True
        if mode == "kw":
            return {"lhs": grad_u_sk, "rhs": -m * anselli * uv}
        return {"lhs": (m - k) / m * grad_u_sk, "rhs": 0.0 * uv}

    def run(eps_val):
        grid = _grid_for(scene, level, eps_val)
        return integrate_scalar(scene, grid, integrand, order)

    totals = run(eps)
    if richardson and scene.params.get("closed") == "sphere":
        coarse = run(2.0 * eps)
        totals = {key: (4.0 * totals[key] - coarse[key]) / 3.0
                  for key in totals}

    if state["u_min"] <= 0:
        raise UPositivityViolated(
            f"u attains {state['u_min']:.3e} on the grid")
    if state["codazzi"] > codazzi_tol:
        raise NotCodazzi(
            f"Codazzi defect {state['codazzi']:.3e} exceeds the gate")

    hypotheses = {"codazzi_sup": state["codazzi"],
                  "u_min": state["u_min"],
                  "sigma_k_min": state["sigma_k_min"],
                  "anselli_min": state["anselli_min"],
                  "positive_eigen_node": state["positive_node"]}
    return {"lhs": totals["lhs"], "rhs": totals["rhs"],
            "defect": totals["lhs"] - totals["rhs"],
            "volume": totals["volume"], "mode": mode, "k": k,
            "level": level, "hypotheses": hypotheses}
