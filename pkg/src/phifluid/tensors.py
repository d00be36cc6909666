"""Pointwise tensor algebra: dense components, variance flags, contractions.

Two representations coexist:

* ``TensorValue`` -- plain float components at a single point with an explicit
  covariant/contravariant signature; the public face used in reports.
* object ndarrays whose entries are :class:`~phifluid.jets.Jet` -- the
  internal representation used while differentiating through curvature
  formulas.  numpy's elementwise arithmetic and einsum both dispatch to the
  Jet operators, so the same formulas serve floats and jets.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularMetric
from .jets import Jet

EPS_DET = 1e-12

COV = "cov"
CON = "con"


def otensor(shape):
    """Object ndarray filled with float zeros (Jet-compatible)."""
    t = np.empty(shape, dtype=object)
    t[...] = 0.0
    return t


def values(t):
    """Convert a (possibly Jet-valued) tensor to floats, batch axis first."""
    if isinstance(t, Jet):
        return t.value.copy()
    if isinstance(t, np.ndarray) and t.ndim == 0 and t.dtype == object:
        return values(t.item())
    if not isinstance(t, np.ndarray) or t.dtype != object:
        arr = np.asarray(t, dtype=float)
        return arr[None, ...]
    batch = 1
    for entry in t.flat:
        if isinstance(entry, Jet):
            batch = max(batch, entry.batch)
    out = np.zeros((batch,) + t.shape)
    for idx in np.ndindex(t.shape):
        entry = t[idx]
        out[(slice(None),) + idx] = entry.value if isinstance(entry, Jet) else entry
    return out


def inv_matrix(g):
    """Inverse of a small SPD matrix of floats or Jets (no pivoting)."""
    if g.dtype != object:
        det = np.linalg.det(g)
        if abs(det) <= EPS_DET:
            raise SingularMetric(f"det g = {det:.3e}")
        return np.linalg.inv(g)
    m = g.shape[0]
    a = g.copy()
    inv = otensor((m, m))
    for i in range(m):
        inv[i, i] = 1.0
    for col in range(m):
        piv = a[col, col]
        pval = piv.value if isinstance(piv, Jet) else piv
        if np.any(np.abs(pval) <= EPS_DET):
            raise SingularMetric("pivot below degeneracy guard")
        pinv = 1.0 / piv
        for j in range(m):
            a[col, j] = a[col, j] * pinv
            inv[col, j] = inv[col, j] * pinv
        for row in range(m):
            if row == col:
                continue
            factor = a[row, col]
            for j in range(m):
                a[row, j] = a[row, j] - factor * a[col, j]
                inv[row, j] = inv[row, j] - factor * inv[col, j]
    return inv


def det_matrix(g):
    """Determinant by cofactor expansion (works on Jet entries)."""
    m = g.shape[0]
    if m == 1:
        return g[0, 0]
    total = 0.0
    for j in range(m):
        minor = np.delete(np.delete(g, 0, axis=0), j, axis=1)
        term = g[0, j] * det_matrix(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def sym2(t):
    return 0.5 * (t + np.swapaxes(t, -1, -2))


def kulkarni_nomizu(a, b):
    """(A km B)_{ijkl} = A_ik B_jl + A_jl B_ik - A_il B_jk - A_jk B_il."""
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionMismatch("Kulkarni-Nomizu needs square same-shape inputs")
    return (np.einsum("ik,jl->ijkl", a, b) + np.einsum("jl,ik->ijkl", a, b)
            - np.einsum("il,jk->ijkl", a, b) - np.einsum("jk,il->ijkl", a, b))


@dataclass
class TensorValue:
    """Dense pointwise components plus a variance signature."""

    components: np.ndarray
    variance: tuple

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=float)
        self.variance = tuple(self.variance)
        if self.components.ndim != len(self.variance):
            raise DimensionMismatch("rank does not match variance signature")

    @property
    def rank(self):
        return self.components.ndim

    @property
    def dim(self):
        return self.components.shape[0] if self.rank else 0


def raise_lower(t, g, slot):
    """Flip the variance of one slot by contracting with g or its inverse."""
    if slot >= t.rank:
        raise DimensionMismatch(f"slot {slot} out of range for rank {t.rank}")
    g = np.asarray(g, dtype=float)
    det = np.linalg.det(g)
    if abs(det) <= EPS_DET:
        raise SingularMetric(f"det g = {det:.3e}")
    mat = np.linalg.inv(g) if t.variance[slot] == COV else g
    comp = np.tensordot(t.components, mat, axes=([slot], [0]))
    comp = np.moveaxis(comp, -1, slot)
    new_var = list(t.variance)
    new_var[slot] = CON if t.variance[slot] == COV else COV
    return TensorValue(comp, tuple(new_var))


def contract(t, slot_a, slot_b, g=None):
    """Trace two slots; same-variance slots need the metric."""
    va, vb = t.variance[slot_a], t.variance[slot_b]
    comp = t.components
    if va == vb:
        if g is None:
            raise DimensionMismatch("same-variance contraction needs the metric")
        t = raise_lower(t, g, slot_b)
        comp = t.components
    comp = np.trace(comp, axis1=slot_a, axis2=slot_b)
    var = tuple(v for i, v in enumerate(t.variance) if i not in (slot_a, slot_b))
    return TensorValue(comp, var) if var else float(comp)
