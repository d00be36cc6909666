"""Backend selection for the truncated Taylor product kernel.

The product of two truncated multivariate Taylor polynomials reduces to a
gather-multiply-scatter over a precomputed table of monomial index pairs,
grouped by output monomial.  Two implementations are provided: a pure-numpy
segment reduction and a numba-compiled loop.  The active backend is chosen by
the environment variable PHIFLUID_JET_BACKEND:

    "numpy"  - always use the numpy path
    "numba"  - require numba (ImportError if unavailable)
    "auto"   - numba when importable, numpy otherwise (default)
"""

import os

import numpy as np

_CHOICE = os.environ.get("PHIFLUID_JET_BACKEND", "auto").lower()

_njit_mul = None
if _CHOICE in ("auto", "numba"):
    try:
        from numba import njit

        @njit(cache=True)
        def _mul_numba(a, b, ai, bi, seg, out):  # pragma: no cover - compiled
            n_out = seg.shape[0] - 1
            nbatch = a.shape[1]
            for o in range(n_out):
                for c in range(nbatch):
                    out[o, c] = 0.0
                for t in range(seg[o], seg[o + 1]):
                    ia = ai[t]
                    ib = bi[t]
                    for c in range(nbatch):
                        out[o, c] += a[ia, c] * b[ib, c]
            return out

        _njit_mul = _mul_numba
    except ImportError:
        if _CHOICE == "numba":
            raise

BACKEND = "numba" if _njit_mul is not None else "numpy"


def _mul_numpy(a, b, ai, bi, seg, out):
    prod = a[ai] * b[bi]
    np.add.reduceat(prod, seg[:-1], axis=0, out=out)
    return out


def taylor_mul(a, b, ai, bi, seg, out):
    """out[o] = sum over pairs (ai, bi) in segment o of a[ai] * b[bi].

    a, b, out: float64 arrays of shape (n_monomials, batch).
    ai, bi: int32 pair tables; seg: int32 segment offsets, len n_monomials+1.
    """
    if _njit_mul is not None:
        return _njit_mul(a, b, ai, bi, seg, out)
    return _mul_numpy(a, b, ai, bi, seg, out)
