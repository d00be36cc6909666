"""Forward-mode jet arithmetic: truncated multivariate Taylor polynomials.

A Jet stores the Taylor coefficients of a smooth function at a (batch of)
expansion point(s), truncated at a fixed total order.  All elementary
operations (ring arithmetic plus composition with analytic functions) act on
the coefficient arrays, so every partial derivative up to the truncation
order is exact to roundoff -- there is no finite-difference step to tune.

Coefficients are stored as an (n_monomials, batch) float array in graded
lexicographic monomial order.  ``eff`` tracks how many orders of the stored
coefficients are still trustworthy: extracting a partial derivative lowers
it by one, mirroring the loss incurred by differentiating a truncated
polynomial.
"""

import math
from itertools import combinations_with_replacement

import numpy as np

from .errors import OrderExceeded
from .kernels import taylor_mul

MAX_ORDER = 6

_SPACES = {}


class JetSpace:
    """Monomial basis and product tables for (n_vars, order)."""

    def __init__(self, nvars, order):
        if order > MAX_ORDER:
            raise OrderExceeded(f"jet order {order} > maximum {MAX_ORDER}")
        self.nvars = nvars
        self.order = order
        monos = []
        for deg in range(order + 1):
            for pick in combinations_with_replacement(range(nvars), deg):
                mono = [0] * nvars
                for v in pick:
                    mono[v] += 1
                monos.append(tuple(mono))
        self.monomials = monos
        self.index = {mo: i for i, mo in enumerate(monos)}
        self.n = len(monos)
        self.degree = np.array([sum(mo) for mo in monos], dtype=np.int32)

        # Pair table for the truncated product, grouped by output monomial.
        by_out = [[] for _ in range(self.n)]
        for i, ma in enumerate(monos):
            da = sum(ma)
            for j, mb in enumerate(monos):
                if da + sum(mb) > order:
                    continue
                mc = tuple(x + y for x, y in zip(ma, mb))
                by_out[self.index[mc]].append((i, j))
        ai, bi, seg = [], [], [0]
        for pairs in by_out:
            for i, j in pairs:
                ai.append(i)
                bi.append(j)
            seg.append(len(ai))
        self.mul_ai = np.array(ai, dtype=np.int32)
        self.mul_bi = np.array(bi, dtype=np.int32)
        self.mul_seg = np.array(seg, dtype=np.int32)

        # Partial derivative tables: src monomial -> dst = src - e_v, factor src_v.
        self.diff_src = []
        self.diff_dst = []
        self.diff_fac = []
        for v in range(nvars):
            src, dst, fac = [], [], []
            for i, mo in enumerate(monos):
                if mo[v] > 0:
                    lower = list(mo)
                    lower[v] -= 1
                    src.append(i)
                    dst.append(self.index[tuple(lower)])
                    fac.append(mo[v])
            self.diff_src.append(np.array(src, dtype=np.int32))
            self.diff_dst.append(np.array(dst, dtype=np.int32))
            self.diff_fac.append(np.array(fac, dtype=float))


def jet_space(nvars, order):
    key = (nvars, order)
    if key not in _SPACES:
        _SPACES[key] = JetSpace(nvars, order)
    return _SPACES[key]


def _as_batch(value):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1)
    if arr.ndim == 1:
        return arr
    raise ValueError("jet values must be scalars or 1-d batches")


class Jet:
    """A truncated Taylor expansion over a batch of points."""

    __slots__ = ("space", "c", "eff")

    def __init__(self, space, c, eff=None):
        self.space = space
        self.c = c
        self.eff = space.order if eff is None else eff

    # -- constructors ------------------------------------------------------

    @staticmethod
    def variable(space, var, value):
        val = _as_batch(value)
        c = np.zeros((space.n, val.shape[0]))
        c[0] = val
        if space.order >= 1:
            unit = [0] * space.nvars
            unit[var] = 1
            c[space.index[tuple(unit)]] = 1.0
        return Jet(space, c)

    @staticmethod
    def constant(space, value):
        val = _as_batch(value)
        c = np.zeros((space.n, val.shape[0]))
        c[0] = val
        return Jet(space, c)

    # -- inspection --------------------------------------------------------

    @property
    def value(self):
        return self.c[0]

    @property
    def batch(self):
        return self.c.shape[1]

    def coefficient(self, mono):
        """Taylor coefficient of the given multi-index (not the derivative)."""
        if sum(mono) > self.eff:
            raise OrderExceeded(
                f"coefficient of order {sum(mono)} requested; only "
                f"{self.eff} orders are trustworthy"
            )
        return self.c[self.space.index[tuple(mono)]]

    def derivative(self, mono):
        """Partial derivative for the multi-index (coefficient * multinomial)."""
        fac = 1.0
        for k in mono:
            fac *= math.factorial(k)
        return self.coefficient(mono) * fac

    # -- ring arithmetic ---------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(self.space, other)

    def _align(self, other):
        a, b = self.c, other.c
        if a.shape[1] == b.shape[1]:
            return a, b
        if a.shape[1] == 1:
            a = np.broadcast_to(a, (a.shape[0], b.shape[1]))
        elif b.shape[1] == 1:
            b = np.broadcast_to(b, (b.shape[0], a.shape[1]))
        else:
            raise ValueError("incompatible jet batch sizes")
        return a, b

    def __add__(self, other):
        if not isinstance(other, Jet):
            c = self.c.copy()
            c[0] = c[0] + _as_batch(other)
            return Jet(self.space, c, self.eff)
        a, b = self._align(other)
        return Jet(self.space, a + b, min(self.eff, other.eff))

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.c, self.eff)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other, dtype=float))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            arr = np.asarray(other, dtype=float)
            return Jet(self.space, self.c * arr, self.eff)
        a, b = self._align(other)
        sp = self.space
        out = np.empty(a.shape)
        taylor_mul(np.ascontiguousarray(a), np.ascontiguousarray(b),
                   sp.mul_ai, sp.mul_bi, sp.mul_seg, out)
        return Jet(sp, out, min(self.eff, other.eff))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other._reciprocal()

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int) or (isinstance(p, float) and p == int(p) and abs(p) <= 8):
            p = int(p)
            if p == 0:
                return Jet.constant(self.space, np.ones(self.batch))
            if p < 0:
                return self._reciprocal() ** (-p)
            out = self
            for _ in range(p - 1):
                out = out * self
            return out
        return self._analytic(lambda c0, k: _powder(c0, float(p), k))

    # -- analytic composition ----------------------------------------------

    def _analytic(self, dercoef):
        """Compose with a univariate analytic function.

        ``dercoef(c0, k)`` must return f^(k)(c0) / k! evaluated on the batch
        of constant terms c0.  The composition is a Horner evaluation in the
        nilpotent part of the jet.
        """
        sp = self.space
        order = min(self.eff, sp.order)
        c0 = self.c[0]
        dx = Jet(sp, self.c.copy(), self.eff)
        dx.c[0] = 0.0
        res = Jet.constant(sp, dercoef(c0, order))
        for k in range(order - 1, -1, -1):
            res = res * dx
            res.c[0] = res.c[0] + dercoef(c0, k)
        res.eff = order
        return res

    def _reciprocal(self):
        return self._analytic(lambda c0, k: (-1.0) ** k / c0 ** (k + 1))


def _powder(c0, p, k):
    coef = 1.0
    for i in range(k):
        coef *= (p - i) / (i + 1)
    return coef * c0 ** (p - k)


def _sinder(c0, k):
    r = k % 4
    fk = math.factorial(k)
    if r == 0:
        return np.sin(c0) / fk
    if r == 1:
        return np.cos(c0) / fk
    if r == 2:
        return -np.sin(c0) / fk
    return -np.cos(c0) / fk


# -- math functions dispatching on Jet/ndarray/float -------------------------

def sin(x):
    return x._analytic(_sinder) if isinstance(x, Jet) else np.sin(x)


def cos(x):
    return x._analytic(lambda c0, k: _sinder(c0, k + 1) * (k + 1)) if isinstance(x, Jet) else np.cos(x)


def exp(x):
    return x._analytic(lambda c0, k: np.exp(c0) / math.factorial(k)) if isinstance(x, Jet) else np.exp(x)


def log(x):
    if not isinstance(x, Jet):
        return np.log(x)

    def der(c0, k):
        if k == 0:
            return np.log(c0)
        return (-1.0) ** (k - 1) / (k * c0 ** k)

    return x._analytic(der)


def sqrt(x):
    return x ** 0.5 if isinstance(x, Jet) else np.sqrt(x)


def tan(x):
    return sin(x) / cos(x)


def value_of(x):
    """Numeric value of a Jet (batch array) or plain number."""
    if isinstance(x, Jet):
        return x.value
    return np.asarray(x, dtype=float)


def partial(x, var):
    """Partial derivative of a Jet along one coordinate, as a Jet.

    The result is trustworthy to one order fewer than the input.
    """
    if x.eff < 1:
        raise OrderExceeded("derivative budget exhausted")
    sp = x.space
    c = np.zeros_like(x.c)
    c[sp.diff_dst[var]] = sp.diff_fac[var][:, None] * x.c[sp.diff_src[var]]
    return Jet(sp, c, x.eff - 1)
