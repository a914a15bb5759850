"""Scalar coefficient fields on R^m with exact or finite-difference derivatives.

Everything downstream (forms, operators, mollifiers, kernels) consumes scalar
fields through a small common interface: vectorized evaluation at points of
shape (..., m), first partial derivatives, complex conjugation and pointwise
arithmetic.  Polynomial fields implement derivatives and products exactly, so
identities such as dbar(dbar(f)) = 0 hold coefficientwise with no quadrature
involved.  Smooth bump / step windows carry closed-form first derivatives;
arbitrary callables fall back to centered finite differences.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss


def _as_points(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def _unsqueeze(vals, squeeze):
    return vals[0] if squeeze else vals


class Field:
    """Base class: complex scalar function of m real coordinates."""

    m: int
    is_poly = False

    def __call__(self, x):
        raise NotImplementedError

    def partial(self, k):
        """Field for d(self)/dx_k (0-based real coordinate)."""
        raise NotImplementedError

    def conj(self):
        raise NotImplementedError

    def __add__(self, other):
        other = as_field(other, self.m)
        if self.is_poly and other.is_poly:
            return self._poly_add(other)
        return SumField(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * as_field(other, self.m)

    def __rsub__(self, other):
        return as_field(other, self.m) + (-1.0) * self

    def __mul__(self, other):
        if np.isscalar(other) or isinstance(other, (int, float, complex)):
            return self._scaled(complex(other))
        if self.is_poly and other.is_poly:
            return self._poly_mul(other)
        return ProductField(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return (-1.0) * self

    def __truediv__(self, c):
        return self * (1.0 / complex(c))

    def _scaled(self, c):
        return ScaledField(c, self)

    @property
    def is_zero(self):
        return False


class PolyField(Field):
    """Polynomial with complex coefficients: sum of c * prod_k x_k^a_k.

    terms maps exponent tuples (len m) to complex coefficients; exact under
    addition, multiplication, differentiation and conjugation.
    """

    is_poly = True

    def __init__(self, m, terms):
        self.m = m
        self.terms = {tuple(a): complex(c) for a, c in terms.items() if c != 0}

    def __call__(self, x):
        x, sq = _as_points(x)
        out = np.zeros(x.shape[:-1], dtype=complex)
        for powers, c in self.terms.items():
            term = np.full(x.shape[:-1], c)
            for k, a in enumerate(powers):
                if a:
                    term = term * x[..., k] ** a
            out += term
        return _unsqueeze(out, sq)

    def partial(self, k):
        terms = {}
        for powers, c in self.terms.items():
            if powers[k] == 0:
                continue
            new = list(powers)
            new[k] -= 1
            key = tuple(new)
            terms[key] = terms.get(key, 0.0) + c * powers[k]
        return PolyField(self.m, terms)

    def conj(self):
        return PolyField(self.m, {a: np.conj(c) for a, c in self.terms.items()})

    def _scaled(self, c):
        return PolyField(self.m, {a: c * v for a, v in self.terms.items()})

    def _poly_add(self, other):
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, 0.0) + c
        return PolyField(self.m, terms)

    def _poly_mul(self, other):
        terms = {}
        for a1, c1 in self.terms.items():
            for a2, c2 in other.terms.items():
                key = tuple(i + j for i, j in zip(a1, a2))
                terms[key] = terms.get(key, 0.0) + c1 * c2
        return PolyField(self.m, terms)

    @property
    def is_zero(self):
        return not self.terms

    def total_degree(self):
        return max((sum(a) for a in self.terms), default=0)


def constant(m, c):
    return PolyField(m, {(0,) * m: c})


def coordinate(m, k):
    powers = [0] * m
    powers[k] = 1
    return PolyField(m, {tuple(powers): 1.0})


def as_field(obj, m):
    if isinstance(obj, Field):
        return obj
    if np.isscalar(obj) or isinstance(obj, (int, float, complex)):
        return constant(m, complex(obj))
    if callable(obj):
        return AnalyticField(m, obj)
    raise TypeError(f"cannot interpret {obj!r} as a field on R^{m}")


class SumField(Field):
    def __init__(self, f, g):
        assert f.m == g.m
        self.m = f.m
        self.f, self.g = f, g

    def __call__(self, x):
        return self.f(x) + self.g(x)

    def partial(self, k):
        return self.f.partial(k) + self.g.partial(k)

    def conj(self):
        return SumField(self.f.conj(), self.g.conj())


class ProductField(Field):
    def __init__(self, f, g):
        assert f.m == g.m
        self.m = f.m
        self.f, self.g = f, g

    def __call__(self, x):
        return self.f(x) * self.g(x)

    def partial(self, k):
        return self.f.partial(k) * self.g + self.f * self.g.partial(k)

    def conj(self):
        return ProductField(self.f.conj(), self.g.conj())


class ScaledField(Field):
    def __init__(self, c, f):
        self.m = f.m
        self.c = complex(c)
        self.f = f

    def __call__(self, x):
        return self.c * self.f(x)

    def partial(self, k):
        return ScaledField(self.c, self.f.partial(k))

    def conj(self):
        return ScaledField(np.conj(self.c), self.f.conj())


class AnalyticField(Field):
    """Callable-backed field; exact gradients if supplied, else centered FD."""

    def __init__(self, m, func, grads=None, fd_step=1e-6, real=False):
        self.m = m
        self.func = func
        self.grads = grads
        self.fd_step = fd_step
        self.real = real

    def __call__(self, x):
        x, sq = _as_points(x)
        vals = np.asarray(self.func(x), dtype=complex)
        return _unsqueeze(vals, sq)

    def partial(self, k):
        if self.grads is not None:
            g = self.grads[k]
            return g if isinstance(g, Field) else AnalyticField(self.m, g, real=self.real)
        h = self.fd_step

        def fd(x, _k=k, _h=h, _f=self.func):
            xp = np.array(x, dtype=float)
            xm = np.array(x, dtype=float)
            xp[..., _k] += _h
            xm[..., _k] -= _h
            return (np.asarray(_f(xp), dtype=complex) - np.asarray(_f(xm), dtype=complex)) / (2 * _h)

        return AnalyticField(self.m, fd, fd_step=h, real=self.real)

    def conj(self):
        if self.real:
            return self
        grads = None
        if self.grads is not None:
            grads = [as_field(g, self.m).conj() if isinstance(g, Field)
                     else AnalyticField(self.m, g).conj() for g in self.grads]
        return AnalyticField(self.m, lambda x: np.conj(self.func(x)), grads,
                             fd_step=self.fd_step)


# ---------------------------------------------------------------------------
# complex coordinates: z_j = x_{2j} + i x_{2j+1} (0-based pairs)

def complex_coords(x, n):
    """View points in R^{2n} as points in C^n, shape (..., n)."""
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def zmonomial(n, a, b):
    """z^a zbar^b as an exact real-coordinate polynomial on R^{2n}."""
    m = 2 * n
    out = constant(m, 1.0)
    for j in range(n):
        zj = PolyField(m, {tuple(1 if k == 2 * j else 0 for k in range(m)): 1.0,
                           tuple(1 if k == 2 * j + 1 else 0 for k in range(m)): 1.0j})
        zbj = zj.conj()
        for _ in range(a[j]):
            out = out * zj
        for _ in range(b[j]):
            out = out * zbj
    return out


def zpolynomial(n, terms):
    """Polynomial in z, zbar from {(a_tuple, b_tuple): coeff}."""
    m = 2 * n
    out = PolyField(m, {})
    for (a, b), c in terms.items():
        out = out + complex(c) * zmonomial(n, a, b)
    return out


def dz_part(f, j):
    """Wirtinger d/dz_j = (d/dx - i d/dy)/2 applied to a field on R^{2n}."""
    return 0.5 * (f.partial(2 * j) - 1j * f.partial(2 * j + 1))


def dzbar_part(f, j):
    """Wirtinger d/dzbar_j = (d/dx + i d/dy)/2."""
    return 0.5 * (f.partial(2 * j) + 1j * f.partial(2 * j + 1))


# ---------------------------------------------------------------------------
# smooth windows built from the standard bump exp(-1/(1-u^2))

_GL_NODES, _GL_W = leggauss(80)


def _bump01(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti * ti))
    return out


#: integral of exp(-1/(1-t^2)) over (-1, 1), computed once at import
BUMP_MASS_1D = float(np.sum(_GL_W * _bump01(_GL_NODES)))


def smooth_transition(s):
    """C-infinity step: 0 for s <= 1, 1 for s >= 2, strictly monotone between.

    Built as the running integral of a unit-mass bump supported on (1, 2), so
    the derivative is available in closed form (`smooth_transition_deriv`).
    """
    s = np.asarray(s, dtype=float)
    u = np.clip(2.0 * s - 3.0, -1.0, 1.0)
    # integrate bump01 from -1 to u with mapped Gauss-Legendre nodes
    half = (u + 1.0) / 2.0
    t = -1.0 + half[..., None] * (_GL_NODES + 1.0)
    vals = np.sum(_GL_W * _bump01(t), axis=-1) * half
    return vals / BUMP_MASS_1D


def smooth_transition_deriv(s):
    """Derivative of smooth_transition: a bump of unit mass supported on (1, 2)."""
    s = np.asarray(s, dtype=float)
    return 2.0 * _bump01(2.0 * s - 3.0) / BUMP_MASS_1D


def _bump01_deriv(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    g = 1.0 - ti * ti
    out[inside] = np.exp(-1.0 / g) * (-2.0 * ti / (g * g))
    return out


def smooth_transition_deriv2(s):
    """Second derivative of smooth_transition, supported on (1, 2)."""
    s = np.asarray(s, dtype=float)
    return 4.0 * _bump01_deriv(2.0 * s - 3.0) / BUMP_MASS_1D


class SmoothStepField(Field):
    """0 below lo, 1 above hi along one axis, smooth in between."""

    def __init__(self, m, axis, lo, hi):
        self.m = m
        self.axis = axis
        self.lo, self.hi = float(lo), float(hi)

    def _arg(self, x):
        return 1.0 + (x[..., self.axis] - self.lo) / (self.hi - self.lo)

    def __call__(self, x):
        x, sq = _as_points(x)
        return _unsqueeze(smooth_transition(self._arg(x)).astype(complex), sq)

    def partial(self, k):
        if k != self.axis:
            return PolyField(self.m, {})
        scale = 1.0 / (self.hi - self.lo)

        def deriv(x, _self=self, _scale=scale):
            return smooth_transition_deriv(_self._arg(x)) * _scale

        return AnalyticField(self.m, deriv, real=True)

    def conj(self):
        return self


class BumpField(Field):
    """exp(-1/(1-u)) with u = sum((x_k-c_k)^2/r_k^2) over selected axes.

    peak_one scales the maximum to 1 (handy for test windows); the gradient is
    closed form and smooth across the support boundary.
    """

    def __init__(self, m, axes, center, radius, peak_one=True):
        self.m = m
        self.axes = tuple(axes)
        self.center = np.asarray(center, dtype=float)
        radius = np.asarray(radius, dtype=float)
        self.radius = np.broadcast_to(radius, (len(self.axes),)).copy()
        self.scale = np.e if peak_one else 1.0

    def _u(self, x):
        u = np.zeros(x.shape[:-1])
        for i, k in enumerate(self.axes):
            u = u + ((x[..., k] - self.center[i]) / self.radius[i]) ** 2
        return u

    def __call__(self, x):
        x, sq = _as_points(x)
        u = self._u(x)
        out = np.zeros_like(u)
        inside = u < 1.0
        out[inside] = self.scale * np.exp(-1.0 / (1.0 - u[inside]))
        return _unsqueeze(out.astype(complex), sq)

    def partial(self, k):
        if k not in self.axes:
            return PolyField(self.m, {})
        i = self.axes.index(k)

        def deriv(x, _self=self, _i=i, _k=k):
            u = _self._u(x)
            out = np.zeros_like(u)
            inside = u < 1.0
            ui = u[inside]
            base = _self.scale * np.exp(-1.0 / (1.0 - ui)) / (1.0 - ui) ** 2
            out[inside] = -base * 2.0 * (x[inside][:, _k] - _self.center[_i]) / _self.radius[_i] ** 2
            return out

        return AnalyticField(self.m, deriv, real=True)

    def conj(self):
        return self


class PlateauField(Field):
    """Radial window over selected axes: 1 inside r_flat, 0 outside r_out."""

    def __init__(self, m, axes, center, r_flat, r_out):
        if not 0 < r_flat < r_out:
            raise ValueError("need 0 < r_flat < r_out")
        self.m = m
        self.axes = tuple(axes)
        self.center = np.asarray(center, dtype=float)
        self.r_flat, self.r_out = float(r_flat), float(r_out)

    def _s(self, x):
        s = np.zeros(x.shape[:-1])
        for i, k in enumerate(self.axes):
            s = s + (x[..., k] - self.center[i]) ** 2
        return np.sqrt(s)

    def _arg(self, s):
        return 1.0 + (s - self.r_flat) / (self.r_out - self.r_flat)

    def __call__(self, x):
        x, sq = _as_points(x)
        v = 1.0 - smooth_transition(self._arg(self._s(x)))
        return _unsqueeze(v.astype(complex), sq)

    def partial(self, k):
        if k not in self.axes:
            return PolyField(self.m, {})
        i = self.axes.index(k)

        def deriv(x, _self=self, _i=i, _k=k):
            s = _self._s(x)
            rho = smooth_transition_deriv(_self._arg(s)) / (_self.r_out - _self.r_flat)
            safe = np.where(s > 1e-12, s, 1.0)
            return -rho * (x[..., _k] - _self.center[_i]) / safe

        return AnalyticField(self.m, deriv, real=True)

    def conj(self):
        return self


class RadialPowerField(Field):
    """(1 - ||(x-c)/R||^2)^gamma inside the ball, 0 outside (gamma > 0)."""

    def __init__(self, m, gamma, radius=1.0, center=None):
        self.m = m
        self.gamma = float(gamma)
        self.radius = float(radius)
        self.center = np.zeros(m) if center is None else np.asarray(center, dtype=float)

    def _u(self, x):
        d = (x - self.center) / self.radius
        return np.sum(d * d, axis=-1)

    def __call__(self, x):
        x, sq = _as_points(x)
        u = self._u(x)
        out = np.where(u < 1.0, np.maximum(1.0 - u, 0.0) ** self.gamma, 0.0)
        return _unsqueeze(out.astype(complex), sq)

    def partial(self, k):
        def deriv(x, _self=self, _k=k):
            u = _self._u(x)
            base = np.where(u < 1.0, np.maximum(1.0 - u, 1e-300) ** (_self.gamma - 1.0), 0.0)
            return -_self.gamma * base * 2.0 * (x[..., _k] - _self.center[_k]) / _self.radius ** 2

        return AnalyticField(self.m, deriv, real=True)

    def conj(self):
        return self
