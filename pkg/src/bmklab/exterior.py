"""Exterior algebra of (p,q)-forms on C^n with a first-principles Hodge star.

Conventions, fixed once and validated by the test suite rather than assumed:

* points live in R^{2n} with z_j = x_{2j} + i x_{2j+1} (0-based coordinates);
* monomials are written dz^I ^ dzbar^J with both multi-indices strictly
  increasing and 1-based, dz factors before dzbar factors;
* the metric makes the real coordinate covectors orthonormal, so
  <dz_j, dz_j> = 2 and the volume form is dx_1^dy_1^...^dx_n^dy_n;
* the star operator is the Euclidean star of the underlying real structure,
  extended complex-linearly.  It is *derived* per monomial by expanding into
  real covectors and back, never tabulated by hand, and satisfies the pairing
  identity <alpha, beta> dV = alpha ^ star(conj(beta)).

With these choices star(dzeta) = -i dzeta in one variable, dz^dzbar has top
density -2i, star maps (p,q) to (n-q,n-p), and star(star(w)) = (-1)^(p+q) w.
"""

from __future__ import annotations

import json
from functools import lru_cache

import numpy as np

from .fields import (Field, PolyField, as_field, dz_part, dzbar_part)

__all__ = [
    "eps_sign", "multi_indices", "DifferentialForm", "wedge", "hodge_star",
    "top_density", "dbar", "dholo", "top_wedge_constant",
]


def _sort_sign(seq):
    """Sign of the permutation sorting seq ascending; 0 on repeats."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
            elif seq[j] == seq[j + 1]:
                return 0, tuple(seq)
    return sign, tuple(seq)


def eps_sign(a, b):
    """Generalized Kronecker sign: the permutation sign taking a to b.

    Returns 0 unless a and b are repeat-free and equal as sets.
    """
    a, b = tuple(a), tuple(b)
    if len(a) != len(b):
        return 0
    sa, ka = _sort_sign(a)
    sb, kb = _sort_sign(b)
    if sa == 0 or sb == 0 or ka != kb:
        return 0
    return sa * sb


def multi_indices(n, k):
    """All strictly increasing k-tuples with entries in 1..n."""
    if k < 0:
        return []
    if k == 0:
        return [()]
    out = []

    def rec(start, prefix):
        if len(prefix) == k:
            out.append(tuple(prefix))
            return
        for v in range(start, n + 1):
            rec(v + 1, prefix + [v])

    rec(1, [])
    return out


# ---------------------------------------------------------------------------
# monomial-level star, computed through the real covector basis

def _wedge_expansions(e1, e2):
    """Wedge two {index-tuple: coeff} expansions of real covector monomials."""
    out = {}
    for a1, c1 in e1.items():
        for a2, c2 in e2.items():
            sign, key = _sort_sign(a1 + a2)
            if sign == 0:
                continue
            out[key] = out.get(key, 0.0) + sign * c1 * c2
    return {k: v for k, v in out.items() if v != 0}


@lru_cache(maxsize=None)
def _complex_to_real(n, I, J):
    """Expand dz^I ^ dzbar^J over real covector monomials (0-based indices)."""
    exp = {(): 1.0 + 0.0j}
    for i in I:
        exp = _wedge_expansions(exp, {(2 * i - 2,): 1.0, (2 * i - 1,): 1.0j})
    for j in J:
        exp = _wedge_expansions(exp, {(2 * j - 2,): 1.0, (2 * j - 1,): -1.0j})
    return exp


def _wedge_tagged(t1, t2):
    """Wedge two {((kind,idx),...): coeff} expansions in the complex basis.

    kind 0 tags dz factors, kind 1 tags dzbar; canonical order sorts by
    (kind, idx), which is exactly 'all dz first, ascending'.
    """
    out = {}
    for a1, c1 in t1.items():
        for a2, c2 in t2.items():
            sign, key = _sort_sign(a1 + a2)
            if sign == 0:
                continue
            out[key] = out.get(key, 0.0) + sign * c1 * c2
    return {k: v for k, v in out.items() if v != 0}


@lru_cache(maxsize=None)
def _real_to_complex(n, A):
    """Expand a real covector monomial over complex monomials (I, J)."""
    exp = {(): 1.0 + 0.0j}
    for k in A:
        j = k // 2 + 1
        if k % 2 == 0:   # dx_j = (dz_j + dzbar_j)/2
            factor = {((0, j),): 0.5, ((1, j),): 0.5}
        else:            # dy_j = (dz_j - dzbar_j)/(2i)
            factor = {((0, j),): -0.5j, ((1, j),): 0.5j}
        exp = _wedge_tagged(exp, factor)
    out = {}
    for tagged, c in exp.items():
        I = tuple(idx for kind, idx in tagged if kind == 0)
        J = tuple(idx for kind, idx in tagged if kind == 1)
        out[(I, J)] = out.get((I, J), 0.0) + c
    return {k: v for k, v in out.items() if v != 0}


@lru_cache(maxsize=None)
def _star_monomial(n, I, J):
    """star(dz^I ^ dzbar^J) as {(I', J'): complex constant}."""
    full = tuple(range(2 * n))
    out = {}
    for A, cA in _complex_to_real(n, I, J).items():
        comp = tuple(k for k in full if k not in A)
        sign, _ = _sort_sign(A + comp)
        if sign == 0:
            continue
        for mono, c in _real_to_complex(n, comp).items():
            out[mono] = out.get(mono, 0.0) + cA * sign * c
    return {k: v for k, v in out.items() if v != 0}


@lru_cache(maxsize=None)
def _top_real_constant(n):
    """Coefficient of the full real volume monomial in dz^(1..n)^dzbar^(1..n)."""
    full_c = tuple(range(1, n + 1))
    exp = _complex_to_real(n, full_c, full_c)
    return exp[tuple(range(2 * n))]


@lru_cache(maxsize=None)
def top_wedge_constant(n, I1, J1, I2, J2):
    """Top density of (dz^I1^dzbar^J1) ^ (dz^I2^dzbar^J2); 0 if not top degree."""
    sign = _wedge_monomial_sign(n, I1, J1, I2, J2)
    if sign == 0:
        return 0.0
    I, J = _merge(I1, I2), _merge(J1, J2)
    if len(I) != n or len(J) != n:
        return 0.0
    return sign * _top_real_constant(n)


def _merge(a, b):
    return tuple(sorted(a + b))


@lru_cache(maxsize=None)
def _wedge_monomial_sign(n, I1, J1, I2, J2):
    """Sign from (dz^I1^dzbar^J1)^(dz^I2^dzbar^J2) -> canonical monomial."""
    si, _ = _sort_sign(I1 + I2)
    sj, _ = _sort_sign(J1 + J2)
    if si == 0 or sj == 0:
        return 0
    # move the dz^I2 block (|I2| factors) left across dzbar^J1 (|J1| factors)
    return si * sj * (-1) ** (len(I2) * len(J1))


# ---------------------------------------------------------------------------

class DifferentialForm:
    """A (p,q)-form: {(I, J): coefficient field} over canonical monomials."""

    def __init__(self, n, p, q, coeffs=None):
        self.n = n
        self.p = p
        self.q = q
        self.coeffs = {}
        for (I, J), c in (coeffs or {}).items():
            I, J = tuple(I), tuple(J)
            if len(I) != p or len(J) != q:
                raise ValueError(f"monomial ({I},{J}) does not match bidegree ({p},{q})")
            c = as_field(c, 2 * n)
            if not c.is_zero:
                self.coeffs[(I, J)] = c

    @property
    def bidegree(self):
        return (self.p, self.q)

    @property
    def degree(self):
        return self.p + self.q

    @property
    def is_zero(self):
        return not self.coeffs

    @classmethod
    def zero(cls, n, p, q):
        return cls(n, p, q)

    @classmethod
    def monomial(cls, n, I, J, coeff=1.0):
        return cls(n, len(I), len(J), {(tuple(I), tuple(J)): coeff})

    def coefficient(self, I, J):
        return self.coeffs.get((tuple(I), tuple(J)), PolyField(2 * self.n, {}))

    def _same_shape(self, other):
        if (self.n, self.p, self.q) != (other.n, other.p, other.q):
            raise ValueError("bidegree/dimension mismatch")

    def __add__(self, other):
        self._same_shape(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return DifferentialForm(self.n, self.p, self.q, out)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, c):
        return DifferentialForm(self.n, self.p, self.q,
                                {k: v * c for k, v in self.coeffs.items()})

    def conj(self):
        """Complex conjugate; swaps (p,q) -> (q,p) with the reorder sign."""
        sign = (-1) ** (self.p * self.q)
        out = {}
        for (I, J), c in self.coeffs.items():
            out[(J, I)] = c.conj() * sign
        return DifferentialForm(self.n, self.q, self.p, out)

    def wedge(self, other):
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        p, q = self.p + other.p, self.q + other.q
        if p > self.n or q > self.n:
            return DifferentialForm.zero(self.n, min(p, self.n), min(q, self.n))
        # gather contributions keyed symmetrically so that a^b and b^a sum the
        # same floats in the same order (graded commutativity stays exact)
        buckets = {}
        for (I1, J1), c1 in self.coeffs.items():
            for (I2, J2), c2 in other.coeffs.items():
                sign = _wedge_monomial_sign(self.n, I1, J1, I2, J2)
                if sign == 0:
                    continue
                key = (_merge(I1, I2), _merge(J1, J2))
                pairkey = tuple(sorted([(I1, J1), (I2, J2)]))
                buckets.setdefault(key, []).append((pairkey, sign, c1, c2))
        out = {}
        for key, contribs in buckets.items():
            contribs.sort(key=lambda t: t[0])
            total = None
            for _, sign, c1, c2 in contribs:
                term = (c1 * c2) * float(sign)
                total = term if total is None else total + term
            out[key] = total
        return DifferentialForm(self.n, p, q, out)

    def star(self):
        """Hodge star, (p,q) -> (n-q, n-p), complex-linear."""
        out = {}
        for (I, J), c in self.coeffs.items():
            for mono, const in _star_monomial(self.n, I, J).items():
                term = c * const
                out[mono] = out[mono] + term if mono in out else term
        return DifferentialForm(self.n, self.n - self.q, self.n - self.p, out)

    def dbar(self):
        """Antiholomorphic exterior derivative, (p,q) -> (p,q+1)."""
        out = {}
        for (I, J), c in self.coeffs.items():
            for j in range(1, self.n + 1):
                if j in J:
                    continue
                dc = dzbar_part(c, j - 1)
                if dc.is_zero:
                    continue
                below = sum(1 for l in J if l < j)
                sign = (-1) ** (self.p + below)
                key = (I, tuple(sorted(J + (j,))))
                term = dc * float(sign)
                out[key] = out[key] + term if key in out else term
        return DifferentialForm(self.n, self.p, self.q + 1, out)

    def dholo(self):
        """Holomorphic exterior derivative, (p,q) -> (p+1,q)."""
        out = {}
        for (I, J), c in self.coeffs.items():
            for j in range(1, self.n + 1):
                if j in I:
                    continue
                dc = dz_part(c, j - 1)
                if dc.is_zero:
                    continue
                below = sum(1 for l in I if l < j)
                sign = (-1) ** below
                key = (tuple(sorted(I + (j,))), J)
                term = dc * float(sign)
                out[key] = out[key] + term if key in out else term
        return DifferentialForm(self.n, self.p + 1, self.q, out)

    def top_density(self):
        """For an (n,n)-form: the field c with self = c dV_{R^{2n}}."""
        if (self.p, self.q) != (self.n, self.n):
            raise ValueError("top_density needs an (n,n)-form")
        full = tuple(range(1, self.n + 1))
        c = self.coefficient(full, full)
        return c * complex(_top_real_constant(self.n))

    def inner(self, other):
        """Pointwise Hermitian inner product field; monomials weigh 2^(p+q)."""
        self._same_shape(other)
        weight = 2.0 ** (self.p + self.q)
        total = None
        for key, c in self.coeffs.items():
            if key not in other.coeffs:
                continue
            term = (c * other.coeffs[key].conj()) * weight
            total = term if total is None else total + term
        if total is None:
            return PolyField(2 * self.n, {})
        return total

    def evaluate(self, x, vectors):
        """Multilinear evaluation on len = degree many vectors in R^{2n}."""
        vectors = np.asarray(vectors, dtype=float)
        if vectors.shape != (self.degree, 2 * self.n):
            raise ValueError("need one vector per form degree")
        total = 0.0 + 0.0j
        for (I, J), c in self.coeffs.items():
            rows = []
            for i in I:
                rows.append(vectors[:, 2 * i - 2] + 1j * vectors[:, 2 * i - 1])
            for j in J:
                rows.append(vectors[:, 2 * j - 2] - 1j * vectors[:, 2 * j - 1])
            det = np.linalg.det(np.array(rows)) if rows else 1.0
            total += complex(c(np.asarray(x, dtype=float))) * det
        return total

    def coeff_values(self, x):
        """Evaluate every coefficient at points x: {(I,J): array}."""
        return {k: c(x) for k, c in self.coeffs.items()}

    def pointwise_norm(self, x):
        """sqrt(<w,w>) at points x, with the 2^(p+q) monomial weights."""
        w = 2.0 ** (self.p + self.q)
        acc = None
        for c in self.coeffs.values():
            v = np.abs(np.asarray(c(x))) ** 2
            acc = v if acc is None else acc + v
        if acc is None:
            return np.zeros(np.asarray(x, dtype=float).shape[:-1])
        return np.sqrt(w * acc)

    # -- serialization ------------------------------------------------------

    def to_json(self):
        terms = []
        for (I, J), c in self.coeffs.items():
            if not isinstance(c, PolyField):
                raise ValueError("only polynomial coefficients serialize to JSON")
            poly = [{"powers": list(a), "re": v.real, "im": v.imag}
                    for a, v in sorted(c.terms.items())]
            terms.append({"dz": list(I), "dzbar": list(J), "poly": poly})
        return json.dumps({"n": self.n, "bidegree": [self.p, self.q],
                           "terms": terms}, indent=None, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        n = data["n"]
        p, q = data["bidegree"]
        coeffs = {}
        for t in data["terms"]:
            terms = {tuple(e["powers"]): complex(e["re"], e["im"]) for e in t["poly"]}
            coeffs[(tuple(t["dz"]), tuple(t["dzbar"]))] = PolyField(2 * n, terms)
        return cls(n, p, q, coeffs)


def monomial_frame_values(n, I, J, frames):
    """Evaluate dz^I^dzbar^J on batched vector tuples.

    frames has shape (N, k, 2n) with k = |I|+|J|; returns a complex (N,) array
    of determinants det[factor_a(frame_b)].
    """
    frames = np.asarray(frames, dtype=float)
    N, k, _ = frames.shape
    if k != len(I) + len(J):
        raise ValueError("frame size does not match monomial degree")
    if k == 0:
        return np.ones(N, dtype=complex)
    M = np.empty((N, k, k), dtype=complex)
    row = 0
    for i in I:
        M[:, row, :] = frames[:, :, 2 * i - 2] + 1j * frames[:, :, 2 * i - 1]
        row += 1
    for j in J:
        M[:, row, :] = frames[:, :, 2 * j - 2] - 1j * frames[:, :, 2 * j - 1]
        row += 1
    return np.linalg.det(M)


def batch_pullback_density(form, nodes, tangents):
    """Density of the boundary pullback of a (2n-1)-form against dS.

    nodes: (N, 2n) boundary points; tangents: (N, 2n-1, 2n) oriented
    orthonormal tangent frames.  Returns complex (N,).
    """
    if form.degree != 2 * form.n - 1:
        raise ValueError("pullback density needs a (2n-1)-form")
    out = np.zeros(len(nodes), dtype=complex)
    for (I, J), c in form.coeffs.items():
        out += np.asarray(c(nodes), dtype=complex) * monomial_frame_values(form.n, I, J, tangents)
    return out


def integrate_top(form, nodes, weights):
    """Integrate an (n,n)-form over interior nodes via its density against dV."""
    dens = form.top_density()
    return complex(np.sum(np.asarray(weights) * np.asarray(dens(nodes), dtype=complex)))


def integrate_boundary(form, nodes, weights, tangents):
    """Integrate a (2n-1)-form over boundary nodes via its pullback density."""
    dens = batch_pullback_density(form, nodes, tangents)
    return complex(np.sum(np.asarray(weights) * dens))


# module-level aliases matching the operation vocabulary

def wedge(a, b):
    return a.wedge(b)


def hodge_star(a):
    return a.star()


def top_density(a):
    return a.top_density()


def dbar(a):
    return a.dbar()


def dholo(a):
    return a.dholo()
