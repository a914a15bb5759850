"""First-order operators Q = sum_j a_j d_j + b and weak boundary values.

The formal adjoint is taken against the sesquilinear pairing
(f, g) = int f conj(g) dV, so Q* v = -sum_j (conj(a_j) d_j v
+ conj(d_j a_j) v) + conj(b) v and the Green-Stokes identity reads

    (Qu, v)_D - (u, Q*v)_D = int_{bD} (sum_j a_j nu_j) u conj(v) dS.

A function u in L^p with Qu known in L^p has weak boundary value u_b when
the boundary term of this identity can be replaced by u_b for every test
function that is smooth up to the physical boundary (and supported away
from any truncation faces of a half-space patch).

For the Cauchy-Riemann system on (0,q)-forms the same circle of ideas is
expressed two ways and cross-checked:

  route A (wedge):  int_{bD} i*(f_b ^ phi) = int_D dbar(f) ^ phi
                    + (-1)^q int_D f ^ dbar(phi),  phi of type (n, n-q-1);
  route B (inner):  with g = (-1)^(q+1) * star(conj(phi)) of type (0,q+1),
                    int_{bD} <dbar(r) ^ f_b, g> dS = (dbar f, g)_D
                    + (-1)^(q+1) (f, vartheta g)_D,  vartheta = -star d star.

The two routes integrate pointwise-equal densities, so their agreement is
limited only by roundoff, independently of the quadrature level.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .fields import AnalyticField, Field, PolyField, as_field
from .exterior import (DifferentialForm, integrate_boundary, integrate_top,
                       multi_indices)
from .geometry import boundary_rule, volume_rule

__all__ = [
    "FirstOrderOperator", "inner_volume", "form_inner_volume", "vartheta",
    "dbar_r_form", "dholo_r_form", "weak_bv_residual", "dbar_bv_residual",
    "pairing_equivalence_check", "equivalence_report",
    "normal_tangential_split", "covector_normal_split",
    "perturb_boundary_value", "scalar_test_family", "form_test_family",
    "normal_symbol_values",
]


class FirstOrderOperator:
    """Q u = sum_j a_j d_j u + b u acting on scalar fields on R^m."""

    def __init__(self, m, a, b=0.0):
        self.m = m
        self.a = [as_field(c, m) for c in a]
        if len(self.a) != m:
            raise ValueError("need one coefficient per coordinate")
        self.b = as_field(b, m)

    def apply(self, u):
        out = self.b * u
        for j, aj in enumerate(self.a):
            out = out + aj * u.partial(j)
        return out

    __call__ = apply

    def formal_adjoint(self):
        a_star = [-(aj.conj()) for aj in self.a]
        b_star = self.b.conj()
        for j, aj in enumerate(self.a):
            b_star = b_star - aj.conj().partial(j)
        return FirstOrderOperator(self.m, a_star, b_star)

    def principal_symbol(self, x, xi):
        """sigma(x, xi) = i sum_j a_j(x) xi_j."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        total = 0.0 + 0.0j
        for j, aj in enumerate(self.a):
            total = total + np.asarray(aj(x), dtype=complex) * xi[..., j]
        return 1j * total

    def green_stokes_residual(self, domain, u, v, level=1):
        """Defect of the Green-Stokes identity at the given quadrature level."""
        vol = volume_rule(domain, level)
        bnd = boundary_rule(domain, level)
        lhs = inner_volume(vol, self.apply(u), v)
        mid = inner_volume(vol, u, self.formal_adjoint().apply(v))
        sig = normal_symbol_values(self, domain, bnd)
        uv = np.asarray(u(bnd.nodes), dtype=complex) * np.conj(
            np.asarray(v(bnd.nodes), dtype=complex))
        boundary = complex(np.sum(bnd.weights * sig * uv))
        return {
            "volume_lhs": lhs, "volume_rhs": mid, "boundary": boundary,
            "residual": abs(lhs - mid - boundary),
        }


def normal_symbol_values(op, domain, rule):
    """sum_j a_j nu_j at the nodes of a boundary rule (complex array)."""
    nu = rule.nu
    out = np.zeros(len(rule.weights), dtype=complex)
    for j, aj in enumerate(op.a):
        out += np.asarray(aj(rule.nodes), dtype=complex) * nu[:, j]
    return out


def inner_volume(rule, f, g):
    """(f, g) = int f conj(g) dV over an interior rule."""
    fv = np.asarray(f(rule.nodes), dtype=complex)
    gv = np.asarray(g(rule.nodes), dtype=complex)
    return complex(np.sum(rule.weights * fv * np.conj(gv)))


def form_inner_volume(rule, F, G):
    """(F, G) = int <F, G> dV for forms of the same bidegree."""
    vals = np.asarray(F.inner(G)(rule.nodes), dtype=complex)
    return complex(np.sum(rule.weights * vals))


def vartheta(g):
    """Formal adjoint of dbar on forms: vartheta = -star d' star."""
    return g.star().dholo().star().scale(-1.0)


def _gradient_component(domain, j, conjugated):
    sign = 1.0 if conjugated else -1.0

    def val(x, j=j, sign=sign):
        g = domain.defining.gradient(np.asarray(x, dtype=float))
        return 0.5 * (g[..., 2 * j - 2] + sign * 1j * g[..., 2 * j - 1])

    return AnalyticField(domain.m, val)


def dbar_r_form(domain):
    """dbar of the defining function as a (0,1)-form.

    Coefficients come from the unit outward direction, so they equal dbar r
    on the boundary itself, which is where this form is meant to be used.
    """
    n = domain.n_complex
    coeffs = {((), (j,)): _gradient_component(domain, j, True)
              for j in range(1, n + 1)}
    return DifferentialForm(n, 0, 1, coeffs)


def dholo_r_form(domain):
    """Holomorphic part of dr as a (1,0)-form; boundary use only."""
    n = domain.n_complex
    coeffs = {((j,), ()): _gradient_component(domain, j, False)
              for j in range(1, n + 1)}
    return DifferentialForm(n, 1, 0, coeffs)


def weak_bv_residual(domain, op, u, u_b, F, tests, level=1):
    """Residuals of the weak boundary value identity for scalar Q.

    F is the interior data Qu.  Each test phi (assumed normalized; the
    families below are sup-normalized) contributes
    (F, phi) - (u, Q* phi) - int_{bD} (sum a_j nu_j) u_b conj(phi) dS.
    """
    if not tests:
        raise ValueError("empty test family")
    vol = volume_rule(domain, level)
    bnd = boundary_rule(domain, level)
    q_star = op.formal_adjoint()
    sig = normal_symbol_values(op, domain, bnd)
    ub_vals = np.asarray(u_b(bnd.nodes), dtype=complex)
    records = []
    for idx, phi in enumerate(tests):
        data = inner_volume(vol, F, phi)
        interior = inner_volume(vol, u, q_star.apply(phi))
        phib = np.conj(np.asarray(phi(bnd.nodes), dtype=complex))
        boundary = complex(np.sum(bnd.weights * sig * ub_vals * phib))
        records.append({
            "test": idx, "level": level,
            "data_term": data, "interior_term": interior,
            "boundary_term": boundary, "residual": abs(data - interior - boundary),
        })
    return {"records": records,
            "max_residual": max(r["residual"] for r in records)}


def _dbar_bv_single(domain, f, f_b, F, phi, vol, bnd):
    q = f.q
    sign = -1.0 if q % 2 else 1.0
    volume = integrate_top(F.wedge(phi), vol.nodes, vol.weights) + \
        sign * integrate_top(f.wedge(phi.dbar()), vol.nodes, vol.weights)
    boundary = integrate_boundary(f_b.wedge(phi), bnd.nodes, bnd.weights, bnd.tangents)
    return {"volume": volume, "boundary": boundary, "residual": abs(boundary - volume)}


def dbar_bv_residual(domain, f, f_b, F, tests, level=1):
    """Stokes defects for the Cauchy-Riemann boundary-value identity.

    tests: a single (n, n-q-1) form or a family; returns per-test records
    and the max residual over the family.
    """
    if isinstance(tests, DifferentialForm):
        tests = [tests]
    if not tests:
        raise ValueError("empty test family")
    vol = volume_rule(domain, level)
    bnd = boundary_rule(domain, level)
    records = []
    for idx, phi in enumerate(tests):
        rec = _dbar_bv_single(domain, f, f_b, F, phi, vol, bnd)
        rec["test"] = idx
        rec["level"] = level
        records.append(rec)
    return {"records": records,
            "max_residual": max(r["residual"] for r in records)}


def pairing_equivalence_check(domain, f, f_b, F, phi, level=1):
    """Run routes A and B for one test form and report agreement.

    Route agreement (volume_route_diff, boundary_route_diff) is a pointwise
    algebraic identity evaluated on shared nodes, so it sits at roundoff;
    the Stokes gaps carry the actual quadrature error.
    """
    q = f.q
    n = f.n
    if (phi.p, phi.q) != (n, n - q - 1):
        raise ValueError("test form must have type (n, n-q-1)")
    vol = volume_rule(domain, level)
    bnd = boundary_rule(domain, level)
    route_a = _dbar_bv_single(domain, f, f_b, F, phi, vol, bnd)

    sgn = -1.0 if (q + 1) % 2 else 1.0   # (-1)^(q+1)
    g = phi.conj().star().scale(sgn)
    b_volume = form_inner_volume(vol, F, g) + \
        sgn * form_inner_volume(vol, f, vartheta(g))
    nu_wedge = dbar_r_form(domain).wedge(f_b)
    dens = np.asarray(nu_wedge.inner(g)(bnd.nodes), dtype=complex)
    b_boundary = complex(np.sum(bnd.weights * dens))
    return {
        "q": q,
        "route_form_volume": route_a["volume"],
        "route_form_boundary": route_a["boundary"],
        "route_inner_volume": b_volume,
        "route_inner_boundary": b_boundary,
        "stokes_gap_form": route_a["residual"],
        "stokes_gap_inner": abs(b_boundary - b_volume),
        "volume_route_diff": abs(route_a["volume"] - b_volume),
        "boundary_route_diff": abs(route_a["boundary"] - b_boundary),
    }


def equivalence_report(domain, f, f_b, F, tests, level=1):
    """pairing_equivalence_check over a test family, with family maxima."""
    if not tests:
        raise ValueError("empty test family")
    records = [pairing_equivalence_check(domain, f, f_b, F, phi, level)
               for phi in tests]
    return {
        "records": records,
        "max_volume_route_diff": max(r["volume_route_diff"] for r in records),
        "max_boundary_route_diff": max(r["boundary_route_diff"] for r in records),
        "max_stokes_gap_form": max(r["stokes_gap_form"] for r in records),
        "max_stokes_gap_inner": max(r["stokes_gap_inner"] for r in records),
    }


def normal_tangential_split(op, normal_axis=0):
    """Split the adjoint as Q* = -conj(a_1) d/dx_1 + Q' (half-space model).

    Returns (conj(a_1), Q') with Q' carrying the tangential derivatives and
    all zeroth-order terms.  Only the axis-aligned half-space frame is
    supported; the conjugate appears because the adjoint is taken against
    the Hermitian pairing.
    """
    if normal_axis != 0:
        raise ValueError("half-space model has boundary normal along axis 0")
    adj = op.formal_adjoint()
    a_prime = list(adj.a)
    a_prime[0] = as_field(0.0, op.m)
    q_prime = FirstOrderOperator(op.m, a_prime, adj.b)
    return op.a[0].conj(), q_prime


def covector_normal_split(n, q, nu_coeffs, omega_coeffs):
    """Split a (0,q)-covector omega = nu_bar ^ alpha + beta at one point.

    nu_coeffs maps j -> coefficient of dzbar_j in the (0,1) direction
    (e.g. dbar r at a boundary point); omega_coeffs maps ascending tuples
    J -> coefficient.  beta is the part orthogonal to nu_bar ^ (anything),
    which is what survives tangential pairing against test forms.
    Returns (normal, tangential, alpha) coefficient dicts.
    """
    basis_q = multi_indices(n, q)
    if q == 0:
        return {}, dict(omega_coeffs), {}
    basis_qm1 = multi_indices(n, q - 1)
    row = {J: i for i, J in enumerate(basis_q)}
    A = np.zeros((len(basis_q), len(basis_qm1)), dtype=complex)
    for col, Jp in enumerate(basis_qm1):
        for j, c in nu_coeffs.items():
            if j in Jp:
                continue
            below = sum(1 for e in Jp if e < j)
            J = tuple(sorted(Jp + (j,)))
            A[row[J], col] += c * (-1.0) ** below
    w = np.array([complex(omega_coeffs.get(J, 0.0)) for J in basis_q])
    alpha, *_ = np.linalg.lstsq(A, w, rcond=None)
    normal_vec = A @ alpha
    tang_vec = w - normal_vec
    normal = {J: normal_vec[i] for J, i in row.items() if abs(normal_vec[i]) > 0}
    tangential = {J: tang_vec[i] for J, i in row.items() if abs(tang_vec[i]) > 0}
    alpha_d = {Jp: alpha[c] for c, Jp in enumerate(basis_qm1) if abs(alpha[c]) > 0}
    return normal, tangential, alpha_d


def perturb_boundary_value(domain, f_b, gamma):
    """f_b + dbar(r) ^ gamma: invisible to every admissible test pairing."""
    return f_b + dbar_r_form(domain).wedge(gamma)


def _random_poly(m, degree, rng):
    terms = {}
    for alpha in _exponents(m, degree):
        c = rng.standard_normal() + 1j * rng.standard_normal()
        terms[alpha] = complex(c)
    return PolyField(m, terms)


def _exponents(m, degree):
    if m == 0:
        yield ()
        return
    for d in range(degree + 1):
        for rest in _exponents(m - 1, degree - d):
            yield (d,) + rest


def _domain_window(domain):
    """Cutoff that kills truncation faces of a half-space patch; else None."""
    if domain.kind != "half-space-patch":
        return None
    from .fields import PlateauField, SmoothStepField
    lo, hi = domain.bounds[0]
    depth = hi - lo
    w = SmoothStepField(domain.m, 0, lo + 0.15 * depth, lo + 0.4 * depth)
    for k in range(1, domain.m):
        a, b = domain.bounds[k]
        half = (b - a) / 2.0
        w = w * PlateauField(domain.m, (k,), ((a + b) / 2.0,),
                             0.35 * half, 0.85 * half)
    return w


def _sup_normalize(field, probe_nodes):
    vals = np.abs(np.asarray(field(probe_nodes), dtype=complex))
    peak = float(np.max(vals))
    return field if peak == 0 else field * (1.0 / peak)


def scalar_test_family(domain, count, seed=0, degree=2):
    """Sup-normalized smooth scalar tests, admissible for the domain kind."""
    rng = np.random.default_rng(seed)
    window = _domain_window(domain)
    probe = volume_rule(domain, 0).nodes
    out = []
    for _ in range(count):
        f = _random_poly(domain.m, degree, rng)
        if window is not None:
            f = f * window
        out.append(_sup_normalize(f, probe))
    return out


def form_test_family(domain, p, q, count, seed=0, degree=1):
    """Forms of type (p,q) with random polynomial (times window) coefficients."""
    rng = np.random.default_rng(seed)
    n = domain.n_complex
    window = _domain_window(domain)
    probe = volume_rule(domain, 0).nodes
    out = []
    for _ in range(count):
        coeffs = {}
        for I in multi_indices(n, p):
            for J in multi_indices(n, q):
                c = _random_poly(domain.m, degree, rng)
                if window is not None:
                    c = c * window
                coeffs[(I, J)] = _sup_normalize(c, probe)
        out.append(DifferentialForm(n, p, q, coeffs))
    return out
