"""The Bochner-Martinelli-Koppelman kernel and its integral operators.

The kernel of complex dimension n and output degree q is the double form

    B_nq(zeta, z) = (n-1)!/(2^{q+1} pi^n) * |zeta-z|^{-2n}
                    * sum_{j, |J|=q} eps(j,J) (zbar_j(zeta) - zbar_j(z))
                      (star dzeta^{jJ}) ^ dzbar^J(z),

with star the Euclidean Hodge star of the zeta-slot, so each dz bar^J(z)
component is an (n, n-q-1)-form in zeta.  Degenerate degrees q = -1 and
q = n produce the zero kernel (no admissible index sets).

The volume operator integrates g ^ B over the domain with a small ball
around the evaluation point excluded; the kernel is odd under reflection
through z, so the dropped ball costs O(rho^2) and plain nested refinement
converges.  d-bar of the volume potential is taken by centered finite
differences of the numerically evaluated potential, with one shared
exclusion ball (radius rho + step, centered at the base point) for every
shifted evaluation so the quadrature node set does not jump inside the
difference stencil; the off-center exclusion bias, which is linear in
the shift and exactly computable as a ball average of the kernel, is
restored analytically before differencing.

Evaluation plans precompute, per (form, rule), the node arrays that
multiply the scalar factors s_j = conj(zeta_j - z_j)/|zeta-z|^{2n}; the
per-point work is then a handful of dot products, which keeps z-ladders
over hundreds of thousands of nodes at desk scale.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exterior import (DifferentialForm, _star_monomial, _wedge_monomial_sign,
                       _merge, eps_sign, monomial_frame_values, multi_indices,
                       top_wedge_constant)
from .geometry import boundary_rule, dist_boundary, volume_rule

__all__ = [
    "kernel_constant", "kernel_table", "kernel_eval", "kernel_norm",
    "cauchy_kernel_value", "norm_bound_samples", "SingularQuadratureConfig",
    "op_volume", "op_boundary", "dbar_potential", "reproduce_residual",
    "residual_report_csv", "form_norm_at",
]


def kernel_constant(n, q):
    return math.factorial(n - 1) / (2.0 ** (q + 1) * math.pi ** n)


@lru_cache(maxsize=None)
def kernel_table(n, q):
    """Symbolic kernel: {J: ((j, {(I_k, J_k): coeff}), ...)} with constants folded.

    J indexes the dzbar^J(z) part; each term's dict holds the zeta-monomial
    expansion of eps(j,J) * c_nq * star(dzeta^{sorted(j,J)}).
    """
    if q < 0 or q > n:
        return {}
    c = kernel_constant(n, q)
    table = {}
    for J in multi_indices(n, q):
        terms = []
        for j in range(1, n + 1):
            if j in J:
                continue
            L = tuple(sorted(J + (j,)))
            eps = eps_sign((j,) + J, L)
            star = _star_monomial(n, L, ())
            mono = {key: c * eps * val for key, val in star.items()}
            terms.append((j, mono))
        if terms:
            table[J] = tuple(terms)
    return table


def _scalar_factors(nodes, z, n):
    """s_j = conj(zeta_j - z_j)/|zeta - z|^{2n} at nodes, plus distances."""
    d = nodes - z
    dist2 = np.sum(d * d, axis=-1)
    dc = d[:, 0::2] + 1j * d[:, 1::2]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.conj(dc) / dist2[:, None] ** n
    return s, np.sqrt(dist2)


def kernel_eval(n, q, zeta, z):
    """B_nq at one (zeta, z) pair: {J: constant-coefficient (n, n-q-1)-form}."""
    zeta = np.asarray(zeta, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.allclose(zeta, z):
        raise ValueError("kernel singularity: zeta = z")
    s, _ = _scalar_factors(zeta[None, :], z, n)
    out = {}
    for J, terms in kernel_table(n, q).items():
        coeffs = {}
        for j, mono in terms:
            for key, coef in mono.items():
                coeffs[key] = coeffs.get(key, 0.0) + coef * s[0, j - 1]
        out[J] = DifferentialForm(n, n, n - q - 1, {
            key: complex(v) for key, v in coeffs.items() if v != 0})
    return out


def cauchy_kernel_value(zeta, z):
    """Coefficient of dzeta in the Cauchy kernel (1/2 pi i)/(zeta - z)."""
    return 1.0 / (2.0j * np.pi * (zeta - z))


def kernel_norm(n, q, zeta, z):
    """Pointwise double-form norm: monomials dz^I dzbar^J weigh 2^(|I|+|J|)."""
    forms = kernel_eval(n, q, zeta, z)
    total = 0.0
    for J, form in forms.items():
        for (I, Jk), c in form.coeffs.items():
            xi = np.asarray(c(zeta[None, :]), dtype=complex)
            total += 2.0 ** (q + len(I) + len(Jk)) * float(np.abs(xi[0]) ** 2)
    return math.sqrt(total)


def norm_bound_samples(n, q, count=100, seed=0, scale_range=(-6, 2)):
    """A_i = |B(zeta_i, z_i)| * |zeta_i - z_i|^{2n-1} over random pairs.

    Distances are swept over powers of two so stability across scales is
    visible; the kernel is homogeneous of degree -(2n-1), so A depends only
    on the direction of zeta - z.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        z = rng.uniform(-1, 1, 2 * n)
        direction = rng.standard_normal(2 * n)
        direction /= np.linalg.norm(direction)
        dist = 2.0 ** rng.uniform(*scale_range)
        zeta = z + dist * direction
        out.append((kernel_norm(n, q, zeta, z) * dist ** (2 * n - 1), dist))
    return np.array(out)


@dataclass
class SingularQuadratureConfig:
    base_level: int = 0
    refinement_steps: int = 3
    exclusion_factor: float = 2.0
    fd_exclusion_factor: float = 4.0
    fd_step_factor: float = 0.5
    margin_factor: float = 0.25

    def levels(self):
        return list(range(self.base_level, self.base_level + max(1, self.refinement_steps)))


def _form_coeff_values(form, nodes):
    return {J: np.asarray(c(nodes), dtype=complex)
            for (_, J), c in form.coeffs.items()}


class _VolumePlan:
    """Arrays for B^D_q g: value_J(z) = sum_i w_i sum_j P[J][j][i] s_j(i; z)."""

    def __init__(self, n, q, g, rule):
        if (g.p, g.q) != (0, q + 1):
            raise ValueError("volume operand must be a (0, q+1)-form")
        self.n, self.q, self.rule, self.g = n, q, rule, g
        self.fold = []
        for J, terms in kernel_table(n, q).items():
            for j, mono in terms:
                for (Ik, Jk), coef in mono.items():
                    for Jg in (key[1] for key in g.coeffs):
                        w = top_wedge_constant(n, (), Jg, Ik, Jk)
                        if w != 0.0:
                            self.fold.append((J, j, Jg, coef * w))
        gvals = _form_coeff_values(g, rule.nodes)
        self.plan = {}
        for J, j, Jg, w in self.fold:
            acc = self.plan.setdefault(J, {})
            cur = acc.setdefault(j, np.zeros(len(rule.weights), complex))
            cur += w * gvals[Jg]
        self.out_keys = list(multi_indices(n, q))

    def center_coefficients(self, point):
        """The fold coefficients A[J][j] evaluated at one point."""
        point = np.asarray(point, dtype=float)
        gvals = {J: complex(np.asarray(c(point[None, :]))[0])
                 for (_, J), c in self.g.coeffs.items()}
        out = {}
        for J, j, Jg, w in self.fold:
            acc = out.setdefault(J, {})
            acc[j] = acc.get(j, 0.0 + 0.0j) + w * gvals[Jg]
        return out

    def value(self, z, keep):
        s, _ = _scalar_factors(self.rule.nodes, np.asarray(z, float), self.n)
        w = self.rule.weights * keep
        out = {}
        for J in self.out_keys:
            acc = 0.0 + 0.0j
            for j, arr in self.plan.get(J, {}).items():
                acc += np.sum(w * arr * s[:, j - 1])
            out[J] = complex(acc)
        return out

    def keep_mask(self, center, radius):
        d = self.rule.nodes - np.asarray(center, float)
        return (np.sum(d * d, axis=-1) >= radius * radius).astype(float)


class _BoundaryPlan:
    """Arrays for B^{bD}_q f: density_J(i; z) = sum_j A[J][j][i] s_j(i; z)."""

    def __init__(self, n, q, f_b, rule):
        if (f_b.p, f_b.q) != (0, q):
            raise ValueError("boundary operand must be a (0, q)-form")
        self.n, self.q, self.rule = n, q, rule
        fvals = _form_coeff_values(f_b, rule.nodes)
        frame_cache = {}
        self.plan = {}
        for J, terms in kernel_table(n, q).items():
            acc = {}
            for j, mono in terms:
                for (Ik, Jk), coef in mono.items():
                    for Jf, fv in fvals.items():
                        sign = _wedge_monomial_sign(n, (), Jf, Ik, Jk)
                        if sign == 0:
                            continue
                        key = (Ik, _merge(Jf, Jk))
                        if key not in frame_cache:
                            frame_cache[key] = monomial_frame_values(
                                n, key[0], key[1], rule.tangents)
                        cur = acc.setdefault(j, np.zeros(len(rule.weights), complex))
                        cur += (coef * sign) * fv * frame_cache[key]
            self.plan[J] = acc
        self.out_keys = list(multi_indices(n, q))

    def value(self, z):
        s, _ = _scalar_factors(self.rule.nodes, np.asarray(z, float), self.n)
        out = {}
        for J in self.out_keys:
            acc = 0.0 + 0.0j
            for j, arr in self.plan.get(J, {}).items():
                acc += np.sum(self.rule.weights * arr * s[:, j - 1])
            out[J] = complex(acc)
        return out


def _value_norm(values, q):
    return math.sqrt(sum(2.0 ** q * abs(v) ** 2 for v in values.values()))


def form_norm_at(form, z):
    """Pointwise weighted norm of a (0,q)-form at a single point."""
    vals = {J: complex(np.asarray(c(np.asarray(z, float)[None, :]))[0])
            for (_, J), c in form.coeffs.items()}
    return _value_norm(vals, form.q)


def op_volume(g, z, domain, config=None):
    """B^D_q g(z) by exclusion quadrature over a refinement ladder.

    Returns the finest-level value, per-level values, level deltas and a
    flag when z sits within the exclusion radius of the boundary.
    """
    config = config or SingularQuadratureConfig()
    n = domain.n_complex
    q = g.q - 1
    z = np.asarray(z, dtype=float)
    per_level, flags = [], []
    for level in config.levels():
        rule = volume_rule(domain, level)
        plan = _VolumePlan(n, q, g, rule)
        rho = config.exclusion_factor * rule.spacing
        flags.append(bool(dist_boundary(domain, z) < rho))
        keep = plan.keep_mask(z, rho)
        per_level.append(plan.value(z, keep))
    deltas = [_value_norm({J: per_level[i + 1][J] - per_level[i][J]
                           for J in per_level[0]}, q)
              for i in range(len(per_level) - 1)]
    return {"value": per_level[-1], "per_level": per_level, "deltas": deltas,
            "boundary_flag": any(flags), "q": q}


def op_boundary(f_b, z, domain, config=None):
    """B^{bD}_q f(z) at an interior point (kernel is smooth on bD there)."""
    config = config or SingularQuadratureConfig()
    z = np.asarray(z, dtype=float)
    if dist_boundary(domain, z) <= 0:
        raise ValueError("evaluation point must be strictly inside the domain")
    n = domain.n_complex
    level = config.levels()[-1]
    rule = boundary_rule(domain, level)
    plan = _BoundaryPlan(n, f_b.q, f_b, rule)
    return {"value": plan.value(z), "q": f_b.q, "level": level}


def _dbar_from_partials(n, q, partials):
    """Assemble dbar coefficients from per-direction complex partials.

    partials: {j: {J': value}} with j the zbar_j direction (1-based).
    """
    out = {J: 0.0 + 0.0j for J in multi_indices(n, q + 1)}
    for j, comps in partials.items():
        for Jp, v in comps.items():
            if j in Jp:
                continue
            below = sum(1 for e in Jp if e < j)
            J = tuple(sorted(Jp + (j,)))
            out[J] += (-1.0) ** below * v
    return out


def dbar_potential(f, z, domain, config, level):
    """dbar_z of B^D_{q-1} f at z by centered differences of the potential.

    All stencil evaluations share one exclusion ball centered at the base
    point with radius rho + step, so the node set never changes inside the
    difference stencil.  The removed ball is not centered at the shifted
    points, which biases the potential linearly in the shift; the bias is
    the exact ball average of s_j times the local fold coefficient,
    int_{B(c,R)} s_j dV = (pi^n/n!) (cbar_j - ybar_j), and is added back
    analytically before differencing.  The leftover stencil error is
    O(rho^2) from the variation of the operand across the ball.
    """
    n = domain.n_complex
    q = f.q
    if q == 0:
        return {}
    z = np.asarray(z, dtype=float)
    rule = volume_rule(domain, level)
    plan = _VolumePlan(n, q - 1, f, rule)
    rho = config.fd_exclusion_factor * rule.spacing
    h = config.fd_step_factor * rho
    keep = plan.keep_mask(z, rho + h)
    center_coef = plan.center_coefficients(z)
    ball_factor = math.pi ** n / math.factorial(n)

    def corrected(y):
        vals = plan.value(y, keep)
        d = y - z
        dc = d[0::2] + 1j * d[1::2]
        for J, terms in center_coef.items():
            for j, a in terms.items():
                vals[J] += a * ball_factor * (-np.conj(dc[j - 1]))
        return vals

    partials = {}
    for j in range(1, n + 1):
        dx = np.zeros(2 * n)
        dx[2 * j - 2] = h
        dy = np.zeros(2 * n)
        dy[2 * j - 1] = h
        px = corrected(z + dx)
        mx = corrected(z - dx)
        py = corrected(z + dy)
        my = corrected(z - dy)
        comps = {}
        for Jp in px:
            ddx = (px[Jp] - mx[Jp]) / (2.0 * h)
            ddy = (py[Jp] - my[Jp]) / (2.0 * h)
            comps[Jp] = 0.5 * (ddx + 1j * ddy)
        partials[j] = comps
    return _dbar_from_partials(n, q - 1, partials)


def reproduce_residual(f, f_b, dbar_f, domain, z_points, config=None):
    """Three-term reproduction residuals over a refinement ladder.

    Per evaluation point and level the defect of
    f(z) = B^{bD}_q f_b(z) - B^D_q (dbar f)(z) - dbar_z B^D_{q-1} f(z)
    is reported with the norms of the three terms.  Points closer to the
    boundary than margin_factor * domain scale are skipped and listed.
    """
    config = config or SingularQuadratureConfig()
    n = domain.n_complex
    q = f.q
    scale = domain.radius if domain.radius is not None else 1.0
    margin = config.margin_factor * scale
    z_points = np.atleast_2d(np.asarray(z_points, dtype=float))
    inside = dist_boundary(domain, z_points) >= margin
    flagged = [z_points[i] for i in range(len(z_points)) if not inside[i]]
    zs = z_points[inside]
    keys = list(multi_indices(n, q))
    f_coeff = {J: f.coefficient((), J) for J in keys}
    rows = []
    for level in config.levels():
        vol_rule = volume_rule(domain, level)
        bnd_rule = boundary_rule(domain, level)
        bplan = _BoundaryPlan(n, q, f_b, bnd_rule)
        vplan = _VolumePlan(n, q, dbar_f, vol_rule) if dbar_f is not None else None
        rho = config.exclusion_factor * vol_rule.spacing
        for z in zs:
            bval = bplan.value(z)
            if vplan is not None:
                vval = vplan.value(z, vplan.keep_mask(z, rho))
            else:
                vval = {J: 0.0 + 0.0j for J in keys}
            dval = dbar_potential(f, z, domain, config, level)
            if not dval:
                dval = {J: 0.0 + 0.0j for J in keys}
            defect = {}
            for J in keys:
                fz = complex(np.asarray(f_coeff[J](z[None, :]))[0])
                defect[J] = fz - (bval[J] - vval[J] - dval[J])
            rows.append({
                "z": z.copy(), "level": level,
                "residual": _value_norm(defect, q),
                "boundary_term_norm": _value_norm(bval, q),
                "volume_term_norm": _value_norm(vval, q),
                "potential_dbar_norm": _value_norm(dval, q),
            })
    return {"rows": rows, "flagged": flagged, "q": q}


def residual_report_csv(result, path, n):
    cols = [f"z{k + 1}" for k in range(2 * n)] + [
        "residual", "boundary_term_norm", "volume_term_norm",
        "potential_dbar_norm", "level"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in result["rows"]:
            vals = [f"{v:.17g}" for v in row["z"]]
            vals += [f"{row[c]:.17g}" for c in cols[2 * n:-1]]
            vals.append(str(row["level"]))
            w.writerow(vals)
    return path
