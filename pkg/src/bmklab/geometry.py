"""Domains, defining functions, boundary frames and nested quadrature rules.

Supported regions: balls and ellipsoids in R^m (complex dimension n = m/2 when
forms are involved), axis-aligned interval boxes, and half-space patches
{x_1 < 0} truncated to a box.  Defining functions are scaled so the gradient
has unit length on the boundary; boundary rules carry outward normals and
oriented orthonormal tangent frames so (2n-1)-forms can be integrated as
densities against the surface measure.

Rules are nested by an integer level: level L+1 doubles the node counts of
level L in every direction.  The sphere S^3 uses product angles
z1 = cos(eta) e^{i xi1}, z2 = sin(eta) e^{i xi2} with the substitution
u = sin^2(eta), which turns the cos*sin density into the flat measure du/2:
Gauss-Legendre in u and trapezoid rules in both periodic angles.  Monomials
survive the angular average only with matched conjugate powers, so their
eta-profiles are polynomials in u and the product rule integrates them
exactly; in particular the area comes out 2 pi^2 up to roundoff.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "DefiningFunction", "Domain", "make_domain", "QuadratureRule",
    "BoundaryFrame", "volume_rule", "boundary_rule", "exclude_ball",
    "dist_boundary", "frame_at", "pullback_boundary", "rule_to_csv",
]

# base node counts at level 0; a level multiplies these by 2^level
BOX_PANELS = 1
BOX_ORDER = 12
DISC_RADIAL = 8
DISC_ANGULAR = 32
BALL4_RADIAL = 6
BALL4_ETA = 4
BALL4_XI = 8
CIRCLE_NODES = 32
S3_ETA = 4
S3_XI = 8


@dataclass
class DefiningFunction:
    """r with D = {r < 0} and |grad r| = 1 on the boundary.

    gradient returns the unit outward direction of the level sets; for
    ellipsoids this equals grad r only on the boundary itself, which is the
    only place frames are built.
    """

    m: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    normalized: bool = True


@dataclass
class Domain:
    kind: str
    m: int
    defining: DefiningFunction
    center: np.ndarray | None = None
    radius: float | None = None
    semi_axes: np.ndarray | None = None
    bounds: np.ndarray | None = None   # (m, 2) for boxes / half-space patches

    @property
    def n_complex(self):
        if self.m % 2:
            raise ValueError("domain dimension is odd; no complex structure")
        return self.m // 2


def _as_batch(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def make_domain(kind, **params):
    """Construct a domain: ball | ellipsoid | interval-box | half-space-patch."""
    if kind == "ball":
        m = int(params.get("m", 2))
        R = float(params.get("radius", 1.0))
        c = np.asarray(params.get("center", np.zeros(m)), dtype=float)

        def value(x):
            x, sq = _as_batch(x)
            v = np.linalg.norm(x - c, axis=-1) - R
            return v[0] if sq else v

        def gradient(x):
            x, sq = _as_batch(x)
            d = x - c
            nrm = np.maximum(np.linalg.norm(d, axis=-1, keepdims=True), 1e-300)
            g = d / nrm
            return g[0] if sq else g

        return Domain("ball", m, DefiningFunction(m, value, gradient), center=c, radius=R)

    if kind == "ellipsoid":
        axes = np.asarray(params["semi_axes"], dtype=float)
        m = len(axes)
        c = np.asarray(params.get("center", np.zeros(m)), dtype=float)

        def rho_parts(x):
            d = (x - c) / axes
            rho = np.linalg.norm(d, axis=-1)
            grad_rho = d / axes / np.maximum(rho[..., None], 1e-300)
            return rho, grad_rho

        def value(x):
            x, sq = _as_batch(x)
            rho, grad_rho = rho_parts(x)
            v = (rho - 1.0) / np.maximum(np.linalg.norm(grad_rho, axis=-1), 1e-300)
            return v[0] if sq else v

        def gradient(x):
            x, sq = _as_batch(x)
            _, grad_rho = rho_parts(x)
            g = grad_rho / np.maximum(np.linalg.norm(grad_rho, axis=-1, keepdims=True), 1e-300)
            return g[0] if sq else g

        return Domain("ellipsoid", m, DefiningFunction(m, value, gradient),
                      center=c, semi_axes=axes)

    if kind in ("interval-box", "half-space-patch"):
        bounds = np.asarray(params["bounds"], dtype=float)
        m = len(bounds)
        if kind == "half-space-patch" and abs(bounds[0, 1]) > 1e-14:
            raise ValueError("half-space patch needs x1 upper bound 0")

        def value(x):
            x, sq = _as_batch(x)
            if kind == "half-space-patch":
                v = x[:, 0]
            else:
                v = np.max(np.maximum(bounds[:, 0] - x, x - bounds[:, 1]), axis=-1)
            return v[0] if sq else v

        def gradient(x):
            x, sq = _as_batch(x)
            g = np.zeros_like(x)
            if kind == "half-space-patch":
                g[:, 0] = 1.0
            else:
                cand = np.maximum(bounds[:, 0] - x, x - bounds[:, 1])
                k = np.argmax(cand, axis=-1)
                sign = np.where(x[np.arange(len(x)), k] - bounds[k, 1] >
                                bounds[k, 0] - x[np.arange(len(x)), k], 1.0, -1.0)
                g[np.arange(len(x)), k] = sign
            return g[0] if sq else g

        return Domain(kind, m, DefiningFunction(m, value, gradient), bounds=bounds)

    raise ValueError(f"unknown domain kind {kind!r}")


@dataclass
class BoundaryFrame:
    """Outward normal, its dual covector, tangent frame and area density."""

    point: np.ndarray
    nu: np.ndarray
    nu_flat: np.ndarray          # same components: the metric is orthonormal
    tangents: np.ndarray         # (m-1, m), orthonormal, det[nu|t...] > 0
    ds_weight: float = 1.0


@dataclass
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    level: int
    region: str                          # "interior" | "boundary"
    spacing: float
    domain_kind: str = ""
    nu: Optional[np.ndarray] = None
    tangents: Optional[np.ndarray] = None
    exclusion: Optional[tuple] = None    # (center, radius, n_removed)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.weights)

    def total(self):
        return float(np.sum(self.weights))

    def frames(self):
        if self.nu is None:
            raise ValueError("not a boundary rule")
        for i in range(len(self.weights)):
            yield BoundaryFrame(self.nodes[i], self.nu[i], self.nu[i].copy(),
                                self.tangents[i], float(self.weights[i]))


def _composite_gauss(lo, hi, panels, order):
    x, w = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = (a + b) / 2.0, (b - a) / 2.0
        nodes.append(mid + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _tensor(axis_nodes, axis_weights):
    grids = np.meshgrid(*axis_nodes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    w = axis_weights[0]
    for aw in axis_weights[1:]:
        w = np.multiply.outer(w, aw)
    return nodes, w.ravel()


def _orient(nu, tangents):
    """Flip the first tangent wherever det[nu | t_1 | ... ] < 0."""
    if tangents.shape[1] == 0:
        return tangents
    mats = np.concatenate([nu[:, None, :], tangents], axis=1)
    dets = np.linalg.det(np.transpose(mats, (0, 2, 1)))
    tangents = tangents.copy()
    tangents[dets < 0, 0, :] *= -1.0
    return tangents


def volume_rule(domain, level):
    """Interior product rule at the given refinement level."""
    scale = 2 ** level
    if domain.kind == "ball" and domain.m == 2:
        nr, nt = DISC_RADIAL * scale, DISC_ANGULAR * scale
        xr, wr = leggauss(nr)
        r = domain.radius * (xr + 1.0) / 2.0
        wr = domain.radius * wr / 2.0
        theta = 2.0 * np.pi * np.arange(nt) / nt
        dth = 2.0 * np.pi / nt
        R, T = np.meshgrid(r, theta, indexing="ij")
        nodes = np.stack([R * np.cos(T), R * np.sin(T)], axis=-1).reshape(-1, 2)
        nodes = nodes + domain.center
        w = (wr[:, None] * r[:, None] * dth * np.ones(nt)).ravel()
        return QuadratureRule(nodes, w, level, "interior", domain.radius / nr, "ball")

    if domain.kind == "ball" and domain.m == 4:
        nr = BALL4_RADIAL * scale
        xr, wr = leggauss(nr)
        r = domain.radius * (xr + 1.0) / 2.0
        wr = domain.radius * wr / 2.0
        sph = _s3_rule(level)
        nodes = (r[:, None, None] * sph.nodes[None, :, :]).reshape(-1, 4) + domain.center
        w = (wr[:, None] * r[:, None] ** 3 * sph.weights[None, :]).ravel()
        return QuadratureRule(nodes, w, level, "interior", domain.radius / nr, "ball")

    if domain.kind == "ellipsoid":
        unit = make_domain("ball", m=domain.m, radius=1.0)
        base = volume_rule(unit, level)
        nodes = base.nodes * domain.semi_axes + domain.center
        w = base.weights * float(np.prod(domain.semi_axes))
        return QuadratureRule(nodes, w, level, "interior",
                              base.spacing * float(np.max(domain.semi_axes)), "ellipsoid")

    if domain.kind in ("interval-box", "half-space-patch"):
        panels = BOX_PANELS * scale
        axis_nodes, axis_weights, spacing = [], [], 0.0
        for lo, hi in domain.bounds:
            xs, ws = _composite_gauss(lo, hi, panels, BOX_ORDER)
            axis_nodes.append(xs)
            axis_weights.append(ws)
            spacing = max(spacing, (hi - lo) / (panels * BOX_ORDER))
        nodes, w = _tensor(axis_nodes, axis_weights)
        return QuadratureRule(nodes, w, level, "interior", spacing, domain.kind)

    raise ValueError(f"no volume rule for {domain.kind} in dimension {domain.m}")


def _s3_rule(level):
    """Product rule on the unit S^3 with total weight 2 pi^2."""
    scale = 2 ** level
    ne, nx = S3_ETA * scale, S3_XI * scale
    xe, we = leggauss(ne)
    u = (xe + 1.0) / 2.0
    eta = np.arcsin(np.sqrt(u))
    weta = we / 4.0                      # (1/2) du against the [0,1]-scaled rule
    xi1 = 2.0 * np.pi * np.arange(nx) / nx
    xi2 = 2.0 * np.pi * np.arange(nx) / nx
    dxi = (2.0 * np.pi / nx) ** 2
    E, A, B = np.meshgrid(eta, xi1, xi2, indexing="ij")
    nodes = np.stack([np.cos(E) * np.cos(A), np.cos(E) * np.sin(A),
                      np.sin(E) * np.cos(B), np.sin(E) * np.sin(B)], axis=-1).reshape(-1, 4)
    w = (weta[:, None, None] * np.ones((1, nx, nx)) * dxi).ravel()
    # tangent frame: normalized coordinate directions of (xi1, xi2, eta)
    t1 = np.stack([-np.sin(A), np.cos(A), np.zeros_like(A), np.zeros_like(A)], axis=-1)
    t2 = np.stack([np.zeros_like(B), np.zeros_like(B), -np.sin(B), np.cos(B)], axis=-1)
    t3 = np.stack([-np.sin(E) * np.cos(A), -np.sin(E) * np.sin(A),
                   np.cos(E) * np.cos(B), np.cos(E) * np.sin(B)], axis=-1)
    tangents = np.stack([t1.reshape(-1, 4), t2.reshape(-1, 4), t3.reshape(-1, 4)], axis=1)
    nu = nodes.copy()
    tangents = _orient(nu, tangents)
    return QuadratureRule(nodes, w, level, "boundary", np.pi / (2 * ne), "ball",
                          nu=nu, tangents=tangents)


def boundary_rule(domain, level):
    """Boundary rule with outward normals and oriented tangent frames."""
    scale = 2 ** level
    if domain.kind == "ball" and domain.m == 2:
        nt = CIRCLE_NODES * scale
        theta = 2.0 * np.pi * np.arange(nt) / nt
        cs, sn = np.cos(theta), np.sin(theta)
        nodes = domain.center + domain.radius * np.stack([cs, sn], axis=-1)
        w = np.full(nt, domain.radius * 2.0 * np.pi / nt)
        nu = np.stack([cs, sn], axis=-1)
        tangents = np.stack([-sn, cs], axis=-1)[:, None, :]
        tangents = _orient(nu, tangents)
        return QuadratureRule(nodes, w, level, "boundary",
                              2 * np.pi * domain.radius / nt, "ball", nu=nu, tangents=tangents)

    if domain.kind == "ball" and domain.m == 4:
        sph = _s3_rule(level)
        nodes = domain.center + domain.radius * sph.nodes
        w = sph.weights * domain.radius ** 3
        return QuadratureRule(nodes, w, level, "boundary", sph.spacing * domain.radius,
                              "ball", nu=sph.nu, tangents=sph.tangents)

    if domain.kind == "ellipsoid":
        unit = make_domain("ball", m=domain.m, radius=1.0)
        base = boundary_rule(unit, level)
        S = domain.semi_axes
        nodes = base.nodes * S + domain.center
        jac = float(np.prod(S)) * np.linalg.norm(base.nodes / S, axis=-1)
        w = base.weights * jac
        nu = domain.defining.gradient(nodes)
        mapped = base.tangents * S[None, None, :]
        tangents = _gram_schmidt(nu, mapped)
        tangents = _orient(nu, tangents)
        return QuadratureRule(nodes, w, level, "boundary", base.spacing * float(np.max(S)),
                              "ellipsoid", nu=nu, tangents=tangents)

    if domain.kind == "half-space-patch":
        # only the physical face {x1 = 0}; the other box faces are truncation
        return _face_rule(domain, axis=0, side=1, level=level)

    if domain.kind == "interval-box":
        if domain.m == 1:
            lo, hi = domain.bounds[0]
            nodes = np.array([[lo], [hi]])
            w = np.ones(2)
            nu = np.array([[-1.0], [1.0]])
            tangents = np.zeros((2, 0, 1))
            return QuadratureRule(nodes, w, level, "boundary", hi - lo, "interval-box",
                                  nu=nu, tangents=tangents)
        parts = [_face_rule(domain, axis=k, side=s, level=level)
                 for k in range(domain.m) for s in (-1, 1)]
        nodes = np.concatenate([p.nodes for p in parts])
        w = np.concatenate([p.weights for p in parts])
        nu = np.concatenate([p.nu for p in parts])
        tangents = np.concatenate([p.tangents for p in parts])
        return QuadratureRule(nodes, w, level, "boundary", parts[0].spacing,
                              "interval-box", nu=nu, tangents=tangents)

    raise ValueError(f"no boundary rule for {domain.kind} in dimension {domain.m}")


def _face_rule(domain, axis, side, level):
    """Rule on one box face, axis held at its lower (-1) or upper (+1) bound."""
    bounds = domain.bounds
    m = domain.m
    panels = BOX_PANELS * 2 ** level
    other = [k for k in range(m) if k != axis]
    if other:
        axis_nodes, axis_weights = [], []
        spacing = 0.0
        for k in other:
            lo, hi = bounds[k]
            xs, ws = _composite_gauss(lo, hi, panels, BOX_ORDER)
            axis_nodes.append(xs)
            axis_weights.append(ws)
            spacing = max(spacing, (hi - lo) / (panels * BOX_ORDER))
        lat_nodes, w = _tensor(axis_nodes, axis_weights)
    else:
        lat_nodes, w = np.zeros((1, 0)), np.ones(1)
        spacing = 1.0
    nodes = np.zeros((len(w), m))
    nodes[:, axis] = bounds[axis, 1] if side > 0 else bounds[axis, 0]
    for i, k in enumerate(other):
        nodes[:, k] = lat_nodes[:, i]
    nu = np.zeros((len(w), m))
    nu[:, axis] = float(side)
    tangents = np.zeros((len(w), m - 1, m))
    for i, k in enumerate(other):
        tangents[:, i, k] = 1.0
    tangents = _orient(nu, tangents)
    return QuadratureRule(nodes, w, level, "boundary", spacing, domain.kind,
                          nu=nu, tangents=tangents)


def _gram_schmidt(nu, vectors):
    """Orthonormalize tangent candidates against nu and each other (batched)."""
    out = []
    basis = [nu]
    for i in range(vectors.shape[1]):
        v = vectors[:, i, :].copy()
        for b in basis:
            v -= np.sum(v * b, axis=-1, keepdims=True) * b
        v /= np.maximum(np.linalg.norm(v, axis=-1, keepdims=True), 1e-300)
        basis.append(v)
        out.append(v)
    return np.stack(out, axis=1)


def exclude_ball(rule, center, radius):
    """Drop nodes within radius of center; used for weakly singular kernels."""
    center = np.asarray(center, dtype=float)
    keep = np.linalg.norm(rule.nodes - center, axis=-1) >= radius
    return QuadratureRule(rule.nodes[keep], rule.weights[keep], rule.level,
                          rule.region, rule.spacing, rule.domain_kind,
                          nu=None if rule.nu is None else rule.nu[keep],
                          tangents=None if rule.tangents is None else rule.tangents[keep],
                          exclusion=(center, float(radius), int(np.sum(~keep))))


def dist_boundary(domain, x):
    """Distance to the boundary for x inside the closed domain.

    Exact for balls, boxes and half-space patches; for ellipsoids it is the
    first-order estimate |r(x)| of the scaled defining function.
    """
    x, sq = _as_batch(x)
    if domain.kind == "ball":
        d = domain.radius - np.linalg.norm(x - domain.center, axis=-1)
    elif domain.kind == "interval-box":
        d = np.min(np.minimum(x - domain.bounds[:, 0], domain.bounds[:, 1] - x), axis=-1)
    elif domain.kind == "half-space-patch":
        d = -x[:, 0]
    elif domain.kind == "ellipsoid":
        d = np.abs(domain.defining.value(x))
    else:
        raise ValueError(domain.kind)
    return d[0] if sq else d


def frame_at(domain, x):
    """Boundary frame at a single boundary point."""
    x = np.asarray(x, dtype=float)
    nu = domain.defining.gradient(x)
    m = domain.m
    # complete nu to a basis from coordinate axes, then orthonormalize
    cands = np.eye(m)[np.argsort(np.abs(nu))][: m - 1]
    tang = _gram_schmidt(nu[None, :], cands[None, :, :])[0]
    tang = _orient(nu[None, :], tang[None, :, :])[0]
    return BoundaryFrame(x, nu, nu.copy(), tang)


def pullback_boundary(form, x, frame):
    """Tangential components of the pullback of a form to the boundary.

    Returns {tangent index combo: value}; for a form of degree m-1 the single
    combo is the density against the surface measure dS.
    """
    from itertools import combinations
    k = form.degree
    out = {}
    for combo in combinations(range(frame.tangents.shape[0]), k):
        vecs = frame.tangents[list(combo)] if k else np.zeros((0, 2 * form.n))
        out[combo] = form.evaluate(x, vecs)
    return out


def rule_to_csv(rule, path):
    """Write nodes and weights (plus normals for boundary rules) as CSV."""
    m = rule.nodes.shape[1]
    cols = [f"x{k + 1}" for k in range(m)] + ["weight"]
    if rule.nu is not None:
        cols += [f"nu{k + 1}" for k in range(m)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for i in range(len(rule.weights)):
            row = [f"{v:.17g}" for v in rule.nodes[i]] + [f"{rule.weights[i]:.17g}"]
            if rule.nu is not None:
                row += [f"{v:.17g}" for v in rule.nu[i]]
            w.writerow(row)
    return path
