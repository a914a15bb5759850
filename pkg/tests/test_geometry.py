"""Domains, quadrature rules, frames, and exclusion machinery."""

import csv

import numpy as np
import pytest
from scipy.special import ellipe

from bmklab.geometry import (boundary_rule, dist_boundary, exclude_ball,
                             frame_at, make_domain, rule_to_csv, volume_rule)


def test_disc_area_and_circumference():
    disc = make_domain("ball", m=2)
    assert np.isclose(volume_rule(disc, 2).weights.sum(), np.pi,
                      rtol=0, atol=1e-10)
    assert np.isclose(boundary_rule(disc, 2).weights.sum(), 2 * np.pi,
                      rtol=0, atol=1e-10)


def test_ball4_volume_and_sphere_area():
    """Vol(B^4) = pi^2/2 and Area(S^3) = 2 pi^2."""
    ball = make_domain("ball", m=4)
    assert np.isclose(volume_rule(ball, 1).weights.sum(), np.pi ** 2 / 2,
                      rtol=1e-8)
    assert np.isclose(boundary_rule(ball, 1).weights.sum(), 2 * np.pi ** 2,
                      rtol=0, atol=1e-8)


def test_scaled_ball_measures():
    ball = make_domain("ball", m=2, radius=0.5, center=[0.25, -0.1])
    assert np.isclose(volume_rule(ball, 1).weights.sum(), np.pi * 0.25,
                      rtol=1e-12)
    assert np.isclose(boundary_rule(ball, 1).weights.sum(), np.pi, rtol=1e-12)


def test_ellipse_perimeter_against_elliptic_integral():
    """Perimeter of x^2/a^2 + y^2/b^2 = 1 is 4 a E(1 - b^2/a^2)."""
    a, b = 1.0, 0.6
    dom = make_domain("ellipsoid", semi_axes=[a, b])
    want = 4 * a * ellipe(1 - (b / a) ** 2)
    got = boundary_rule(dom, 2).weights.sum()
    assert np.isclose(got, want, rtol=0, atol=1e-8)
    area = volume_rule(dom, 2).weights.sum()
    assert np.isclose(area, np.pi * a * b, rtol=1e-6)


def test_box_measures():
    box = make_domain("interval-box", bounds=[[-1.0, 1.0], [0.0, 0.5]])
    assert np.isclose(volume_rule(box, 1).weights.sum(), 1.0, rtol=1e-13)
    assert np.isclose(boundary_rule(box, 1).weights.sum(), 5.0, rtol=1e-13)


def test_interval_boundary_is_two_points():
    seg = make_domain("interval-box", bounds=[[-1.0, 0.0]])
    br = boundary_rule(seg, 0)
    assert sorted(br.nodes[:, 0]) == [-1.0, 0.0]
    assert np.allclose(br.weights, 1.0)


def test_volume_refinement_converges_on_smooth_integrand():
    disc = make_domain("ball", m=2)
    exact = np.pi / 2  # integral of x1^2 + x2^2 over the unit disc
    errs = []
    for level in (0, 1, 2):
        r = volume_rule(disc, level)
        val = np.sum(r.weights * (r.nodes ** 2).sum(axis=1))
        errs.append(abs(val - exact))
    assert errs[-1] < 1e-12


@pytest.mark.parametrize("kind,params", [
    ("ball", {"m": 2}),
    ("ball", {"m": 4}),
    ("ellipsoid", {"semi_axes": [1.0, 0.7]}),
])
def test_boundary_frames_orthonormal_outward(kind, params):
    dom = make_domain(kind, **params)
    br = boundary_rule(dom, 1)
    take = np.linspace(0, len(br.nodes) - 1, 17, dtype=int)
    for x in br.nodes[take]:
        fr = frame_at(dom, x)
        m = len(x)
        basis = np.vstack([fr.nu, fr.tangents])
        assert basis.shape == (m, m)
        assert np.allclose(basis @ basis.T, np.eye(m), atol=1e-12)
        step = x + 1e-6 * fr.nu
        assert dom.defining.value(step) > dom.defining.value(x)


def test_normal_matches_gradient_direction():
    dom = make_domain("ellipsoid", semi_axes=[1.0, 0.6])
    x = np.array([0.0, 0.6])
    fr = frame_at(dom, x)
    assert np.allclose(fr.nu, [0.0, 1.0], atol=1e-12)


def test_dist_boundary_ball_and_box():
    disc = make_domain("ball", m=2)
    assert np.isclose(dist_boundary(disc, np.array([0.3, 0.0])), 0.7)
    box = make_domain("interval-box", bounds=[[0.0, 1.0], [0.0, 1.0]])
    assert np.isclose(dist_boundary(box, np.array([0.2, 0.5])), 0.2)


def test_exclude_ball_removes_mass_near_center():
    disc = make_domain("ball", m=2)
    rule = volume_rule(disc, 2)
    z = np.array([0.1, -0.2])
    rho = 0.15
    cut = exclude_ball(rule, z, rho)
    d = np.linalg.norm(cut.nodes - z, axis=1)
    assert np.all(d >= rho)
    removed = rule.weights.sum() - cut.weights.sum()
    assert abs(removed - np.pi * rho ** 2) < 0.2 * np.pi * rho ** 2


def test_exclusion_consistency_on_smooth_integrand():
    """Excluded-ball integral of 1 converges to area minus pi rho^2."""
    disc = make_domain("ball", m=2)
    z = np.array([0.0, 0.0])
    rho = 0.25
    errs = []
    for level in (1, 2, 3):
        cut = exclude_ball(volume_rule(disc, level), z, rho)
        errs.append(abs(cut.weights.sum() - (np.pi - np.pi * rho ** 2)))
    # the cut is sharp, so the error scales like the node spacing
    assert errs[-1] < errs[0] / 3
    assert errs[-1] < 1e-2


def test_spacing_halves_with_level():
    disc = make_domain("ball", m=2)
    s = [volume_rule(disc, lv).spacing for lv in (0, 1, 2)]
    assert np.isclose(s[0] / s[1], 2.0) and np.isclose(s[1] / s[2], 2.0)


def test_rule_to_csv_round_trip(tmp_path):
    disc = make_domain("ball", m=2)
    rule = boundary_rule(disc, 0)
    path = tmp_path / "rule.csv"
    rule_to_csv(rule, str(path))
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(rule.nodes)
    got = np.array([[float(r["x1"]), float(r["x2"])] for r in rows])
    assert np.allclose(got, rule.nodes, atol=0)
    w = np.array([float(r["weight"]) for r in rows])
    assert np.allclose(w, rule.weights, atol=0)


def test_unknown_domain_kind_raises():
    with pytest.raises(ValueError):
        make_domain("torus")
