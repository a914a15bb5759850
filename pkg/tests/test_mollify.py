"""Boundary-adapted mollifiers: kernels, normal-scale selection, traces."""

import numpy as np
import pytest
from scipy.integrate import quad

from bmklab.fields import smooth_transition
from bmklab.mollify import (DiracSequence, HalfSpaceField, boundary_mollify,
                            build_interior_mollifier, choose_tau,
                            convergence_report, convolve_field, load_field,
                            save_field, slab_mass)
from bmklab.operators import FirstOrderOperator

BOUNDS = [[-1.0, 0.0], [-1.0, 1.0]]


def _smooth_field(shape=(65, 65)):
    fn = lambda x: np.cos(1.1 * x[:, 0]) * (1 + 0.5 * x[:, 1])
    return HalfSpaceField.from_function(fn, BOUNDS, shape), fn


def test_dirac_sequence_unit_mass():
    for m, eps, tau in [(1, 0.2, 0.05), (2, 0.1, 0.0125), (3, 0.2, 0.1)]:
        kernel = DiracSequence(m, eps, tau)
        nodes, weights = kernel.quad_rule()
        assert np.isclose(np.sum(weights * kernel.values(nodes)), 1.0,
                          atol=1e-12)


def test_dirac_sequence_support_is_interior_slab():
    """The kernel lives in tau < t1 < 2 tau, so sampling never leaves U."""
    kernel = DiracSequence(2, 0.2, 0.025)
    t = np.array([[0.024, 0.0], [0.051, 0.0], [0.03, 0.25], [-0.03, 0.0],
                  [0.0, 0.0]])
    vals = kernel.values(t)
    assert vals[0] == 0.0  # below tau
    assert vals[1] == 0.0  # above 2 tau
    assert vals[3] == 0.0 and vals[4] == 0.0  # outside the half space
    inside = np.array([[0.0375, 0.0]])
    assert kernel.values(inside)[0] > 0.0


def test_dirac_sequence_rejects_bad_tau():
    with pytest.raises(ValueError):
        DiracSequence(2, 0.1, 0.2)


def test_choose_tau_returns_largest_admissible_dyadic():
    f, _ = _smooth_field()
    eps, p = 0.2, 2.0
    tau = choose_tau(f, eps, p)
    k = round(np.log2(eps / tau))
    assert np.isclose(tau, eps * 2.0 ** (-k))
    assert slab_mass(f, tau, p) <= eps * eps
    if k > 0:
        assert slab_mass(f, 2 * tau, p) > eps * eps


def test_slab_mass_singular_profile_oracle():
    """|f|^2 = |t1|^(-1/2) gives mass(tau) = width * c1 * sqrt(tau).

    c1 = int_0^2 (1 - h(s)) s^(-1/2) ds is evaluated with an independent
    adaptive integrator; the panel quadrature must match it.
    """
    fn = lambda x: np.abs(x[:, 0]) ** -0.25
    f = HalfSpaceField(BOUNDS, (33, 33), func=fn)
    c1, err = quad(lambda s: (1 - smooth_transition(s)) / np.sqrt(s), 0, 2,
                   points=[1.0], limit=200)
    assert err < 1e-9
    for tau in (0.05, 0.0125):
        want = 2.0 * c1 * np.sqrt(tau)
        got = slab_mass(f, tau, 2.0)
        assert np.isclose(got, want, rtol=1e-6)


def test_choose_tau_singular_selection_matches_prediction():
    fn = lambda x: np.abs(x[:, 0]) ** -0.25
    f = HalfSpaceField(BOUNDS, (33, 33), func=fn)
    eps = 0.2
    c1, _ = quad(lambda s: (1 - smooth_transition(s)) / np.sqrt(s), 0, 2,
                 points=[1.0], limit=200)
    k_pred = next(k for k in range(41)
                  if 2.0 * c1 * np.sqrt(eps * 2.0 ** (-k)) <= eps * eps)
    tau = choose_tau(f, eps, 2.0)
    assert np.isclose(tau, eps * 2.0 ** (-k_pred))


def test_choose_tau_raises_when_slab_mass_cannot_comply():
    """|f|^p just inside non-integrability defeats every dyadic scale."""
    fn = lambda x: np.abs(x[:, 0]) ** -0.49
    f = HalfSpaceField(BOUNDS, (33, 33), func=fn)
    with pytest.raises(ValueError):
        choose_tau(f, 0.2, 2.0)


def test_convolving_constant_reproduces_one():
    f = HalfSpaceField.from_function(lambda x: np.ones(len(x)), BOUNDS, (33, 33))
    kernel = DiracSequence(2, 0.2, choose_tau(f, 0.2, 2.0))
    pts = np.array([[-0.5, 0.0], [0.0, 0.3], [-0.99, -0.7], [0.0, 0.0]])
    vals = convolve_field(f, kernel, pts)
    assert np.allclose(vals, 1.0, atol=1e-12)


def test_boundary_mollify_converges_and_keeps_trace():
    f, fn = _smooth_field()
    sup_errs, trace_errs = [], []
    for eps in (0.2, 0.1, 0.05):
        g = boundary_mollify(f, eps)
        sup_errs.append(np.max(np.abs(g.grid_values() - f.grid_values())))
        trace = g.grid_values()[-1]
        want = fn(f.boundary_nodes())
        trace_errs.append(np.max(np.abs(trace - want)))
    assert sup_errs[0] > sup_errs[1] > sup_errs[2]
    assert trace_errs[2] < 1e-2


def test_interior_mollifier_mass_and_support():
    im = build_interior_mollifier(2, 0.1)
    nodes, weights = im.quad_rule()
    assert np.isclose(np.sum(weights * im.values(nodes)), 1.0, atol=1e-12)
    lo, hi = np.asarray(im.support_box()).T
    pad = 1e-9
    outside = np.array([[hi[0] + pad, 0.0], [lo[0] - pad, 0.0],
                        [0.5 * (lo[0] + hi[0]), hi[1] + pad]])
    assert np.allclose(im.values(outside), 0.0)


def test_save_and_load_field_round_trip(tmp_path):
    f, _ = _smooth_field((17, 17))
    path = str(tmp_path / "field.npz")
    save_field(f, path)
    g = load_field(path)
    assert np.allclose(g.grid_values(), f.grid_values(), atol=0)
    assert np.allclose(g.bounds, f.bounds)


def test_convergence_report_structure_and_interior_ladder():
    fn = lambda x: np.cos(1.3 * x[:, 0] + 0.4) * np.exp(0.7 * x[:, 1]) * 0.5
    qfn = lambda x: -0.65 * np.sin(1.3 * x[:, 0] + 0.4) * np.exp(0.7 * x[:, 1])
    f = HalfSpaceField.from_function(fn, BOUNDS, (65, 65))
    qf = HalfSpaceField.from_function(qfn, BOUNDS, (65, 65))
    op = FirstOrderOperator(2, a=[1.0, 0.0], b=0.0)
    rep = convergence_report(op, f, qf, fn, [0.2, 0.1], 2.0)
    rows = rep["rows"]
    assert [r["epsilon"] for r in rows] == [0.2, 0.1]
    for key in ("tau", "interior_err", "q_err", "commutator_ratio", "trace_err"):
        assert all(key in r for r in rows)
    assert rows[1]["interior_err"] < rows[0]["interior_err"]
    assert rows[1]["trace_err"] < rows[0]["trace_err"]
