"""End-to-end acceptance gates, one test per gate.

Run with `pytest tests/test_acceptance.py -v` to get one pass/fail line
per gate.  Each gate re-states its tolerance inline; the configurations
are the documented defaults of the experiment harness, so a gate here
failing means the shipped configuration is broken, not just one unit.
The whole module stays within a couple of minutes on a laptop.
"""

import itertools
import math

import numpy as np

from bmklab import bmk, cli, mollify, young
from bmklab.exterior import (DifferentialForm, dbar, eps_sign, hodge_star,
                             multi_indices, wedge)
from bmklab.fields import PolyField, constant, zmonomial
from bmklab.geometry import boundary_rule, make_domain
from bmklab.operators import (FirstOrderOperator, equivalence_report,
                              form_test_family, scalar_test_family)

DISC = make_domain("ball", m=2)
BALL4 = make_domain("ball", m=4)


def _cval(x):
    return complex(x[0], x[1])


def _plane_sample(seed=7):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-0.5, 0.5, (12, 2))
    pts = pts[np.linalg.norm(pts, axis=1) <= 0.5]
    return np.vstack([[0.5, 0.0], pts])


def test_gate_01_plane_kernel_reduction():
    """n=1 kernel equals (1/2 pi i) / (zeta - z): rel err < 1e-12, 100 pairs."""
    rng = np.random.default_rng(123)
    probe = np.zeros((1, 2))
    checked = 0
    while checked < 100:
        zeta, z = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
        if np.linalg.norm(zeta - z) < 1e-6:
            continue
        got = bmk.kernel_eval(1, 0, zeta, z)[()].coeffs[((1,), ())](probe)[0]
        want = 1 / (2j * np.pi * (_cval(zeta) - _cval(z)))
        assert abs(got - want) / abs(want) < 1e-12
        checked += 1


def test_gate_02_boundary_reproduction_at_2048_nodes():
    """z^k recovered from 2048 circle nodes to 1e-8 for k<=3, |z|<=0.5."""
    assert len(boundary_rule(DISC, 6).nodes) == 2048
    cfg = bmk.SingularQuadratureConfig(base_level=6, refinement_steps=1)
    rng = np.random.default_rng(2)
    pts = np.vstack([[0.5, 0.0], rng.uniform(-0.4, 0.4, (6, 2))])
    worst = 0.0
    for k in range(4):
        f_b = DifferentialForm(1, 0, 0, {((), ()): zmonomial(1, (k,), (0,))})
        for zp in pts:
            got = bmk.op_boundary(f_b, zp, DISC, cfg)["value"][()]
            worst = max(worst, abs(got - _cval(zp) ** k))
    assert worst < 1e-8


def test_gate_03_plane_conjugate_ladder_and_spot():
    """f = conj(z): final three-term residual < 1e-3, residual deltas
    shrink monotonically across >= 3 refinement levels, and the volume
    term at z = 0.5 is -0.5 +- 1e-3 (hand residue value)."""
    f = DifferentialForm(1, 0, 0, {((), ()): zmonomial(1, (0,), (1,))})
    cfg = bmk.SingularQuadratureConfig(base_level=0, refinement_steps=7)
    res = bmk.reproduce_residual(f, f, f.dbar(), DISC, _plane_sample(), cfg)
    per = {}
    for row in res["rows"]:
        per.setdefault(row["level"], []).append(row["residual"])
    maxima = [max(per[L]) for L in sorted(per)]
    assert maxima[-1] < 1e-3
    assert all(a > b for a, b in zip(maxima, maxima[1:]))
    deltas = [a - b for a, b in zip(maxima, maxima[1:])]
    assert all(a > b for a, b in zip(deltas[:4], deltas[1:4]))
    g = DifferentialForm(1, 0, 1, {((), (1,)): constant(2, 1.0)})
    spot_cfg = bmk.SingularQuadratureConfig(base_level=0, refinement_steps=5)
    spot = bmk.op_volume(g, np.array([0.5, 0.0]), DISC, spot_cfg)["value"][()]
    assert abs(spot - (-0.5)) < 1e-3


def test_gate_04_two_variable_ladders_smooth_and_lp():
    """n=2 reproduction, q in {0,1}: monotone over 3 levels and final
    residual < 1e-2 for a smooth (0,1) form and for an L^p function with
    separately supplied boundary values."""
    config = cli.ExperimentConfig(experiment="bmk-lp", level=0, seed=11)
    _, _, meta = cli.EXPERIMENTS["bmk-lp"](config)
    for name in ("smooth", "lp"):
        maxima = meta["checks"][f"{name}_monotone"]["value"]
        assert len(maxima) == 3
        assert all(a > b for a, b in zip(maxima, maxima[1:])), name
        assert maxima[-1] < 1e-2, name


def test_gate_05_boundary_mollification_ladder():
    """Strip mollification for p in {1,2}: all four diagnostics are
    non-increasing after the first epsilon halving on the 4-step ladder,
    trace error < 1e-2 at eps = 0.025 on 257-point axes (256 cells), and
    the commutator ratio stays under one shared constant."""
    eps = [0.2, 0.1, 0.05, 0.025]
    diag = ["interior_err", "q_err", "commutator_ratio", "trace_err"]
    ratio_cap = 50.0
    for p in (1.0, 2.0):
        op, f, qf, f_fn = cli.mollify_fixture(257)
        rows = mollify.convergence_report(op, f, qf, f_fn, eps, p)["rows"]
        assert [row["epsilon"] for row in rows] == eps
        for key in diag:
            vals = [row[key] for row in rows]
            assert all(a >= b - 1e-15 for a, b in zip(vals[1:], vals[2:])), \
                (p, key, vals)
        assert rows[-1]["trace_err"] < 1e-2, p
        assert max(row["commutator_ratio"] for row in rows) <= ratio_cap


def test_gate_06_green_stokes_identities():
    """Residual < 1e-12 compactly supported, < 1e-8 with the boundary
    term on interval and box, and the hand interval case (u=x, v=1 on
    [-1,0], both sides 1) to 1e-10."""
    cup = PolyField(2, {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0})
    w = cup * cup * cup
    op2 = FirstOrderOperator(2, a=[PolyField(2, {(0, 0): 1.0, (1, 1): 0.5}),
                                   PolyField(2, {(0, 1): 1.0})], b=0.25)
    for u, v in zip(scalar_test_family(DISC, 3, seed=10),
                    scalar_test_family(DISC, 3, seed=11)):
        assert op2.green_stokes_residual(DISC, u * w, v * w,
                                         level=3)["residual"] < 1e-12
    box = make_domain("interval-box", bounds=[[-1.0, 1.0], [-1.0, 1.0]])
    seg = make_domain("interval-box", bounds=[[-1.0, 0.0]])
    op1 = FirstOrderOperator(1, a=[PolyField(1, {(1,): 1.0})], b=1.5)
    for u, v in zip(scalar_test_family(box, 3, seed=1),
                    scalar_test_family(box, 3, seed=2)):
        assert op2.green_stokes_residual(box, u, v, level=3)["residual"] < 1e-8
    for u, v in zip(scalar_test_family(seg, 3, seed=3),
                    scalar_test_family(seg, 3, seed=4)):
        assert op1.green_stokes_residual(seg, u, v, level=3)["residual"] < 1e-8
    hand = FirstOrderOperator(1, a=[1.0], b=0.0).green_stokes_residual(
        seg, PolyField(1, {(1,): 1.0}), constant(1, 1.0), level=3)
    assert abs(hand["volume_lhs"] - 1.0) < 1e-10
    assert abs(hand["volume_rhs"] + hand["boundary"] - 1.0) < 1e-10


def test_gate_07_weak_bv_pipeline_agreement():
    """The scalar-pairing and form-pairing residual wirings agree within
    1e-8 on holomorphic monomials and on f = conj(z), 30 test members."""
    tests = form_test_family(DISC, 1, 0, 30, seed=5)
    assert len(tests) == 30
    zero01 = DifferentialForm(1, 0, 1, {})
    cases = [(DifferentialForm(1, 0, 0, {((), ()): zmonomial(1, (k,), (0,))}),
              zero01) for k in range(3)]
    conj_z = DifferentialForm(1, 0, 0, {((), ()): zmonomial(1, (0,), (1,))})
    cases.append((conj_z, conj_z.dbar()))
    for f, F in cases:
        rep = equivalence_report(DISC, f, f, F, tests, level=2)
        assert rep["max_volume_route_diff"] < 1e-8
        assert rep["max_boundary_route_diff"] < 1e-8


def test_gate_08_exponent_lab_and_log_bound():
    """Case-III line is exactly r=p for (t,s,a,b)=(1,1.5,4,inf); the log
    bound constant C1 moves < 10% under one boundary refinement with
    fit_residual <= 0; the fitted majorant integrates for a in {1,2,4}."""
    spec = young.KernelSpec(X=("boundary", DISC), Y=("domain", DISC),
                            kernel=young.bmk_norm_kernel(1, 0),
                            t=1.0, s=1.5, a=4.0, b=math.inf)
    for p in (1.0, 1.5, 2.0):
        line = [q.r for q in young.admissible_exponents(spec, p)
                if q.case_tag == "III"]
        assert len(line) == 1 and np.isclose(line[0], p, rtol=1e-12)
    c0_lo, c1_lo, res_lo = young.log_bound_fit(DISC, level=5)
    c0_hi, c1_hi, res_hi = young.log_bound_fit(DISC, level=6)
    assert res_lo <= 0.0 and res_hi <= 0.0
    assert abs(c1_hi - c1_lo) / c1_lo < 0.10
    for a in (1, 2, 4):
        val = young.log_majorant_integral(DISC, c0_hi, c1_hi, a, level=3)
        assert np.isfinite(val) and val > 0


def test_gate_09_structural_suites():
    """Sign tables, star pairing, double star, dbar^2 = 0, and kernel
    bidegree bookkeeping, at the documented exhaustiveness levels."""
    # eps_sign: exhaustive antisymmetry and zero-on-repeat for n <= 4
    for n in range(1, 5):
        for k in range(1, n + 1):
            for base in multi_indices(n, k):
                for perm in itertools.permutations(base):
                    invs = sum(1 for i in range(k) for j in range(i + 1, k)
                               if perm[i] > perm[j])
                    assert eps_sign(perm, base) == (-1) ** invs
                if k >= 2:
                    assert eps_sign((base[0],) + base[:-1], base) == 0

    # star pairing: 200 random constant-coefficient forms, < 1e-12
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = int(rng.integers(1, 3))
        p = int(rng.integers(0, n + 1))
        q = int(rng.integers(0, n + 1))
        pt = np.zeros((1, 2 * n))

        def draw():
            return DifferentialForm(n, p, q, {
                (I, J): PolyField(2 * n, {(0,) * (2 * n): complex(
                    rng.standard_normal(), rng.standard_normal())})
                for I in multi_indices(n, p) for J in multi_indices(n, q)})
        a, b = draw(), draw()
        lhs = wedge(a, hodge_star(b).conj()).top_density()(pt)[0]
        rhs = sum(2.0 ** (p + q) * a.coeffs[k](pt)[0]
                  * np.conj(b.coeffs[k](pt)[0]) for k in a.coeffs)
        assert abs(lhs - rhs) < 1e-12

    # double star: (-1)^(p+q) on every basis monomial, n <= 3
    for n in range(1, 4):
        for p in range(n + 1):
            for q in range(n + 1):
                for I in multi_indices(n, p):
                    for J in multi_indices(n, q):
                        m = DifferentialForm.monomial(n, I, J)
                        back = hodge_star(hodge_star(m))
                        diff = back - m.scale((-1.0) ** (p + q))
                        assert diff.is_zero

    # dbar^2 = 0 exactly on polynomial forms
    f = DifferentialForm(2, 0, 0, {((), ()): zmonomial(2, (1, 2), (2, 1))})
    assert dbar(dbar(f)).is_zero
    g = DifferentialForm(2, 0, 1, {((), (1,)): zmonomial(2, (0, 1), (1, 0)),
                                   ((), (2,)): zmonomial(2, (2, 0), (0, 1))})
    assert dbar(dbar(g)).is_zero

    # kernel bidegree bookkeeping for all (n, q), n <= 2
    for n in (1, 2):
        zeta = np.arange(1.0, 2 * n + 1.0)
        z = np.zeros(2 * n)
        for q in range(-1, n + 1):
            table = bmk.kernel_eval(n, q, zeta, z)
            if q < 0 or q >= n:
                assert table == {}
                continue
            assert sorted(table) == multi_indices(n, q)
            for J, form in table.items():
                assert len(J) == q and form.bidegree == (n, n - q - 1)
