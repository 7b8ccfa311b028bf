"""Acceptance criteria 1-10. Each test carries a ``criterion`` marker; the
conftest prints one summary line per criterion."""
from __future__ import annotations

import io
import math
import sys

import numpy as np
import pytest

from cklab import (
    Chart,
    Direction,
    GroupSpec,
    HeisenbergSolution,
    IntegratorOptions,
    SeedSpec,
    State,
    change_chart,
    classify,
    heis_verify,
    integrate,
    launch,
    linearize,
    make_equilibrium,
    resample,
    scale_symmetry,
    series_solve,
)
from cklab.ansatz import (
    central_curvature_ricci,
    central_residual_onevar,
    central_residual_reduced,
    central_residual_scale,
    implied_central_value,
)
from cklab.closed_form import heis_states
from cklab.core import Derivative, rhs
from cklab.diagnostics import End, Overall, distance_integral
from cklab.flow import first_integral_drift, integrate_both
from cklab import cli

criterion = pytest.mark.criterion

# --------------------------------------------------------------------------- 1

SU2_FAMILIES = ("SU2_qq0", "SU2_0qq", "SU2_q0q")


def _spectrum_error(computed, expected):
    got = np.sort(np.real_if_close(np.asarray(computed)).real)
    want = np.sort(np.asarray(expected, dtype=float))
    scale = max(1.0, np.max(np.abs(want)))
    return float(np.max(np.abs(got - want)) / scale)


@criterion(1)
@pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("e", [0.3, 1.0, 2.0])
def test_su2_eigenvalues_match_formulas(q, e):
    g = GroupSpec.su2(e)
    expected = {
        "SU2_qq0": [0.0, -2 * q * q, q * q * (1 + e)],
        "SU2_0qq": [q * q, 0.0, -2 * q * q],
        "SU2_q0q": [0.0, q * q, -2 * q * q],
    }
    for fam in SU2_FAMILIES:
        rep = linearize(g, make_equilibrium(g, fam, q))
        assert _spectrum_error(rep.eigenvalues, expected[fam]) <= 1e-10, fam


@criterion(1)
@pytest.mark.parametrize("q", [0.5, 1.0, 2.0])
def test_e2_eigenvalues_match_formula(q):
    g = GroupSpec.e2()
    rep = linearize(g, make_equilibrium(g, "E2_q0q0", q))
    assert _spectrum_error(rep.eigenvalues, [q * q, q * q, 0.0, -2 * q * q]) <= 1e-10


# --------------------------------------------------------------------------- 2

@criterion(2)
@pytest.mark.parametrize("c1", [0.5, 1.0, 2.0])
def test_heisenberg_closed_form_residual(c1):
    rep = heis_verify(HeisenbergSolution(c1), samples=1000, q_range=(-10.0, 10.0))
    assert rep.worst <= 1e-10
    assert not rep.ricci_flat_branch


@criterion(2)
@pytest.mark.parametrize("c1", [0.5, 1.0, 2.0])
def test_heisenberg_sigma3_expansion_matches_printed_coefficient(c1):
    """The sigma_3 coefficient at the bolt must read r^2 - r^4/(4 c1) + O(r^6)."""
    g = GroupSpec.heisenberg()
    sol = series_solve(g, make_equilibrium(g, "HEIS_bolt", c1), order=8)
    c = sol.coeffs["c"]
    c_squared = np.convolve(c, c)[:9]
    assert abs(c_squared[2] - 1.0) <= 1e-12
    assert abs(c_squared[4] - (-1.0 / (4.0 * c1))) <= 1e-8


# --------------------------------------------------------------------------- 3

def _max_scaled_central_residual(group, traj):
    worst = 0.0
    for i in range(len(traj)):
        s = traj.state(i)
        d = Derivative.from_array(traj.derivs[i])
        worst = max(worst, abs(central_residual_reduced(group, s, d)) / central_residual_scale(group, s))
    return worst


@criterion(3)
@pytest.mark.parametrize("run", ["su2_bolt_run", "e2_bolt_run"])
def test_central_residual_along_unstable_curve(run, request):
    g, _, _, traj = request.getfixturevalue(run)
    assert _max_scaled_central_residual(g, traj) <= 1e-9


@criterion(3)
@pytest.mark.parametrize("run", ["su2_bolt_run", "e2_bolt_run"])
def test_onevar_residual_converges_at_second_order(run, request):
    g, _, _, traj = request.getfixturevalue(run)
    tau_traj = change_chart(traj, Chart.Tau)
    centre = 1.0
    steps = (1e-2, 5e-3, 2.5e-3)
    errors = []
    for h in steps:
        mesh = centre + h * np.arange(-5, 6)
        errors.append(float(np.max(np.abs(central_residual_onevar(g, resample(tau_traj, mesh))))))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(np.abs(orders - 2.0) <= 0.2), orders


# --------------------------------------------------------------------------- 4

@criterion(4)
@pytest.mark.parametrize("e", [0.5, 1.0, 2.0])
def test_su2_first_integral_drift_full_system(e):
    """With alpha integrated as its own variable, ab/alpha is a genuine check."""
    g = GroupSpec.su2(e)
    eq = make_equilibrium(g, "SU2_qq0", 1.0)
    _, traj = launch(g, eq)
    start = State.from_array(traj.states[np.searchsorted(traj.t, 0.5)])
    for direction in (Direction.Backward, Direction.Forward):
        run = integrate(g, start, direction, full=True)
        assert first_integral_drift(run)["ab/alpha"] <= 1e-8


@criterion(4)
def test_e2_first_integral_drift(e2_bolt_run):
    _, _, _, traj = e2_bolt_run
    # the ratio is 0/0 at the equilibrium; measure from the first sample with alpha well resolved
    start = int(np.argmax(traj.states[:, 3] > 1e-3))
    rel = traj.states[start:, 0] * traj.states[start:, 1] / traj.states[start:, 3]
    assert float(np.max(np.abs(rel / rel[0] - 1.0))) <= 1e-8


@criterion(4)
def test_heisenberg_ratio_drift():
    g = GroupSpec.heisenberg()
    states, _ = heis_states(HeisenbergSolution(1.0), np.array([0.0]))
    traj = integrate_both(g, State.from_array(states[0]))
    assert first_integral_drift(traj)["a/b"] <= 1e-12


# --------------------------------------------------------------------------- 5

@criterion(5)
@pytest.mark.parametrize("e", [0.0, 1.0])
def test_su2_bolt_complete(e):
    g = GroupSpec.su2(e)
    rep = classify(g, SeedSpec("SU2_qq0", q=1.0))
    left, right = rep.left_distance, rep.right_distance
    assert left.verdict == "Finite"
    assert max(left.ratios[-4:]) < 0.9
    assert right.verdict == "Divergent"
    fit = right.fit
    assert fit is not None and fit.accepted
    assert abs(fit.exponent + 1.5) <= 0.05 * 1.5
    assert rep.overall == Overall.CompleteWithBolt


@criterion(5)
def test_e2_left_end_finite(e2_bolt_run):
    _, _, _, traj = e2_bolt_run
    assert distance_integral(traj, End.Left).verdict == "Finite"


@criterion(5)
def test_e2_right_end_divergent_via_w_chart():
    rep = classify(GroupSpec.e2(), SeedSpec("E2_q0q0", q=1.0))
    w = rep.extras["w_chart"]
    assert w["verdict"] == "Divergent"
    assert w["r2"] >= 0.99
    assert abs(w["constant"] - (0.5 * w["L"] + w["k"])) <= 0.01 * abs(w["constant"])


@criterion(5)
def test_e2_unstable_curve_complete():
    rep = classify(GroupSpec.e2(), SeedSpec("E2_q0q0", q=1.0))
    assert rep.overall == Overall.CompleteWithBolt, rep.reasons


# --------------------------------------------------------------------------- 6

@criterion(6)
@pytest.mark.parametrize("state, expected", [
    ((1.0, 0.5, 0.5, 0.5), (-0.5, 0.5, 0.5)),
    ((0.5, 0.5, 1.5, 0.2), (0.5, 0.5, -0.5)),
])
def test_e2_case_seeds_blow_up_with_printed_exponents(state, expected):
    rep = classify(GroupSpec.e2(), SeedSpec(state=state))
    assert rep.endpoints["left"]["kind"] == "FiniteBlowup"
    for name, want in zip("abc", expected):
        fit = rep.exponents[f"left_{name}"]
        assert abs(fit.exponent - want) <= 0.05 * abs(want), name
    assert rep.left_distance.verdict == "Finite"
    assert rep.overall == Overall.Incomplete


@criterion(6)
def test_su2_nut_incomplete():
    rep = classify(GroupSpec.su2(1.0), SeedSpec("SU2_origin"))
    assert rep.overall == Overall.Incomplete
    assert any("cannot have both slopes 1" in r for r in rep.reasons)


@criterion(6)
def test_su2_q0q_incomplete():
    rep = classify(GroupSpec.su2(1.0), SeedSpec("SU2_q0q", q=1.0))
    assert rep.overall == Overall.Incomplete


# --------------------------------------------------------------------------- 7

E2_PARITY = {"a": 0, "b": 1, "c": 0, "alpha": 0}  # 0 even, 1 odd


@criterion(7)
def test_e2_bolt_b_slope():
    g = GroupSpec.e2()
    sol = series_solve(g, make_equilibrium(g, "E2_q0q0", 1.0), order=8)
    assert abs(sol.coeffs["b"][1] - 1.0) <= 1e-12


@criterion(7)
@pytest.mark.parametrize("name", ["a", "b", "c", "alpha"])
def test_e2_bolt_cross_parity(name):
    g = GroupSpec.e2()
    sol = series_solve(g, make_equilibrium(g, "E2_q0q0", 1.0), order=8)
    coeffs = sol.coeffs[name]
    wrong = coeffs[1 - E2_PARITY[name]::2]
    assert float(np.max(np.abs(wrong))) <= 1e-12


@criterion(7)
def test_su2_nut_leading_coefficients():
    gamma = 2.0
    g = GroupSpec.su2(gamma - 1.0)
    sol = series_solve(g, make_equilibrium(g, "SU2_origin"), order=8)
    want = (math.sqrt(gamma) / 2, math.sqrt(gamma) / 2, gamma / 2)
    for name, w in zip("abc", want):
        assert abs(sol.coeffs[name][1] - w) <= 1e-12, name


@criterion(7)
@pytest.mark.parametrize("run, family", [("su2_bolt_run", "SU2_qq0"), ("e2_bolt_run", "E2_q0q0")])
def test_series_matches_integration(run, family, request):
    g, eq, _, traj = request.getfixturevalue(run)
    low = series_solve(g, eq, order=6)
    high = series_solve(g, eq, order=8)
    # the first omitted coefficients bound the truncation error
    C = 2.0 * max(abs(high.coeffs[n][7]) + 0.1 * abs(high.coeffs[n][8]) for n in high.names)
    r = np.linspace(0.0, 0.1, 21)[1:]
    sampled = resample(change_chart(traj, Chart.R), r)
    nv = len(low.names)
    mismatch = np.max(np.abs(low(r)[:, :nv] - sampled.states[:, :nv]), axis=1)
    assert np.all(mismatch <= C * r**7 + 1e-9), mismatch


# --------------------------------------------------------------------------- 8

E2_START = State(1.2265, 0.7182, 1.4643, 0.8809)


@criterion(8)
@pytest.mark.parametrize("k", [0.5, 2.0])
def test_e2_scaling_maps_trajectories(k):
    g = GroupSpec.e2()
    horizon = 0.3
    base = integrate(g, E2_START, Direction.Forward, t_stop=horizon)
    scaled = integrate(g, scale_symmetry(E2_START, k, g), Direction.Forward, t_stop=horizon / k**2)
    back = resample(scaled, base.coords / k**2).states
    back = back / np.array([k, 1.0, k, k * k])
    mismatch = np.max(np.abs(back - base.states) / np.abs(base.states))
    assert mismatch <= 1e-6


@criterion(8)
@pytest.mark.parametrize("k", [0.5, 2.0])
def test_e2_scaling_keeps_verdicts(k):
    g = GroupSpec.e2()
    for state in ((1.0, 0.5, 0.5, 0.5), (0.5, 0.5, 1.5, 0.2)):
        s = State(*state)
        scaled = scale_symmetry(s, k, g)
        base = classify(g, SeedSpec(state=tuple(s.as_array())))
        other = classify(g, SeedSpec(state=tuple(scaled.as_array())))
        assert (base.left_verdict, base.right_verdict, base.overall) == \
            (other.left_verdict, other.right_verdict, other.overall)
    base = classify(g, SeedSpec("E2_q0q0", q=1.0))
    other = classify(g, SeedSpec("E2_q0q0", q=k))
    assert (base.left_verdict, base.right_verdict, base.overall) == \
        (other.left_verdict, other.right_verdict, other.overall)


# --------------------------------------------------------------------------- 9

@criterion(9)
def test_ricci_route_agrees_with_reduced_central_value():
    rng = np.random.default_rng(2024)
    groups = (GroupSpec.su2(1.0), GroupSpec.e2(), GroupSpec.su2(0.5))
    worst = 0.0
    for _ in range(100):
        g = groups[int(rng.integers(len(groups)))]
        a, b, c = rng.uniform(0.2, 2.0, 3)
        alpha = g.exp_neg_A * a * b if g.tag.value == "su2" else rng.uniform(0.2, 2.0)
        s = State(a, b, c, alpha)
        dalpha = rng.uniform(-1.0, 1.0)
        d = rhs(g, s, full=True)
        d = Derivative(d.da, d.db, d.dc, dalpha)
        ricci = central_curvature_ricci(g, s, dalpha)
        implied = implied_central_value(g, s, d)
        worst = max(worst, abs(ricci - implied) / max(1.0, abs(implied)))
    assert worst <= 1e-8


# -------------------------------------------------------------------------- 10

def _classify_json(monkeypatch, argv):
    buf = io.StringIO()
    monkeypatch.setattr(sys, "stdout", buf)
    code = cli.main(argv)
    monkeypatch.setattr(sys, "stdout", sys.__stdout__)
    assert code == 0
    return buf.getvalue()


@criterion(10)
@pytest.mark.parametrize("argv", [
    ["classify", "--group", "su2", "--q", "1", "--exp-neg-a", "1", "--json"],
    ["classify", "--group", "e2", "--q", "1", "--json"],
    ["classify", "--group", "heisenberg", "--c1", "1", "--json"],
])
def test_classify_output_is_byte_identical(argv, monkeypatch, tmp_path):
    first = _classify_json(monkeypatch, argv + ["--out", str(tmp_path / "one")])
    second = _classify_json(monkeypatch, argv + ["--out", str(tmp_path / "two")])
    assert first == second
    a = (tmp_path / "one" / "classification.json").read_bytes()
    b = (tmp_path / "two" / "classification.json").read_bytes()
    assert a == b
