import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from cklab import (
    Chart,
    Direction,
    EndKind,
    GroupSpec,
    HeisenbergSolution,
    IntegratorOptions,
    State,
    Trajectory,
    change_chart,
    integrate,
    resample,
)
from cklab.closed_form import heis_eval, heis_states, su2_nut_trajectory
from cklab.core import rhs_vec
from cklab.errors import InvalidOptions, NonpositiveState, OutOfRange, UnsupportedLambda
from cklab.flow import cumulative_coordinate, first_integral_drift, integrate_both


def test_su2_bolt_run_ends(su2_bolt_run):
    _, _, _, traj = su2_bolt_run
    assert traj.left_end.kind == EndKind.EquilibriumCapture
    assert traj.right_end.kind == EndKind.FiniteBlowup
    assert math.isfinite(traj.right_end.value)
    assert np.all(np.diff(traj.coords) > 0)


def test_e2_case1_backward_blowup():
    traj = integrate(GroupSpec.e2(), State(1.0, 0.5, 0.5, 0.5), Direction.Backward)
    assert traj.left_end.kind == EndKind.FiniteBlowup
    assert traj.left_end.value < 0
    assert traj.right_end.kind == EndKind.UserLimit


def test_stationary_interior_state_gives_constant_trajectory():
    g = GroupSpec.custom(0.0, 0.0, 0.0)
    traj = integrate(g, State(1.0, 2.0, 3.0, 0.0), Direction.Forward, t_stop=2.0)
    assert traj.left_end.kind == EndKind.UserLimit and traj.right_end.kind == EndKind.UserLimit
    assert np.all(traj.states == traj.states[0])


def test_integrate_preconditions():
    with pytest.raises(NonpositiveState):
        integrate(GroupSpec.e2(), State(1.0, 0.0, 1.0, 0.0))
    with pytest.raises(UnsupportedLambda):
        integrate(GroupSpec.custom(1, 0, 1, lam=1.0), State(1, 1, 1, 1))
    with pytest.raises(InvalidOptions):
        IntegratorOptions(rel_tol=-1.0)
    with pytest.raises(InvalidOptions):
        IntegratorOptions(max_samples=1)
    with pytest.raises(InvalidOptions):
        integrate(GroupSpec.e2(), State(1, 1, 1, 1, t=1.0), Direction.Forward, t_stop=0.0)


def test_max_samples_is_a_user_limit():
    traj = integrate(GroupSpec.e2(), State(1, 1, 1, 1), Direction.Forward, IntegratorOptions(max_samples=10))
    assert len(traj) == 10
    assert traj.right_end.kind == EndKind.UserLimit
    assert traj.right_end.detail["reason"] == "max_samples"


@pytest.mark.parametrize("group, start", [
    (GroupSpec.e2(), State(1.2, 0.7, 1.5, 0.9)),
    (GroupSpec.su2(0.5), State(1.1, 0.8, 0.6)),
    (GroupSpec.heisenberg(), State(1.0, 1.3, 0.4, 0.8)),
])
def test_matches_scipy_reference(group, start):
    """DOP853 at tight tolerance serves as an independent oracle."""
    traj = integrate(group, start, Direction.Forward, IntegratorOptions(rel_tol=1e-11), t_stop=0.4)
    full = group.tag.value != "su2"

    def field(_, y):
        y4 = np.array(y) if full else np.append(y, group.exp_neg_A * y[0] * y[1])
        return rhs_vec(group, y4)[: len(y)]

    y0 = start.as_array() if full else start.as_array()[:3]
    ref = solve_ivp(field, (0.0, 0.4), y0, method="DOP853", rtol=1e-13, atol=1e-15, t_eval=traj.t)
    assert np.allclose(traj.states[:, : len(y0)], ref.y.T, rtol=1e-8, atol=1e-12)


def test_tolerance_tightening_is_consistent():
    g = GroupSpec.e2()
    start = State(1.2, 0.7, 1.5, 0.9)
    for stop in (0.1, 0.3, 0.5):
        coarse = integrate(g, start, Direction.Forward, IntegratorOptions(rel_tol=1e-9), t_stop=stop)
        fine = integrate(g, start, Direction.Forward, IntegratorOptions(rel_tol=1e-10), t_stop=stop)
        assert coarse.t[-1] == fine.t[-1] == stop
        assert np.max(np.abs(fine.states[-1] - coarse.states[-1]) / np.abs(coarse.states[-1])) < 10 * 1e-9


def test_biaxial_w3_quantity_is_constant(su2_bolt_run):
    g, _, _, traj = su2_bolt_run
    a, c = traj.states[:, 0], traj.states[:, 2]
    w3 = a * a
    dw3 = w3 * c * c  # w3' = w1 w2
    delta = dw3 - g.gamma * w3 * w3
    keep = traj.t < traj.right_end.value - 0.2
    assert np.ptp(delta[keep]) <= 1e-7


def test_monotone_products(su2_bolt_run, e2_bolt_run):
    for _, _, _, traj in (su2_bolt_run, e2_bolt_run):
        a, b, c = traj.states[:, 0], traj.states[:, 1], traj.states[:, 2]
        for prod in (a * b, a * c, b * c):
            assert np.all(np.diff(prod) >= -1e-10 * prod[:-1])


def test_heisenberg_q_chart_matches_closed_form():
    sol = HeisenbergSolution(1.0)
    states, _ = heis_states(sol, np.array([0.0]))
    traj = integrate_both(GroupSpec.heisenberg(), State.from_array(states[0]))
    q_traj = change_chart(traj, Chart.Q)
    q = q_traj.coords - q_traj.coords[np.searchsorted(traj.t, 0.0)]
    keep = (q > -8.0) & (q < 3.0)
    phi, _, _ = heis_eval(sol, q[keep])
    assert np.max(np.abs(phi - traj.states[keep, 0] ** 2) / phi) <= 1e-8


def test_r_chart_on_bolt(su2_bolt_run):
    _, _, _, traj = su2_bolt_run
    r_traj = change_chart(traj, Chart.R)
    assert 0 < r_traj.coords[0] < 1e-8
    abc = np.prod(traj.states[:, :3], axis=1)
    # dr/dt = abc: the r-derivatives times abc recover the t-derivatives
    assert np.allclose(r_traj.derivs * abc[:, None], traj.derivs, rtol=1e-12, atol=1e-300)


def test_change_chart_identity_and_round_trip(e2_bolt_run):
    _, _, _, traj = e2_bolt_run
    assert change_chart(traj, Chart.T) is traj
    back = change_chart(change_chart(traj, Chart.Tau), Chart.T)
    assert np.array_equal(back.coords, traj.t)
    assert np.allclose(back.derivs, traj.derivs, rtol=1e-12)


def test_cumulative_coordinate_is_fourth_order():
    errors = []
    for n in (11, 21, 41):
        t = np.linspace(0.0, 1.0, n)
        got = cumulative_coordinate(t, np.exp(t), np.exp(t))[-1]
        errors.append(abs(got - (math.e - 1.0)))
    assert errors[0] / errors[1] == pytest.approx(16.0, rel=0.1)
    assert errors[1] / errors[2] == pytest.approx(16.0, rel=0.1)


def test_cumulative_coordinate_with_curvature_is_sixth_order():
    errors = []
    for n in (6, 11, 21):
        t = np.linspace(0.0, 1.0, n)
        e = np.exp(t)
        errors.append(abs(cumulative_coordinate(t, e, e, e)[-1] - (math.e - 1.0)))
    assert errors[0] / errors[1] == pytest.approx(64.0, rel=0.15)
    assert errors[1] / errors[2] == pytest.approx(64.0, rel=0.15)


def test_resample_on_nodes_and_single_point(e2_bolt_run):
    _, _, _, traj = e2_bolt_run
    nodes = traj.coords[100:110]
    same = resample(traj, nodes)
    assert np.array_equal(same.states, traj.states[100:110])
    one = resample(traj, [traj.coords[50] * 0.5 + traj.coords[51] * 0.5])
    assert len(one) == 1
    with pytest.raises(OutOfRange):
        resample(traj, [traj.coords[-1] + 1.0])


def test_hermite_interpolation_is_fourth_order():
    exact = su2_nut_trajectory(2.0, -10.0, -1.0, samples=2000)
    errors = []
    for n in (40, 80, 160):
        coarse = su2_nut_trajectory(2.0, -10.0, -1.0, samples=n)
        mids = 0.5 * (coarse.coords[:-1] + coarse.coords[1:])
        got = resample(coarse, mids).states
        want = resample(exact, mids).states
        errors.append(np.max(np.abs(got - want)))
    assert errors[0] / errors[1] > 12 and errors[1] / errors[2] > 12


def test_first_integral_drift_reports_each_integral():
    g = GroupSpec.heisenberg()
    traj = integrate(g, State(1.0, 2.0, 0.5, 1.0), Direction.Forward, t_stop=0.3)
    drift = first_integral_drift(traj)
    assert set(drift) == {"a/b", "alpha/phi"}
    assert drift["a/b"] <= 1e-12


def test_trajectory_constant_helper():
    traj = Trajectory.constant(State(1, 1, 1, 1), 0.0, 1.0, n=5)
    assert len(traj) == 5 and traj.chart == Chart.T
    assert [s.a for _, s in traj.samples()] == [1.0] * 5
