import math

import numpy as np
import pytest

from cklab import Direction, GroupSpec, IntegratorOptions, State, integrate
from cklab.closed_form import (
    HeisenbergSolution,
    SU2BiaxialSolution,
    heis_eval,
    heis_length_bounds,
    heis_q_length,
    heis_states,
    heis_verify,
    su2_biaxial_eval,
    su2_biaxial_psi,
    su2_biaxial_residual,
    su2_biaxial_states,
    su2_nut_comparison,
)
from cklab.core import rhs_vec


def test_heisenberg_value_at_origin():
    phi, dphi, metric = heis_eval(HeisenbergSolution(1.0), 0.0)
    assert phi == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert dphi == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)
    assert metric["sigma1"] == metric["sigma2"] == phi
    assert metric["sigma3"] == metric["dq"] == dphi


def test_heisenberg_limits():
    sol = HeisenbergSolution(1.5, C=2.0)
    phi, dphi, _ = heis_eval(sol, np.array([-40.0, 40.0]))
    assert phi[0] == pytest.approx(2.0 * 1.5)
    assert dphi[0] < 1e-30
    # phi' / phi tends to 1 as q grows
    assert dphi[1] / phi[1] == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("c1", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("C", [0.5, 1.0, 3.0])
def test_heisenberg_residuals(c1, C):
    assert heis_verify(HeisenbergSolution(c1, C)).worst <= 1e-10


def test_wrong_rate_is_detected():
    rep = heis_verify(HeisenbergSolution(1.0, rate=2.1))
    assert rep.worst > 1e-3


def test_ricci_flat_branch_is_flagged():
    rep = heis_verify(HeisenbergSolution(1.0), alpha_zero=True)
    assert rep.ricci_flat_branch
    assert rep.heis1 > 1e-3
    assert rep.to_dict()["ricci_flat_branch"] is True


def test_heisenberg_states_follow_t_flow():
    sol = HeisenbergSolution(0.8)
    states, _ = heis_states(sol, np.array([-1.0]))
    q_grid = np.array([-1.0, -0.5, 0.0])
    want, _ = heis_states(sol, q_grid)
    # dt = dq / phi, so the t values follow from a quadrature in q
    fine = np.linspace(-1.0, 0.0, 4001)
    phi, _, _ = heis_eval(sol, fine)
    t_of_q = np.concatenate([[0.0], np.cumsum(0.5 * (1 / phi[1:] + 1 / phi[:-1]) * np.diff(fine))])
    t_stop = float(t_of_q[-1])
    traj = integrate(GroupSpec.heisenberg(), State.from_array(states[0]), Direction.Forward,
                     IntegratorOptions(rel_tol=1e-11), t_stop=t_stop)
    assert np.allclose(traj.states[-1], want[-1], rtol=1e-6)


def test_heisenberg_q_length():
    sol = HeisenbergSolution(1.0)
    assert math.isinf(heis_q_length(sol, 0.0, math.inf))
    full = heis_q_length(sol, -math.inf, 0.0)
    assert 0 < full < math.inf
    assert heis_q_length(sol, 0.0, 1.0) == pytest.approx(heis_q_length(sol, 1.0, 0.0))


def test_length_bounds():
    sol = HeisenbergSolution(1.0)
    escape = heis_length_bounds(sol, [[0, 0, 0, 0.0], [0, 0, 0, math.inf]])
    assert escape.verdict == "EscapeNeedsInfiniteLength" and math.isinf(escape.q_bound)
    sideways = heis_length_bounds(sol, [[0, 0, 0, 0.0], [1.0, 0, 0, 0.0]])
    assert sideways.x_bound == pytest.approx(math.sqrt(heis_eval(sol, 0.0)[0]))
    assert sideways.q_bound == 0.0 and sideways.verdict == "Bounded"
    still = heis_length_bounds(sol, [[0.3, 0.2, 0.1, 0.5]] * 3)
    assert (still.x_bound, still.y_bound, still.q_bound) == (0.0, 0.0, 0.0)


def test_su2_biaxial_psi_example():
    sol = SU2BiaxialSolution(2.0, k=0.0, B=1.0)
    assert su2_biaxial_psi(sol, 0.0) == pytest.approx(1.25, abs=1e-15)
    phi, _ = su2_biaxial_eval(sol, 0.0)
    assert phi == pytest.approx(math.sqrt(1.25))


@pytest.mark.parametrize("gamma, B", [(2.0, 1.0), (1.5, 0.0), (3.0, 0.4)])
def test_su2_biaxial_solves_system(gamma, B):
    sol = SU2BiaxialSolution(gamma, k=0.3, B=B)
    q = np.linspace(-3.0, 1.0, 200)
    assert su2_biaxial_residual(sol, q) <= 1e-9
    states, derivs = su2_biaxial_states(sol, q)
    f = rhs_vec(GroupSpec.su2(sol.exp_neg_A), states, full=True)
    assert np.max(np.abs(f - derivs) / np.abs(derivs).max(axis=1, keepdims=True)) <= 1e-9


def test_su2_nut_member_matches_integration():
    gamma = 2.0
    g = GroupSpec.su2(gamma - 1.0)
    start = su2_nut_comparison(gamma, [-1.0])[0]
    traj = integrate(g, State(*start[:3], t=-1.0), Direction.Forward, IntegratorOptions(rel_tol=1e-11), t_stop=-0.25)
    want = su2_nut_comparison(gamma, traj.t)
    assert np.max(np.abs(traj.states[:, :3] - want[:, :3]) / want[:, :3]) <= 1e-8


def test_invalid_parameters():
    with pytest.raises(ValueError):
        HeisenbergSolution(0.0)
    with pytest.raises(ValueError):
        SU2BiaxialSolution(1.0)
    with pytest.raises(ValueError):
        SU2BiaxialSolution(2.0, B=-1.0)
