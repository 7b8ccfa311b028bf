"""Explicit solutions: the complete Heisenberg metric and the biaxial SU(2)
family, with evaluators and residual checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as spi

from .core import GroupSpec, rhs_vec


@dataclass(frozen=True)
class HeisenbergSolution:
    """``phi(q) = C sqrt(exp(rate q) + c1^2)``; the metric is
    ``phi (s1^2 + s2^2) + phi' (s3^2 + dq^2)`` with ``alpha = phi``.

    ``rate`` is 2 for the actual solution and exists only so that negative
    controls can perturb it.
    """

    c1: float
    C: float = 1.0
    rate: float = 2.0

    def __post_init__(self):
        if not self.c1 > 0:
            raise ValueError("c1 must be positive")
        if not self.C > 0:
            raise ValueError("C must be positive")

    @property
    def B(self) -> float:
        return self.c1 * self.c1


def _heis_parts(sol: HeisenbergSolution, q):
    q = np.asarray(q, dtype=float)
    E = np.exp(sol.rate * q)
    S = E + sol.B
    root = np.sqrt(S)
    phi = sol.C * root
    d1 = sol.C * 0.5 * sol.rate * E / root
    # d/dq of (k/2) E S^{-1/2} is (k^2/2) E S^{-1/2} - (k^2/4) E^2 S^{-3/2}
    d2 = sol.C * (0.5 * sol.rate**2 * E / root - 0.25 * sol.rate**2 * E * E / (S * root))
    return phi, d1, d2


def heis_eval(sol: HeisenbergSolution, q) -> tuple:
    """``(phi, phi', metric)`` with ``metric`` mapping the coframe directions to
    their coefficients."""
    phi, dphi, _ = _heis_parts(sol, q)
    metric = {"sigma1": phi, "sigma2": phi, "sigma3": dphi, "dq": dphi}
    return phi, dphi, metric


def heis_states(sol: HeisenbergSolution, q) -> tuple:
    """States ``(a, b, c, alpha) = (sqrt(phi), sqrt(phi), sqrt(phi'), phi)`` and
    their t-derivatives (``dt = dq / phi``)."""
    phi, d1, d2 = _heis_parts(sol, q)
    a = np.sqrt(phi)
    c = np.sqrt(d1)
    states = np.column_stack([a, a, c, phi])
    # d/dt = phi d/dq
    da = phi * d1 / (2 * a)
    dc = phi * d2 / (2 * c)
    derivs = np.column_stack([da, da, dc, phi * d1])
    return states, derivs


@dataclass(frozen=True)
class VerifyReport:
    heis1: float
    heis2: float
    system: float
    central: float
    ricci_flat_branch: bool = False

    @property
    def worst(self) -> float:
        return max(self.heis1, self.heis2, self.system, self.central)

    def to_dict(self) -> dict:
        return {"heis1": self.heis1, "heis2": self.heis2, "system": self.system, "central": self.central,
                "ricci_flat_branch": self.ricci_flat_branch}


def heis_verify(sol: HeisenbergSolution, samples: int = 1000, q_range=(-10.0, 10.0),
                alpha_zero: bool = False) -> VerifyReport:
    """Maximum relative residuals of the two q-chart equations, of the t-chart
    system, and of the central equation, on a uniform grid.

    ``alpha_zero`` substitutes the Ricci-flat branch; the first equation then
    loses its right-hand side and the report is flagged.
    """
    q = np.linspace(q_range[0], q_range[1], samples)
    phi, d1, d2 = _heis_parts(sol, q)
    alpha = np.zeros_like(phi) if alpha_zero else phi
    dalpha = np.zeros_like(phi) if alpha_zero else d1
    # (phi^2)''/(phi^2)' = 2 alpha/phi, cleared: phi phi'' + phi'^2 = 2 alpha phi'
    lhs = phi * d2 + d1 * d1
    rhs1 = 2.0 * alpha * d1
    heis1 = float(np.max(np.abs(lhs - rhs1) / np.maximum(np.abs(lhs), np.abs(rhs1))))
    # alpha' = (phi'/phi) alpha with lam = 0, cleared by phi
    heis2 = float(np.max(np.abs(phi * dalpha - d1 * alpha) / np.maximum(phi * np.abs(d1), 1e-300)))
    g = GroupSpec.heisenberg()
    states, derivs = heis_states(sol, q)
    if alpha_zero:
        states[:, 3] = 0.0
        derivs[:, 3] = 0.0
    f = rhs_vec(g, states)
    system = float(np.max(np.abs(f - derivs) / np.maximum(np.abs(derivs), np.abs(f)).max(axis=1, keepdims=True)))
    c2 = states[:, 2] ** 2
    res = 2 * states[:, 3] * derivs[:, 3] - 2 * c2 * states[:, 3] ** 2
    scale = np.maximum(1.0, np.maximum(np.abs(2 * states[:, 3] * derivs[:, 3]), 2 * c2 * states[:, 3] ** 2))
    central = float(np.max(np.abs(res) / scale))
    return VerifyReport(heis1, heis2, system, central, ricci_flat_branch=alpha_zero)


def heis_q_length(sol: HeisenbergSolution, q0: float, q1: float) -> float:
    """``|int_{q0}^{q1} sqrt(phi') dq|``; infinite when ``q1`` is ``+inf``."""
    if math.isinf(q1) and q1 > 0:
        return math.inf
    f = lambda q: math.sqrt(float(_heis_parts(sol, q)[1]))
    lo, hi = min(q0, q1), max(q0, q1)
    if math.isinf(lo):
        # sqrt(phi') ~ sqrt(rate C / (2 c1)) exp(rate q / 2) near the bolt end
        val, _ = spi.quad(f, -60.0, hi, limit=200)
        tail = math.sqrt(0.5 * sol.rate * sol.C / sol.c1) * math.exp(-30.0 * sol.rate) * 2.0 / sol.rate
        return val + tail
    val, _ = spi.quad(f, lo, hi, limit=200)
    return abs(val)


@dataclass(frozen=True)
class LengthBounds:
    x_bound: float
    y_bound: float
    q_bound: float
    verdict: str

    def to_dict(self) -> dict:
        return {"x_bound": self.x_bound, "y_bound": self.y_bound, "q_bound": self.q_bound, "verdict": self.verdict}


def heis_length_bounds(sol: HeisenbergSolution, curve) -> LengthBounds:
    """Lower bounds for the length of a curve given as an ``(n, 4)`` array of
    ``(x, y, z, q)`` samples along it.

    The x and y bounds use the infimum of ``sqrt(phi)`` over the visited q
    values; the q bound integrates ``sqrt(phi')`` over each monotone piece. A
    final ``q = +inf`` marks a curve escaping up the q axis.
    """
    curve = np.asarray(curve, dtype=float)
    x, y, q = curve[:, 0], curve[:, 1], curve[:, 3]
    finite_q = q[np.isfinite(q)]
    inf_phi = float(np.min(_heis_parts(sol, finite_q)[0])) if finite_q.size else math.inf
    root = math.sqrt(inf_phi) if math.isfinite(inf_phi) else 0.0
    xb = root * abs(x[-1] - x[0])
    yb = root * abs(y[-1] - y[0])
    qb = 0.0
    for q0, q1 in zip(q[:-1], q[1:]):
        if q0 != q1:
            qb += heis_q_length(sol, q0, q1)
    verdict = "EscapeNeedsInfiniteLength" if math.isinf(qb) else "Bounded"
    return LengthBounds(xb, yb, qb, verdict)


@dataclass(frozen=True)
class SU2BiaxialSolution:
    """The printed explicit family ``psi(q) = exp(k)/(2 gamma) exp(2 gamma q) + B``.

    In the chart ``dq = a^2 dt`` the function that satisfies this formula is
    ``psi = a^4``; the metric coefficient is ``phi = a^2 = sqrt(psi)`` and
    ``c^2 = phi'``.
    """

    gamma: float
    k: float = 0.0
    B: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1:
            raise ValueError("gamma must exceed 1")
        if self.B < 0:
            raise ValueError("B must be nonnegative")

    @property
    def exp_neg_A(self) -> float:
        return self.gamma - 1.0


def _su2_parts(sol: SU2BiaxialSolution, q):
    q = np.asarray(q, dtype=float)
    A = math.exp(sol.k) / (2 * sol.gamma)
    E = A * np.exp(2 * sol.gamma * q)
    psi = E + sol.B
    dpsi = 2 * sol.gamma * E
    ddpsi = 4 * sol.gamma**2 * E
    phi = np.sqrt(psi)
    dphi = dpsi / (2 * phi)
    ddphi = ddpsi / (2 * phi) - dpsi * dpsi / (4 * psi * phi)
    return psi, phi, dphi, ddphi


def su2_biaxial_psi(sol: SU2BiaxialSolution, q):
    return _su2_parts(sol, q)[0]


def su2_biaxial_eval(sol: SU2BiaxialSolution, q) -> tuple:
    """``(phi, phi')`` with ``phi = a^2``."""
    _, phi, dphi, _ = _su2_parts(sol, q)
    return phi, dphi


def su2_biaxial_states(sol: SU2BiaxialSolution, q) -> tuple:
    """States ``(a, a, c, e^{-A} a^2)`` and their t-derivatives."""
    _, phi, d1, d2 = _su2_parts(sol, q)
    a = np.sqrt(phi)
    c = np.sqrt(d1)
    e = sol.exp_neg_A
    states = np.column_stack([a, a, c, e * phi])
    da = phi * d1 / (2 * a)
    derivs = np.column_stack([da, da, phi * d2 / (2 * c), e * phi * d1])
    return states, derivs


def su2_biaxial_residual(sol: SU2BiaxialSolution, q) -> float:
    """Relative residual of the biaxial q-chart equation
    ``phi phi'' = phi' (2 gamma phi - phi')``."""
    _, phi, d1, d2 = _su2_parts(sol, q)
    lhs = phi * d2
    rhs = d1 * (2 * sol.gamma * phi - d1)
    return float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), np.abs(rhs))))


def su2_nut_comparison(gamma: float, t) -> np.ndarray:
    """The ``B = 0`` member in the t chart: ``a = b = (-gamma t)^{-1/2}``,
    ``c = (-t)^{-1/2}`` for ``t < 0``."""
    t = np.asarray(t, dtype=float)
    a = 1.0 / np.sqrt(-gamma * t)
    c = 1.0 / np.sqrt(-t)
    return np.column_stack([a, a, c, (gamma - 1.0) * a * a])


def su2_nut_trajectory(gamma: float, t_min: float = -1e9, t_max: float = -1.0, samples: int = 600):
    """The ``B = 0`` solution sampled on a geometric t grid as a trajectory
    whose left end is marked ``Infinite``.

    Backward integration cannot follow this solution: it separates the
    solutions that settle on a bolt from those that blow up, so rounding
    pushes a numerical run off it.
    """
    from .flow import Chart, EndKind, Endpoint, Trajectory

    if not (t_min < t_max < 0):
        raise ValueError("need t_min < t_max < 0")
    t = -np.geomspace(-t_min, -t_max, samples)
    states = su2_nut_comparison(gamma, t)
    g = GroupSpec.su2(gamma - 1.0)
    derivs = rhs_vec(g, states, full=True)
    return Trajectory(Chart.T, t, states, derivs, t.copy(),
                      Endpoint(float(t[0]), EndKind.Infinite, {"reason": "closed_form"}),
                      Endpoint(float(t[-1]), EndKind.UserLimit), g)
