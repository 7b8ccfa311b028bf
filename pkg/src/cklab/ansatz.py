"""Shear-ansatz functions of a diagonal metric, Ricci-form coefficients and two
evaluators of the central curvature."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Derivative, GroupSpec, State, check_interior, jacobian, rhs_vec, slave_alpha
from .errors import ChartMismatch, InsufficientSamples

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class AnsatzFrame:
    A: float
    B: float
    C: float
    D: float
    E: float
    F: float
    G: float
    H: float
    L: float
    N: float

    def kahler_defects(self) -> tuple:
        """``(A-D-(F+G), B+C-(H-E), N-(A+D), N+(E+H))``; all zero for a Kähler frame."""
        return (
            self.A - self.D - (self.F + self.G),
            self.B + self.C - (self.H - self.E),
            self.N - (self.A + self.D),
            self.N + (self.E + self.H),
        )


@dataclass(frozen=True)
class ReducedVars:
    P: float
    Q: float
    R: float
    S: float | None
    L: float
    N: float

    @property
    def s_defined(self) -> bool:
        return self.S is not None


@dataclass(frozen=True)
class RicciCoefficients:
    r_alpha: float
    r_beta: float
    r_gamma: float = 0.0
    r_delta: float = 0.0
    r_phi: float = 0.0
    r_psi: float = 0.0

    def central(self) -> float:
        return self.r_alpha * self.r_beta - self.r_gamma * self.r_psi + self.r_delta * self.r_phi


def ansatz_map(group: GroupSpec, s: State, d: Derivative) -> AnsatzFrame:
    check_interior(s)
    a, b, c = s.a, s.b, s.c
    p1, p2, p3 = group.p1, group.p2, group.p3
    A = -d.da / (SQRT2 * a * a * b * c)
    D = -d.db / (SQRT2 * a * b * b * c)
    L = -d.dc / (SQRT2 * a * b * c * c)
    N = -c * p3 / (SQRT2 * a * b)
    B = -b * p2 / (SQRT2 * a * c)
    C = a * p1 / (SQRT2 * b * c)
    return AnsatzFrame(A=A, B=B, C=C, D=D, E=-A, F=B, G=C, H=-D, L=L, N=N)


def reduced_vars(group: GroupSpec, s: State, d: Derivative | None = None) -> ReducedVars:
    """P, Q, R, S together with L, N.

    ``S`` is ``None`` where ``F + G`` vanishes, since the angle is undefined there.
    ``L`` needs the derivative; if ``d`` is omitted it is taken from the system.
    """
    check_interior(s)
    if d is None:
        d = Derivative.from_array(rhs_vec(group, slave_alpha(group, s.as_array())))
    a, b, c = s.a, s.b, s.c
    abc = a * b * c
    P = -SQRT2 * (a * a * group.p1 + b * b * group.p2) / abc
    # taken as a modulus so that R >= 0 for either ordering of a^2 p1 and b^2 p2
    R = abs(a * a * group.p1 - b * b * group.p2) / abc
    frame = ansatz_map(group, s, d)
    S = math.pi / 4 if frame.F + frame.G != 0.0 else None
    return ReducedVars(P=P, Q=0.0, R=R, S=S, L=frame.L, N=frame.N)


def reduced_vars_from_frame(frame: AnsatzFrame) -> ReducedVars:
    """The same variables computed from the bracket functions through the
    general change of variables ``P = (B-C)+(F-G)``, ``Q = (B-C)-(F-G)``,
    ``R = |(B+C, F+G)|``, ``S = atan((B+C)/(F+G))``."""
    P = (frame.B - frame.C) + (frame.F - frame.G)
    Q = (frame.B - frame.C) - (frame.F - frame.G)
    R = math.hypot(frame.B + frame.C, frame.F + frame.G)
    fg = frame.F + frame.G
    S = math.atan((frame.B + frame.C) / fg) if fg != 0.0 else None
    return ReducedVars(P=P, Q=Q, R=R, S=S, L=frame.L, N=frame.N)


def kahler_combination(frame: AnsatzFrame) -> float:
    """``2L + C - H + A - F``, the bracket shared by the first two Ricci coefficients."""
    return 2.0 * frame.L + frame.C - frame.H + frame.A - frame.F


def ricci_coefficients(frame: AnsatzFrame, dL: float, dCH: float, dAF: float) -> RicciCoefficients:
    """Ricci-form coefficients of a cohomogeneity-one frame.

    ``dL``, ``dCH`` and ``dAF`` are the ``tau``-derivatives of ``L``, ``C - H`` and
    ``A - F``. Along the orbit-transverse direction the frame derivatives act as
    ``d_k = d/dtau``, ``d_t = -d/dtau`` and hence ``d_{k-t} = 2 d/dtau``.
    """
    y = kahler_combination(frame)
    r_alpha = -frame.N * y
    r_beta = -frame.L * y + 2.0 * dL + dCH + dAF
    return RicciCoefficients(r_alpha=r_alpha, r_beta=r_beta)


def frame_tau_derivatives(group: GroupSpec, s: State, dalpha: float | None = None) -> tuple:
    """Exact ``tau``-derivatives of ``L``, ``C - H`` and ``A - F`` at ``s``.

    First derivatives come from the system itself; second derivatives from its
    Jacobian, using ``dalpha`` in place of the alpha equation when given (this
    lets the Ricci route be evaluated off the centrally flat locus).
    """
    check_interior(s)
    y = s.as_array()
    d = rhs_vec(group, y, full=True)
    if dalpha is not None:
        d[3] = dalpha
    dd = jacobian(group, y, full=True) @ d
    a, b, c = y[:3]
    da, db, dc = d[:3]
    dda, ddb, ddc = dd[:3]
    ra, rb, rc = da / a, db / b, dc / c
    p1, p2 = group.p1, group.p2

    L_t = -(ddc - dc * (ra + rb + 2 * rc)) / (SQRT2 * a * b * c * c)
    C_t = p1 * a / (SQRT2 * b * c) * (ra - rb - rc)
    Dm_t = (ddb - db * (ra + 2 * rb + rc)) / (SQRT2 * a * b * b * c)  # derivative of b'/(sqrt2 a b^2 c) = -D
    A_t = -(dda - da * (2 * ra + rb + rc)) / (SQRT2 * a * a * b * c)
    F_t = -p2 * b / (SQRT2 * a * c) * (rb - ra - rc)
    speed = SQRT2 * a * b * c
    # H = -D = b'/(sqrt2 a b^2 c)
    return L_t / speed, (C_t - Dm_t) / speed, (A_t - F_t) / speed


def central_curvature_ricci(group: GroupSpec, s: State, dalpha: float | None = None) -> float:
    """Central curvature ``r_alpha r_beta - r_gamma r_psi + r_delta r_phi`` at ``s``."""
    d = rhs_vec(group, s.as_array(), full=True)
    if dalpha is not None:
        d[3] = dalpha
    frame = ansatz_map(group, s, Derivative.from_array(d))
    return ricci_coefficients(frame, *frame_tau_derivatives(group, s, dalpha)).central()


def central_residual_reduced(group: GroupSpec, s: State, d: Derivative) -> float:
    """``p3 (alpha^2)' - 2 c^2 (lam (ab)^4 + p3^2 alpha^2)``."""
    check_interior(s)
    p3, lam = group.p3, group.lam
    return p3 * 2.0 * s.alpha * d.dalpha - 2.0 * s.c**2 * (lam * (s.a * s.b) ** 4 + p3 * p3 * s.alpha**2)


def implied_central_value(group: GroupSpec, s: State, d: Derivative) -> float:
    """The ``lam`` for which :func:`central_residual_reduced` would vanish."""
    check_interior(s)
    p3 = group.p3
    return (p3 * 2.0 * s.alpha * d.dalpha - 2.0 * s.c**2 * p3 * p3 * s.alpha**2) / (2.0 * s.c**2 * (s.a * s.b) ** 4)


def central_residual_scale(group: GroupSpec, s: State) -> float:
    return max(1.0, group.p3**2 * s.alpha**2 * s.c**2)


def onevar_bracket(group: GroupSpec, states: np.ndarray) -> tuple:
    """``X = 2L + N - P/2`` and ``L``, ``N`` at each row of an ``(n, 4)`` array."""
    a, b, c = states[:, 0], states[:, 1], states[:, 2]
    d = rhs_vec(group, states, full=True)
    abc = a * b * c
    L = -d[:, 2] / (SQRT2 * abc * c)
    N = -c * group.p3 / (SQRT2 * a * b)
    P = -SQRT2 * (a * a * group.p1 + b * b * group.p2) / abc
    return 2.0 * L + N - 0.5 * P, L, N


def central_residual_onevar(group: GroupSpec, traj) -> np.ndarray:
    """``-N X (-L X + dX/dtau) - lam`` at interior samples of a ``tau``-chart
    trajectory, with ``dX/dtau`` from three-point centred differences.

    Returns an ``(n-2,)`` array aligned with samples ``1 .. n-2``.
    """
    from .flow import Chart

    if traj.chart != Chart.Tau:
        raise ChartMismatch(f"one-variable residual needs the tau chart, got {traj.chart.value}")
    if len(traj.coords) < 3:
        raise InsufficientSamples("need at least three samples")
    tau = np.asarray(traj.coords, dtype=float)
    X, L, N = onevar_bracket(group, slave_alpha(group, traj.states))
    h0 = tau[1:-1] - tau[:-2]
    h1 = tau[2:] - tau[1:-1]
    dX = (
        -h1 / (h0 * (h0 + h1)) * X[:-2]
        + (h1 - h0) / (h0 * h1) * X[1:-1]
        + h0 / (h1 * (h0 + h1)) * X[2:]
    )
    Xi, Li, Ni = X[1:-1], L[1:-1], N[1:-1]
    return -Ni * Xi * (-Li * Xi + dX) - group.lam
