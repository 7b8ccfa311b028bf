"""Equilibria of the SU(2) and E(2) systems, their linearisations and seeds on
unstable curves."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .core import Group, GroupSpec, State, VectorField, jacobian, rhs_terms, rhs_vec, uses_reduced
from .powerseries import Series
from .errors import (
    DegenerateParameter,
    InvalidOptions,
    NoUnstableDirection,
    SeedLeavesPositiveOrthant,
    UnsupportedGroup,
)


class Family(str, enum.Enum):
    SU2_qq0 = "SU2_qq0"
    SU2_0qq = "SU2_0qq"
    SU2_q0q = "SU2_q0q"
    SU2_origin = "SU2_origin"
    E2_q0q0 = "E2_q0q0"
    E2_0p0r = "E2_0p0r"
    # used by the series module for the Heisenberg bolt at c = 0
    HEIS_bolt = "HEIS_bolt"


_GROUP_OF = {
    Family.SU2_qq0: Group.SU2,
    Family.SU2_0qq: Group.SU2,
    Family.SU2_q0q: Group.SU2,
    Family.SU2_origin: Group.SU2,
    Family.E2_q0q0: Group.E2,
    Family.E2_0p0r: Group.E2,
    Family.HEIS_bolt: Group.HEISENBERG,
}


@dataclass(frozen=True)
class Equilibrium:
    point: State
    family: Family
    parameters: tuple

    @property
    def q(self) -> float:
        return self.parameters[0]

    def as_array(self) -> np.ndarray:
        return self.point.as_array()


def make_equilibrium(group: GroupSpec, family, *params) -> Equilibrium:
    family = Family(family)
    if _GROUP_OF[family] != group.tag:
        raise UnsupportedGroup(f"family {family.value} does not belong to {group.tag.value}")
    e = group.exp_neg_A
    if family == Family.E2_0p0r:
        if len(params) != 2:
            raise InvalidOptions("E2_0p0r needs (p, r)")
        p, r = (float(v) for v in params)
        if p < 0:
            raise InvalidOptions("p must be nonnegative")
        return Equilibrium(State(0.0, p, 0.0, r), family, (p, r))
    if family == Family.SU2_origin:
        return Equilibrium(State(0.0, 0.0, 0.0, 0.0), family, (0.0,))
    if len(params) != 1:
        raise InvalidOptions(f"{family.value} needs a single parameter")
    q = float(params[0])
    if q < 0:
        raise InvalidOptions("q must be nonnegative")
    if family == Family.SU2_qq0:
        pt = State(q, q, 0.0, e * q * q)
    elif family == Family.SU2_0qq:
        pt = State(0.0, q, q, 0.0)
    elif family == Family.SU2_q0q:
        pt = State(q, 0.0, q, 0.0)
    elif family == Family.E2_q0q0:
        pt = State(q, 0.0, q, 0.0)
    else:
        # the parameter is c1, the bolt value of phi = a^2 = alpha
        pt = State(math.sqrt(q), math.sqrt(q), 0.0, q)
    return Equilibrium(pt, family, (q,))


def list_equilibria(group: GroupSpec, qs=(1.0,), prs=((1.0, 1.0),)) -> list:
    """Representatives of every equilibrium family of ``group`` at the given
    parameter values."""
    if group.tag == Group.SU2:
        out = []
        for q in qs:
            for fam in (Family.SU2_qq0, Family.SU2_0qq, Family.SU2_q0q):
                out.append(make_equilibrium(group, fam, q))
        out.append(make_equilibrium(group, Family.SU2_origin))
        return out
    if group.tag == Group.E2:
        out = [make_equilibrium(group, Family.E2_q0q0, q) for q in qs]
        out += [make_equilibrium(group, Family.E2_0p0r, p, r) for p, r in prs]
        return out
    raise UnsupportedGroup("equilibrium analysis covers the SU(2) and E(2) systems")


def residual_at(group: GroupSpec, eq: Equilibrium) -> np.ndarray:
    return VectorField(group)(VectorField(group).project(eq.as_array()))


@dataclass
class LinearizationReport:
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    unstable_directions: list = field(default_factory=list)
    unstable_eigenvalues: list = field(default_factory=list)
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return self.jacobian.shape[0]

    def eigen_residual(self) -> float:
        """Largest ``|Jv - lambda v| / |v|`` over the reported unstable pairs."""
        worst = 0.0
        for lam, basis in zip(self.unstable_eigenvalues, self.unstable_directions):
            for v in np.atleast_2d(basis.T):
                worst = max(worst, float(np.linalg.norm(self.jacobian @ v - lam * v) / np.linalg.norm(v)))
        return worst


def _cluster(values: np.ndarray, tol: float) -> list:
    groups: list = []
    for v in sorted(values):
        if groups and abs(v - groups[-1][-1]) <= tol * max(1.0, abs(v)):
            groups[-1].append(v)
        else:
            groups.append([v])
    return [float(np.mean(g)) for g in groups]


def linearize(group: GroupSpec, eq: Equilibrium, strict: bool = False) -> LinearizationReport:
    """Jacobian at ``eq``, its spectrum, and a basis of each positive eigenspace.

    A zero parameter gives the all-zero spectrum; the report is flagged
    ``degenerate`` (or :class:`DegenerateParameter` is raised when ``strict``).
    """
    if _GROUP_OF[eq.family] != group.tag:
        raise UnsupportedGroup(f"family {eq.family.value} does not belong to {group.tag.value}")
    J = jacobian(group, eq.as_array())
    degenerate = eq.family != Family.E2_0p0r and eq.q == 0.0
    if degenerate and strict:
        raise DegenerateParameter(f"{eq.family.value} at q = 0 has an all-zero linearisation")
    eig = np.linalg.eigvals(J)
    eig = np.where(np.abs(eig.imag) < 1e-14 * max(1.0, np.abs(eig).max()), eig.real, eig)
    eig = np.real_if_close(eig)
    scale = max(1.0, float(np.abs(eig).max()))
    positives = [float(v.real) for v in np.atleast_1d(eig) if abs(np.imag(v)) == 0 and np.real(v) > 1e-12 * scale]
    dirs, lams = [], []
    for lam in _cluster(np.array(positives), 1e-8):
        basis = null_space(J - lam * np.eye(J.shape[0]), rcond=1e-9)
        if basis.shape[1] == 0:
            continue
        dirs.append(basis)
        lams.append(lam)
    return LinearizationReport(J, np.atleast_1d(eig), dirs, lams, degenerate)


def analytic_eigenvalues(group: GroupSpec, eq: Equilibrium) -> list:
    """The closed-form spectra, used as an oracle."""
    q = eq.q
    g = group.exp_neg_A
    fam = eq.family
    if fam == Family.SU2_qq0:
        return [0.0, -2 * q * q, q * q * (1 + g)]
    if fam == Family.SU2_0qq:
        return [q * q, 0.0, -2 * q * q]
    if fam == Family.SU2_q0q:
        return [0.0, q * q, -2 * q * q]
    if fam == Family.SU2_origin:
        return [0.0, 0.0, 0.0]
    if fam == Family.E2_q0q0:
        return [q * q, q * q, 0.0, -2 * q * q]
    if fam == Family.E2_0p0r:
        return [0.0, 0.0, 0.0, eq.parameters[1]]
    raise UnsupportedGroup(fam.value)


def e2_unstable_basis(q: float) -> np.ndarray:
    """Basis of the double ``q^2`` eigenspace at ``(q, 0, q, 0)``.

    Columns: the ``b`` axis, and the vector with unit ``alpha`` component
    ``(1/(3q), 0, 2/(3q), 1)``.
    """
    return np.array([[0.0, 1.0, 0.0, 0.0], [1 / (3 * q), 0.0, 2 / (3 * q), 1.0]]).T


def unstable_direction(group: GroupSpec, eq: Equilibrium, report: LinearizationReport, weights=None) -> np.ndarray:
    """Unit vector in the positive eigenspace, as a 4-vector ``(a, b, c, alpha)``.

    For the E(2) double eigenvalue the direction is ``w_b e_b + w_alpha u`` with
    ``u`` from :func:`e2_unstable_basis`; the weights are therefore the ``b`` and
    ``alpha`` components before normalisation, and the launched curve has
    ``alpha / (ab) -> w_alpha / (q w_b)``.
    """
    if not report.unstable_directions:
        raise NoUnstableDirection(f"no positive eigenvalue at {eq.family.value} {eq.parameters}")
    idx = int(np.argmax(report.unstable_eigenvalues))
    basis = report.unstable_directions[idx]
    if eq.family == Family.E2_q0q0 and basis.shape[1] == 2:
        w = (1.0, 1.0) if weights is None else tuple(float(x) for x in weights)
        if len(w) != 2 or min(w) < 0 or max(w) == 0:
            raise InvalidOptions("E(2) eigenspace weights must be two nonnegative numbers, not both zero")
        v = e2_unstable_basis(eq.q) @ np.array(w)
    elif basis.shape[1] > 1:
        w = np.ones(basis.shape[1]) if weights is None else np.asarray(weights, dtype=float)
        v = basis @ w
    else:
        v = basis[:, 0]
    if v.shape[0] == 3:
        v = np.append(v, 0.0)
    return v / np.linalg.norm(v)


def manifold_terms(group: GroupSpec, eq: Equilibrium, v4: np.ndarray, lam: float, order: int) -> list:
    """Coefficients ``w_1 = v, w_2, ...`` of the unstable curve
    ``p + sum_k s^k w_k`` whose flow is ``s' = lam s``.

    Matching powers of ``s`` gives ``(J - k lam) w_k = -[s^k] f(p + sum_{j<k} s^j w_j)``.
    """
    vf = VectorField(group)
    p = vf.project(eq.as_array())
    J = jacobian(group, eq.as_array())
    ws = [vf.project(v4)]
    for k in range(2, order + 1):
        comps = [Series(np.concatenate([[p[i]], [w[i] for w in ws]]), order=k) for i in range(vf.dim)]
        alpha = comps[3] if vf.dim == 4 else None
        f = rhs_terms(group, comps[0], comps[1], comps[2], alpha)
        forcing = np.array([fi.c[k] for fi in f[: vf.dim]])
        ws.append(np.linalg.lstsq(J - k * lam * np.eye(vf.dim), -forcing, rcond=None)[0])
    return ws


def unstable_seed(group: GroupSpec, eq: Equilibrium, report: LinearizationReport | None = None,
                  epsilon: float = 1e-6, weights=None, manifold_order: int = 3) -> State:
    """A point at parameter ``epsilon`` on the unstable curve through ``eq``.

    With ``manifold_order = 1`` this is ``point + epsilon v``; higher orders add
    the curvature corrections of the unstable curve, which keeps backward runs
    from being pushed off it by the strongly contracting directions. The sign
    of ``v`` is chosen so the state stays admissible.
    """
    if not epsilon > 0:
        raise InvalidOptions("epsilon must be positive")
    if manifold_order < 1:
        raise InvalidOptions("manifold_order must be at least 1")
    if report is None:
        report = linearize(group, eq)
    v = unstable_direction(group, eq, report, weights)
    lam = max(report.unstable_eigenvalues)
    return State.from_array(eq.as_array() + seed_offset(group, eq, v, lam, epsilon, manifold_order))


def seed_offset(group: GroupSpec, eq: Equilibrium, v: np.ndarray, lam: float, epsilon: float,
                manifold_order: int = 3) -> np.ndarray:
    """Offset of the seed from the equilibrium as a 4-vector, kept separate so
    that callers can integrate deviations without the rounding of ``p + z``."""
    vf = VectorField(group)
    p = eq.as_array()
    for sign in (1.0, -1.0):
        ws = manifold_terms(group, eq, sign * v, lam, manifold_order)
        z = np.zeros(4)
        z[: vf.dim] = sum(epsilon ** (k + 1) * w for k, w in enumerate(ws))
        y = p + z
        if uses_reduced(group):
            z[3] = group.exp_neg_A * y[0] * y[1] - p[3]
            y[3] = p[3] + z[3]
        if np.all(y[:3] > 0) and y[3] >= 0:
            return z
    raise SeedLeavesPositiveOrthant(f"neither sign of the unstable direction keeps {eq.family.value} admissible")


def equilibrium_for_group(group: GroupSpec, y4: np.ndarray) -> bool:
    return bool(np.all(rhs_vec(group, y4) == 0.0))


def nearest_equilibrium(group: GroupSpec, y) -> tuple:
    """Closest member of any equilibrium family to ``y`` (a 4-vector), found by
    projecting onto each family. Returns ``(family, parameters, distance)``."""
    a, b, c, al = (float(v) for v in np.asarray(y, dtype=float)[:4])
    best = (None, (), math.inf)

    def consider(fam, params, dist):
        nonlocal best
        if dist < best[2]:
            best = (fam, params, dist)

    if group.tag == Group.SU2:
        # alpha is slaved to a, b here, so distances use (a, b, c) only
        q = 0.5 * (a + b)
        consider(Family.SU2_qq0, (q,), math.sqrt((a - q) ** 2 + (b - q) ** 2 + c * c))
        q = 0.5 * (b + c)
        consider(Family.SU2_0qq, (q,), math.sqrt(a * a + (b - q) ** 2 + (c - q) ** 2))
        q = 0.5 * (a + c)
        consider(Family.SU2_q0q, (q,), math.sqrt((a - q) ** 2 + b * b + (c - q) ** 2))
        consider(Family.SU2_origin, (0.0,), math.sqrt(a * a + b * b + c * c))
    elif group.tag == Group.E2:
        q = 0.5 * (a + c)
        consider(Family.E2_q0q0, (q,), math.sqrt((a - q) ** 2 + b * b + (c - q) ** 2 + al * al))
        consider(Family.E2_0p0r, (b, al), math.sqrt(a * a + c * c))
    elif group.tag == Group.HEISENBERG:
        # every state with c = 0 is stationary
        consider(Family.HEIS_bolt, (al,), abs(c))
    return best
