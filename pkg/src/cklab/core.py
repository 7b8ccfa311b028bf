"""Group data, state types and the right-hand sides of the diagonal Bianchi-A
Kähler systems.

Storage convention: every state vector carries four entries ``(a, b, c, alpha)``.
For SU(2) the reduced three-dimensional system is the default; ``alpha`` is then
slaved to ``exp_neg_A * a * b`` and is recomputed rather than integrated.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DivisionByZeroAlpha,
    NonpositiveFactor,
    NonpositiveState,
    UnsupportedGroup,
    UnsupportedLambda,
)


class Group(str, enum.Enum):
    HEISENBERG = "heisenberg"
    SU2 = "su2"
    E2 = "e2"
    CUSTOM = "custom"


_STRUCTURE = {
    Group.HEISENBERG: (0.0, 0.0, 1.0),
    Group.SU2: (1.0, 1.0, 1.0),
    Group.E2: (1.0, 0.0, 1.0),
}


@dataclass(frozen=True)
class GroupSpec:
    """Structure constants ``(p1, p2, p3)`` of a unimodular Lie algebra plus the
    two scalar parameters of the Kähler systems.

    ``exp_neg_A`` is the constant ratio ``alpha / (a b)`` used by the reduced
    SU(2) system; ``lam`` is the target central curvature.
    """

    p1: float
    p2: float
    p3: float
    tag: Group = Group.CUSTOM
    exp_neg_A: float = 1.0
    lam: float = 0.0

    def __post_init__(self):
        if self.tag != Group.CUSTOM and (self.p1, self.p2, self.p3) != _STRUCTURE[self.tag]:
            raise ValueError(f"structure constants {(self.p1, self.p2, self.p3)} do not match tag {self.tag.value}")
        if not (math.isfinite(self.exp_neg_A) and self.exp_neg_A >= 0):
            raise ValueError("exp_neg_A must be finite and nonnegative")
        if not math.isfinite(self.lam):
            raise ValueError("lam must be finite")

    @classmethod
    def su2(cls, exp_neg_A: float = 1.0, lam: float = 0.0) -> "GroupSpec":
        return cls(1.0, 1.0, 1.0, Group.SU2, exp_neg_A, lam)

    @classmethod
    def e2(cls, lam: float = 0.0) -> "GroupSpec":
        return cls(1.0, 0.0, 1.0, Group.E2, 1.0, lam)

    @classmethod
    def heisenberg(cls, lam: float = 0.0) -> "GroupSpec":
        return cls(0.0, 0.0, 1.0, Group.HEISENBERG, 1.0, lam)

    @classmethod
    def custom(cls, p1, p2, p3, exp_neg_A=1.0, lam=0.0) -> "GroupSpec":
        return cls(float(p1), float(p2), float(p3), Group.CUSTOM, exp_neg_A, lam)

    @classmethod
    def from_tag(cls, tag, exp_neg_A: float = 1.0) -> "GroupSpec":
        tag = Group(tag)
        if tag == Group.SU2:
            return cls.su2(exp_neg_A)
        if tag == Group.E2:
            return cls.e2()
        if tag == Group.HEISENBERG:
            return cls.heisenberg()
        raise UnsupportedGroup("custom groups need explicit structure constants")

    @property
    def p(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3])

    @property
    def gamma(self) -> float:
        """``1 + e^{-A}``, the bolt growth constant of the SU(2) system."""
        return 1.0 + self.exp_neg_A

    def require_studied(self):
        if self.tag == Group.CUSTOM:
            raise UnsupportedGroup("classification only covers the Heisenberg, SU(2) and E(2) groups")

    def require_flat(self):
        if self.lam != 0.0:
            raise UnsupportedLambda("integration and classification require lam == 0")


@dataclass(frozen=True)
class State:
    a: float
    b: float
    c: float
    alpha: float = 0.0
    t: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.alpha], dtype=float)

    @classmethod
    def from_array(cls, y, t: float = 0.0) -> "State":
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]) if len(y) > 3 else 0.0, float(t))


@dataclass(frozen=True)
class Derivative:
    da: float
    db: float
    dc: float
    dalpha: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.da, self.db, self.dc, self.dalpha], dtype=float)

    @classmethod
    def from_array(cls, d) -> "Derivative":
        return cls(*(float(v) for v in d[:4]))


@dataclass(frozen=True)
class WState:
    w1: float
    w2: float
    w3: float


def check_interior(s: State):
    if not (s.a > 0 and s.b > 0 and s.c > 0):
        raise NonpositiveState(f"metric coefficients must be positive, got a={s.a}, b={s.b}, c={s.c}")


def uses_reduced(group: GroupSpec, full: bool = False) -> bool:
    return group.tag == Group.SU2 and not full


def slave_alpha(group: GroupSpec, y: np.ndarray, full: bool = False) -> np.ndarray:
    """Return a copy of ``y`` (shape ``(4,)`` or ``(n, 4)``) with alpha set to
    ``exp_neg_A * a * b`` when the reduced SU(2) system is in use."""
    y = np.array(y, dtype=float, copy=True)
    if uses_reduced(group, full):
        y[..., 3] = group.exp_neg_A * y[..., 0] * y[..., 1]
    return y


def rhs_vec(group: GroupSpec, y: np.ndarray, full: bool = False) -> np.ndarray:
    """Vectorised right-hand side on ``(..., 4)`` arrays; no positivity checks."""
    y = np.asarray(y, dtype=float)
    a, b, c = y[..., 0], y[..., 1], y[..., 2]
    p1, p2, p3 = group.p1, group.p2, group.p3
    a2, b2, c2 = a * a, b * b, c * c
    out = np.empty(np.broadcast(a).shape + (4,))
    out[..., 0] = 0.5 * a * (-p1 * a2 + p2 * b2 + p3 * c2)
    out[..., 1] = 0.5 * b * (p1 * a2 - p2 * b2 + p3 * c2)
    if uses_reduced(group, full):
        e = group.exp_neg_A
        out[..., 2] = 0.5 * c * (a2 + b2 + 2.0 * e * a * b - c2)
        # alpha = e*ab and (ab)' = ab c^2
        out[..., 3] = e * a * b * c2
        return out
    alpha = y[..., 3]
    out[..., 2] = 0.5 * c * (p1 * a2 + p2 * b2 - p3 * c2 + 2.0 * alpha)
    out[..., 3] = p3 * c2 * alpha
    if group.lam != 0.0:
        out[..., 3] = out[..., 3] + group.lam * c2 * (a * b) ** 4 / (p3 * alpha)
    return out


def rhs_terms(group: GroupSpec, a, b, c, alpha=None, full: bool = False) -> tuple:
    """The ``lam = 0`` right-hand side written with ring operations only, so it
    accepts floats as well as truncated power series."""
    p1, p2, p3 = group.p1, group.p2, group.p3
    a2, b2, c2 = a * a, b * b, c * c
    da = 0.5 * a * (-p1 * a2 + p2 * b2 + p3 * c2)
    db = 0.5 * b * (p1 * a2 - p2 * b2 + p3 * c2)
    if uses_reduced(group, full):
        e = group.exp_neg_A
        dc = 0.5 * c * (a2 + b2 + 2.0 * e * a * b - c2)
        return da, db, dc, e * a * b * c2
    dc = 0.5 * c * (p1 * a2 + p2 * b2 - p3 * c2 + 2.0 * alpha)
    return da, db, dc, p3 * c2 * alpha


def rhs(group: GroupSpec, s: State, full: bool = False) -> Derivative:
    """Derivatives of ``(a, b, c, alpha)`` with respect to ``t``.

    For SU(2) (unless ``full``) alpha is eliminated through ``alpha = e^{-A} ab``
    and the returned ``dalpha`` is the induced derivative of that expression.
    A nonzero ``lam`` is accepted only for custom groups with ``p3 != 0`` and a
    positive alpha.
    """
    check_interior(s)
    if group.lam != 0.0:
        if group.tag != Group.CUSTOM or group.p3 == 0.0 or not s.alpha > 0:
            raise UnsupportedLambda("lam != 0 needs a custom group with p3 != 0 and alpha > 0")
    return Derivative.from_array(rhs_vec(group, s.as_array(), full))


def jacobian(group: GroupSpec, y, full: bool = False) -> np.ndarray:
    """Hand-differentiated Jacobian of the ``lam = 0`` system.

    Returns a 3x3 matrix in ``(a, b, c)`` for reduced SU(2), else 4x4 in
    ``(a, b, c, alpha)``.
    """
    a, b, c, alpha = (float(v) for v in np.asarray(y, dtype=float)[:4])
    p1, p2, p3 = group.p1, group.p2, group.p3
    a2, b2, c2 = a * a, b * b, c * c
    ja = [0.5 * (-p1 * a2 + p2 * b2 + p3 * c2) - p1 * a2, p2 * a * b, p3 * a * c]
    jb = [p1 * a * b, 0.5 * (p1 * a2 - p2 * b2 + p3 * c2) - p2 * b2, p3 * b * c]
    if uses_reduced(group, full):
        e = group.exp_neg_A
        jc = [c * (a + e * b), c * (b + e * a), 0.5 * (a2 + b2 + 2 * e * a * b - c2) - c2]
        return np.array([ja, jb, jc])
    jc = [p1 * a * c, p2 * b * c, 0.5 * (p1 * a2 + p2 * b2 - p3 * c2 + 2 * alpha) - p3 * c2, c]
    jal = [0.0, 0.0, 2 * p3 * c * alpha, p3 * c2]
    return np.array([ja + [0.0], jb + [0.0], jc, jal])


@dataclass
class VectorField:
    """The integrable form of a system: three components for reduced SU(2),
    four otherwise."""

    group: GroupSpec
    full: bool = False
    dim: int = field(init=False)

    def __post_init__(self):
        self.dim = 3 if uses_reduced(self.group, self.full) else 4

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return rhs_vec(self.group, self.lift(y), self.full)[..., : self.dim]

    def lift(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.dim == 4:
            return y
        out = np.empty(y.shape[:-1] + (4,))
        out[..., :3] = y
        out[..., 3] = self.group.exp_neg_A * y[..., 0] * y[..., 1]
        return out

    def project(self, y4) -> np.ndarray:
        return np.asarray(y4, dtype=float)[..., : self.dim]


def to_w(s: State) -> WState:
    return WState(s.b * s.c, s.a * s.c, s.a * s.b)


def w_residuals(group: GroupSpec, s: State, d: Derivative) -> tuple:
    """Residuals of ``w1' = p1 w2 w3 + alpha w1``, ``w2' = p2 w1 w3 + alpha w2``,
    ``w3' = p3 w1 w2`` with ``w = (bc, ac, ab)``.

    The shared alpha is read from ``s.alpha``; for reduced SU(2) pass a state
    whose alpha equals ``exp_neg_A * a * b``.
    """
    check_interior(s)
    a, b, c, al = s.a, s.b, s.c, s.alpha
    da, db, dc = d.da, d.db, d.dc
    w1, w2, w3 = b * c, a * c, a * b
    r1 = (db * c + b * dc) - (group.p1 * w2 * w3 + al * w1)
    r2 = (da * c + a * dc) - (group.p2 * w1 * w3 + al * w2)
    r3 = (da * b + a * db) - group.p3 * w1 * w2
    return (r1, r2, r3)


def scale_symmetry(s: State, k: float, group: GroupSpec | None = None) -> State:
    """E(2) scaling ``(a, b, c, alpha)(t) -> (k a, b, k c, k^2 alpha)(k^2 t)``.

    The returned sample sits at time ``t / k^2`` of the scaled solution.
    """
    if group is not None and group.tag != Group.E2:
        raise UnsupportedGroup("the scaling symmetry belongs to the E(2) system")
    if not k > 0:
        raise NonpositiveFactor(f"scale factor must be positive, got {k}")
    return State(k * s.a, s.b, k * s.c, k * k * s.alpha, s.t / (k * k))


def scale_array(y: np.ndarray, k: float) -> np.ndarray:
    y = np.array(y, dtype=float, copy=True)
    y[..., 0] *= k
    y[..., 2] *= k
    y[..., 3] *= k * k
    return y


def first_integrals(group: GroupSpec, s: State) -> list:
    """Constants of motion of the ``lam = 0`` system at ``s``."""
    check_interior(s)
    if s.alpha == 0:
        raise DivisionByZeroAlpha("first integrals divide by alpha")
    if group.tag == Group.HEISENBERG:
        return [("a/b", s.a / s.b), ("alpha/phi", s.alpha / (s.a * s.a))]
    return [("ab/alpha", s.a * s.b / s.alpha)]


def first_integral_series(group: GroupSpec, states: np.ndarray) -> dict:
    """Vectorised :func:`first_integrals` over an ``(n, 4)`` array."""
    a, b, al = states[:, 0], states[:, 1], states[:, 3]
    if group.tag == Group.HEISENBERG:
        return {"a/b": a / b, "alpha/phi": al / (a * a)}
    return {"ab/alpha": a * b / al}
