"""Power series in the geodesic coordinate r about singular orbits, parity
classification, and the smooth-extension tests for the metric and Kähler form."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Group, GroupSpec, rhs_vec, slave_alpha, uses_reduced
from .equilibria import Equilibrium, Family
from .errors import InsufficientOrder, InvalidOptions, RecursionObstruction, UnsupportedGroup
from .powerseries import Series

PARITY_TOL = 1e-12
MAX_ORDER = 12


class Parity(str, enum.Enum):
    Even = "Even"
    Odd = "Odd"
    Mixed = "Mixed"


class OrbitKind(str, enum.Enum):
    Bolt = "Bolt"
    Nut = "Nut"


def orbit_kind(eq: Equilibrium) -> OrbitKind:
    return OrbitKind.Nut if eq.family == Family.SU2_origin else OrbitKind.Bolt


@dataclass(frozen=True)
class RSystem:
    """The system in ``r`` with ``dr = abc dt``.

    Each equation is kept in the cleared form ``D_i x_i' = N_i`` where ``D_i`` is
    the product of the other two metric coefficients (``ab`` for alpha).
    """

    group: GroupSpec

    @property
    def names(self) -> tuple:
        return ("a", "b", "c") if uses_reduced(self.group) else ("a", "b", "c", "alpha")

    def rhs(self, y) -> np.ndarray:
        """``d(a, b, c, alpha)/dr`` at a 4-vector (or ``(n, 4)`` array) with ``abc != 0``."""
        y = slave_alpha(self.group, np.asarray(y, dtype=float))
        d = rhs_vec(self.group, y)
        return d / (y[..., 0] * y[..., 1] * y[..., 2])[..., None]

    def cleared(self, xs: list) -> list:
        """``[(D_i, N_i)]`` for series (or float) arguments in ``names`` order."""
        g = self.group
        p1, p2, p3 = g.p1, g.p2, g.p3
        a, b, c = xs[0], xs[1], xs[2]
        a2, b2, c2 = a * a, b * b, c * c
        na = 0.5 * (-p1 * a2 + p2 * b2 + p3 * c2)
        nb = 0.5 * (p1 * a2 - p2 * b2 + p3 * c2)
        if uses_reduced(g):
            nc = 0.5 * (a2 + b2 + 2.0 * g.exp_neg_A * a * b - c2)
            return [(b * c, na), (a * c, nb), (a * b, nc)]
        alpha = xs[3]
        nc = 0.5 * (p1 * a2 + p2 * b2 - p3 * c2 + 2.0 * alpha)
        return [(b * c, na), (a * c, nb), (a * b, nc), (a * b, p3 * c * alpha)]


def r_system(group: GroupSpec) -> RSystem:
    if group.tag not in (Group.SU2, Group.E2, Group.HEISENBERG):
        raise UnsupportedGroup("r-systems are provided for the SU(2), E(2) and Heisenberg groups")
    return RSystem(group)


def su2_biaxial_pair(gamma: float, a: float, c: float) -> tuple:
    """``(da/dr, dc/dr) = (c/(2a), gamma - c^2/(2a^2))`` for ``a = b``."""
    return c / (2.0 * a), gamma - c * c / (2.0 * a * a)


@dataclass
class SeriesSolution:
    order: int
    names: tuple
    coeffs: dict
    parity: dict
    center: tuple
    family: Family
    notes: list = field(default_factory=list)
    residual: float = 0.0

    def series(self, name: str) -> Series:
        return Series(self.coeffs[name])

    def __call__(self, r) -> np.ndarray:
        """Evaluate ``(a, b, c, alpha)`` at ``r``; alpha is slaved for reduced SU(2)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        cols = [np.polynomial.polynomial.polyval(r, self.coeffs[n]) for n in self.names]
        if len(cols) == 3:
            cols.append(np.full_like(r, np.nan))
        return np.column_stack(cols)

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "family": self.family.value,
            "center": list(self.center),
            "coeffs": {k: [float(x) for x in v] for k, v in self.coeffs.items()},
            "parity": {k: v.value for k, v in self.parity.items()},
            "notes": list(self.notes),
            "residual": self.residual,
        }


def parity_of(coeffs, tol: float = PARITY_TOL, start: int = 0) -> Parity:
    """Parity of a coefficient list from index ``start`` on, judged on
    coefficients normalised by the largest one."""
    c = np.abs(np.asarray(coeffs, dtype=float))
    scale = c.max() if c.size else 0.0
    if scale == 0.0:
        return Parity.Even
    n = c / scale
    idx = np.arange(len(c))
    keep = idx >= start
    if np.all(n[keep & (idx % 2 == 1)] <= tol):
        return Parity.Even
    if np.all(n[keep & (idx % 2 == 0)] <= tol):
        return Parity.Odd
    return Parity.Mixed


def _default_pins(group: GroupSpec, eq: Equilibrium) -> dict:
    if eq.family == Family.E2_q0q0:
        # alpha_1 = k q with k = alpha/(ab); the default eigenspace weights give k = 1/q
        return {("alpha", 1): 1.0}
    return {}


def _valuation(d0: Series, tol: float = 1e-14) -> int:
    for k, v in enumerate(d0.c):
        if abs(v) > tol:
            return k
    return len(d0.c)


def series_solve(group: GroupSpec, eq: Equilibrium, order: int = 8, pins: dict | None = None,
                 tol: float = 1e-13) -> SeriesSolution:
    """Match powers of ``r`` in the cleared r-system about ``eq``.

    Each variable is ``x_i = x_i(0) + sum_n x_{i,n} r^n``. At order ``n`` the
    unknowns ``x_{.,n}`` are fixed by the coefficient of ``r^{n-1+s_i}`` in
    equation ``i``, where ``s_i`` is the vanishing order of ``D_i`` at the
    orbit. The order-one problem is nonlinear; each order is solved by Newton
    steps with minimum-norm updates. Rank deficiencies that stay consistent are
    resolved by pins (``{(name, order): value}``) or by the minimum-norm choice
    and noted; inconsistent ones raise :class:`RecursionObstruction`.
    """
    if not 1 <= order <= MAX_ORDER:
        raise InvalidOptions(f"order must lie in [1, {MAX_ORDER}]")
    system = r_system(group)
    names = system.names
    nv = len(names)
    center = eq.as_array()[:nv]
    pins = dict(_default_pins(group, eq) if pins is None else pins)
    for (name, k) in pins:
        if name not in names or not 1 <= k <= order:
            raise InvalidOptions(f"bad pin {(name, k)}")
    M = order + 4
    coef = np.zeros((nv, M + 1))
    coef[:, 0] = center
    # vanishing order of each D_i, probed with a generic unit slope
    probe = [Series([center[i], 1.0], order=M) for i in range(nv)]
    vals = [_valuation(d) for d, _ in system.cleared(probe)]
    notes: list = []

    def residuals(cf):
        xs = [Series(cf[i]) for i in range(nv)]
        return [d * x.derivative() - nterm for (d, nterm), x in zip(system.cleared(xs), xs)]

    for n in range(1, order + 1):
        rows = [n - 1 + vals[i] for i in range(nv)]
        free = [i for i in range(nv) if (names[i], n) not in pins]
        for i in range(nv):
            if (names[i], n) in pins:
                coef[i, n] = pins[(names[i], n)]
        if n == 1:
            for i in free:
                coef[i, 1] = 1.0 if center[i] == 0.0 else 0.0

        def F(u):
            cf = coef.copy()
            cf[free, n] = u
            res = residuals(cf)
            return np.array([res[i].c[rows[i]] for i in range(nv)])

        u = coef[free, n].copy()
        rank = len(free)
        for _ in range(60):
            r0 = F(u)
            J = np.empty((nv, len(free)))
            for j in range(len(free)):
                h = 1e-7 * max(1.0, abs(u[j]))
                up, um = u.copy(), u.copy()
                up[j] += h
                um[j] -= h
                J[:, j] = (F(up) - F(um)) / (2 * h)
            step, _, rank, _ = np.linalg.lstsq(J, -r0, rcond=1e-10)
            u = u + step
            if np.max(np.abs(step)) <= 1e-15 * max(1.0, np.max(np.abs(u))):
                break
        coef[free, n] = u
        final = F(u)
        scale = max(1.0, np.max(np.abs(coef[:, : n + 1])))
        if np.max(np.abs(final)) > 1e-10 * scale ** 3:
            raise RecursionObstruction(n, f"residual {np.max(np.abs(final)):.3e} after matching")
        if rank < len(free):
            notes.append(f"order {n}: {len(free) - rank} free coefficient(s) set by minimum norm")

    coef = coef[:, : order + 1]
    res = residuals(np.pad(coef, ((0, 0), (0, 4))))
    worst = max(float(np.max(np.abs(res[i].c[: order + vals[i]]))) for i in range(nv))
    coeffs = {names[i]: coef[i].copy() for i in range(nv)}
    parity = {k: parity_of(v) for k, v in coeffs.items()}
    return SeriesSolution(order, names, coeffs, parity, tuple(center), eq.family, notes, worst)


@dataclass(frozen=True)
class Weights:
    a1: float | None
    d1: float | None
    formula_a1: float | None = None
    integrality: bool | None = None
    phrasings: tuple = ()


def vz_weights(group: GroupSpec, eq: Equilibrium, series: SeriesSolution | None = None) -> Weights:
    """Slice weights at a singular orbit; for the SU(2) bolt the series value
    ``2 c_1`` is reported next to the formula ``2(1 + e^{-A})``."""
    if eq.family == Family.SU2_qq0:
        formula = 2.0 * (1.0 + group.exp_neg_A)
        a1 = 2.0 * series.coeffs["c"][1] if series is not None else formula
        ok = abs(formula - round(formula)) <= 1e-9
        twice_e = 2.0 * group.exp_neg_A
        phr = (
            f"2(1+e^-A) = {formula:.12g} integer: {ok}",
            f"2e^-A = {twice_e:.12g} integer: {abs(twice_e - round(twice_e)) <= 1e-9}",
        )
        return Weights(a1, 1.0, formula, ok, phr)
    if eq.family in (Family.E2_q0q0, Family.HEIS_bolt):
        return Weights(1.0, 1.0, 1.0, True)
    if eq.family == Family.SU2_q0q:
        return Weights(1.0, 1.0, 1.0, True)
    return Weights(None, None)


@dataclass(frozen=True)
class Condition:
    name: str
    required_form: str
    observed: str
    passed: bool
    informational: bool = False

    def to_dict(self) -> dict:
        return {"name": self.name, "required_form": self.required_form, "observed": self.observed,
                "pass": bool(self.passed), "informational": self.informational}


@dataclass
class SmoothnessReport:
    orbit_kind: OrbitKind
    weights: Weights
    integrality: bool | None
    metric_conditions: list = field(default_factory=list)
    kahler_conditions: list = field(default_factory=list)

    @property
    def metric_pass(self) -> bool:
        return all(c.passed for c in self.metric_conditions if not c.informational)

    @property
    def kahler_pass(self) -> bool:
        return all(c.passed for c in self.kahler_conditions if not c.informational)

    @property
    def passed(self) -> bool:
        return self.metric_pass and self.kahler_pass and self.integrality is not False

    def to_dict(self) -> dict:
        return {
            "orbit_kind": self.orbit_kind.value,
            "weights": {"a1": self.weights.a1, "d1": self.weights.d1, "formula_a1": self.weights.formula_a1,
                        "phrasings": list(self.weights.phrasings)},
            "integrality": self.integrality,
            "metric_conditions": [c.to_dict() for c in self.metric_conditions],
            "kahler_conditions": [c.to_dict() for c in self.kahler_conditions],
            "pass": self.passed,
        }


def _fmt(coeffs, upto: int = 6) -> str:
    return "[" + ", ".join(f"{x:.6g}" for x in list(coeffs)[: upto + 1]) + "]"


def _trunc_product(x, y, order):
    return np.convolve(x, y)[: order + 1]


def _parity_condition(name, required, coeffs, want: Parity, start=0, lead=None) -> Condition:
    """``coeffs`` must have parity ``want`` and, if ``lead`` is given, vanish
    below index ``lead``."""
    c = np.asarray(coeffs, dtype=float)
    ok = parity_of(c, start=start) == want or (want == Parity.Even and not np.any(c))
    if lead is not None:
        scale = max(np.max(np.abs(c)), 1e-300)
        ok = ok and bool(np.all(np.abs(c[:lead]) <= PARITY_TOL * scale))
    return Condition(name, required, _fmt(c), bool(ok))


def _require_order(series: SeriesSolution):
    if series.order < 6:
        raise InsufficientOrder("smoothness checks need series order >= 6")


def vz_metric_check(series: SeriesSolution, group: GroupSpec, eq: Equilibrium) -> SmoothnessReport:
    """Metric smooth-extension conditions at the orbit of ``eq``."""
    _require_order(series)
    k = series.order
    w = vz_weights(group, eq, series)
    cf = series.coeffs
    conds = []
    fam = eq.family
    if fam == Family.SU2_origin:
        sa, sc = cf["a"][1], cf["c"][1]
        conds.append(Condition("unit_slopes", "a'(0) = 1 and c'(0) = 1",
                               f"a'(0) = {sa:.12g}, c'(0) = {sc:.12g}",
                               abs(sa - 1) <= 1e-12 and abs(sc - 1) <= 1e-12))
        conds.append(_parity_condition("a_odd", "a odd", cf["a"], Parity.Odd))
        conds.append(_parity_condition("c_odd", "c odd", cf["c"], Parity.Odd))
    elif fam == Family.SU2_qq0:
        a2 = _trunc_product(cf["a"], cf["a"], k)
        b2 = _trunc_product(cf["b"], cf["b"], k)
        conds.append(_parity_condition("a2_plus_b2_even", "a^2 + b^2 = phi1(r^2)", a2 + b2, Parity.Even))
        diff = a2 - b2
        power = 2 * w.d1 / w.a1
        if not np.any(np.abs(diff) > PARITY_TOL * max(1.0, np.max(np.abs(a2)))):
            conds.append(Condition("a2_minus_b2", f"a^2 - b^2 = r^({power:.6g}) phi2(r^2)", "identically 0", True))
        else:
            m = round(power)
            ok = abs(power - m) < 1e-12 and parity_of(diff[m:]) == Parity.Even and not np.any(diff[:m])
            conds.append(Condition("a2_minus_b2", f"a^2 - b^2 = r^({power:.6g}) phi2(r^2)", _fmt(diff), bool(ok)))
        conds.append(_parity_condition("c_odd", "c odd", cf["c"], Parity.Odd))
    elif fam in (Family.E2_q0q0, Family.SU2_q0q):
        a2 = _trunc_product(cf["a"], cf["a"], k)
        c2 = _trunc_product(cf["c"], cf["c"], k)
        conds.append(_parity_condition("a2_plus_c2_even", "a^2 + c^2 = phi1(r^2)", a2 + c2, Parity.Even))
        conds.append(_parity_condition("a2_minus_c2", "a^2 - c^2 = r^2 phi2(r^2)", a2 - c2, Parity.Even, lead=2))
        b = cf["b"]
        conds.append(Condition("b_unit_slope", "b'(0) = 1", f"{b[1]:.12g}", abs(b[1] - 1.0) <= 1e-12))
        conds.append(_parity_condition("b_odd", "b odd", b, Parity.Odd))
    elif fam == Family.HEIS_bolt:
        c2 = _trunc_product(cf["c"], cf["c"], k)
        a2 = _trunc_product(cf["a"], cf["a"], k)
        conds.append(_parity_condition("sigma3_even", "g(X,X) = abar^2 r^2 + r^4 xi(r^2)", c2, Parity.Even, lead=2))
        conds.append(Condition("sigma3_leading_unit", "abar = 1", f"{c2[2]:.12g}", abs(c2[2] - 1.0) <= 1e-12))
        conds.append(_parity_condition("phi_even", "phi = a^2 even", a2, Parity.Even))
        c1 = eq.parameters[0]
        ref = -1.0 / (4.0 * c1)
        conds.append(Condition("sigma3_r4_coefficient", f"r^4 coefficient = -1/(4 c1) = {ref:.12g}",
                               f"{c2[4]:.12g}", abs(c2[4] - ref) <= 1e-8, informational=True))
    else:
        raise UnsupportedGroup(f"no smoothness conditions for {fam.value}")
    return SmoothnessReport(orbit_kind(eq), w, w.integrality, conds, [])


def vz_kahler_check(series: SeriesSolution, group: GroupSpec, eq: Equilibrium) -> SmoothnessReport:
    """Kähler-form smooth-extension conditions at the orbit of ``eq``."""
    _require_order(series)
    k = series.order
    w = vz_weights(group, eq, series)
    cf = series.coeffs
    fam = eq.family
    conds = []
    if fam in (Family.SU2_qq0, Family.SU2_origin):
        conds.append(_parity_condition("c_over_r_even", "c/r = phi1(r^2)", cf["c"][1:], Parity.Even))
        conds.append(_parity_condition("a2_even", "a^2 = phi2(r^2)", _trunc_product(cf["a"], cf["a"], k), Parity.Even))
    elif fam in (Family.E2_q0q0, Family.SU2_q0q):
        ab = _trunc_product(cf["a"], cf["b"], k)
        cr = np.concatenate([[0.0], cf["c"][:-1]])
        conds.append(_parity_condition("cr_plus_ab", "cr + ab = r phi2(r^2)", cr + ab, Parity.Odd))
        conds.append(_parity_condition("cr_minus_ab", "cr - ab = r^3 phi3(r^2)", cr - ab, Parity.Odd, lead=3))
    elif fam == Family.HEIS_bolt:
        conds.append(_parity_condition("sigma12_even", "coefficient of sigma1^sigma2 even",
                                       _trunc_product(cf["a"], cf["b"], k), Parity.Even))
        conds.append(_parity_condition("c_over_r_even", "c/r even", cf["c"][1:], Parity.Even))
    else:
        raise UnsupportedGroup(f"no smoothness conditions for {fam.value}")
    return SmoothnessReport(orbit_kind(eq), w, w.integrality, [], conds)


def smoothness(group: GroupSpec, eq: Equilibrium, order: int = 8, pins: dict | None = None) -> tuple:
    """Series plus the combined metric and Kähler report."""
    sol = series_solve(group, eq, order, pins)
    m = vz_metric_check(sol, group, eq)
    kh = vz_kahler_check(sol, group, eq)
    m.kahler_conditions = kh.kahler_conditions
    return sol, m


def corrupt(series: SeriesSolution, name: str, index: int, value: float) -> SeriesSolution:
    """Copy of ``series`` with one coefficient overwritten (negative controls)."""
    coeffs = {k: v.copy() for k, v in series.coeffs.items()}
    coeffs[name][index] = value
    return SeriesSolution(series.order, series.names, coeffs, {k: parity_of(v) for k, v in coeffs.items()},
                          series.center, series.family, list(series.notes) + [f"corrupted {name}[{index}]"],
                          math.nan)
