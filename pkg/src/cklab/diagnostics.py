"""Completeness diagnostics: distance integrals at both ends, blowup exponent
fits, invariant-region audits and the per-trajectory classification."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Group, GroupSpec, State
from .equilibria import Equilibrium, Family, make_equilibrium, nearest_equilibrium
from .errors import (
    DegenerateParameter,
    InsufficientSamples,
    NotCase3,
    OutOfRange,
    SeedLeavesPositiveOrthant,
    UnresolvedEndpoint,
    UnsupportedGroup,
)
from .io import dumps, to_plain
from .flow import (
    Chart,
    Direction,
    EndKind,
    IntegratorOptions,
    Trajectory,
    change_chart,
    chart_speed,
    cumulative_coordinate,
    first_integral_drift,
    hermite_eval,
    integrate,
    join,
    launch,
)

FIT_R2_MIN = 0.99
FINITE_RATIO = 0.9
MIN_WINDOWS = 4


class End(str, enum.Enum):
    Left = "left"
    Right = "right"


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares slope of ``log y`` against ``log x`` over ``window``."""

    exponent: float
    window: tuple
    r2: float
    reference: float | None = None
    samples: int = 0

    @property
    def accepted(self) -> bool:
        return self.r2 >= FIT_R2_MIN

    def matches(self, rel: float = 0.05) -> bool | None:
        if self.reference is None:
            return None
        tol = rel * abs(self.reference) if self.reference != 0 else rel
        return abs(self.exponent - self.reference) <= tol

    def to_dict(self) -> dict:
        return {"exponent": self.exponent, "window": list(self.window), "r2": self.r2,
                "reference": self.reference, "samples": self.samples, "accepted": self.accepted,
                "matches_reference": self.matches()}


def fit_power(x, y, reference: float | None = None) -> ExponentFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]
    if x.size < 3:
        raise InsufficientSamples(f"need at least 3 positive samples, got {x.size}")
    lx, ly = np.log(x), np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else (1.0 if abs(slope) < 1e-12 else 0.0)
    return ExponentFit(float(slope), (float(x.min()), float(x.max())), r2, reference, int(x.size))


@dataclass(frozen=True)
class DistanceResult:
    """``verdict`` is ``Finite``, ``Divergent`` or ``Inconclusive``.

    ``windows`` lists the window integrals ordered towards the endpoint and
    ``ratios`` the quotients of consecutive ones.
    """

    verdict: str
    value: float
    scheme: str
    windows: tuple = ()
    ratios: tuple = ()
    fit: ExponentFit | None = None
    tail: float = 0.0

    @property
    def finite(self) -> bool:
        return self.verdict == "Finite"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "value": self.value, "scheme": self.scheme,
                "windows": list(self.windows), "ratios": list(self.ratios), "tail": self.tail,
                "fit": self.fit.to_dict() if self.fit else None}


def _in_t_chart(traj: Trajectory) -> Trajectory:
    return traj if traj.chart == Chart.T else change_chart(traj, Chart.T)


def _integrand(traj: Trajectory):
    """``abc`` and its t-derivative on the samples."""
    y = traj.states
    f = y[:, 0] * y[:, 1] * y[:, 2]
    dy = traj.derivs * chart_speed(traj.chart, y)[:, None]
    df = f * (dy[:, 0] / y[:, 0] + dy[:, 1] / y[:, 1] + dy[:, 2] / y[:, 2])
    return f, df


class _Primitive:
    """Cumulative integral of ``abc dt`` with Hermite evaluation between nodes."""

    def __init__(self, traj: Trajectory):
        self.t = traj.t
        self.f, self.df = _integrand(traj)
        self.F = cumulative_coordinate(self.t, self.f, self.df)

    def __call__(self, t) -> np.ndarray:
        t = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), self.t[0], self.t[-1])
        return hermite_eval(self.t, self.F[:, None], self.f[:, None], t)[:, 0]

    def between(self, t0, t1) -> np.ndarray:
        return np.abs(self(t1) - self(t0))


def _ratios(windows) -> tuple:
    w = np.asarray(windows, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return tuple(float(v) for v in w[1:] / w[:-1])


def _decide(windows, ratios) -> str:
    if len(ratios) < MIN_WINDOWS:
        return "Inconclusive"
    last = ratios[-MIN_WINDOWS:]
    if all(r < FINITE_RATIO for r in last):
        return "Finite"
    if all(r >= 1.0 - 1e-3 for r in last):
        return "Divergent"
    return "Inconclusive"


def _geometric_tail(windows, ratios) -> float:
    r = float(np.mean(ratios[-MIN_WINDOWS:]))
    return windows[-1] * r / (1.0 - r)


def distance_integral(traj: Trajectory, end, reference: float | None = None,
                      t_ref: float | None = None) -> DistanceResult:
    """Distance ``|int abc dt|`` from the orbit at ``t_ref`` to one end.

    ``t_ref`` defaults to ``t = 0`` (where launched runs are seeded) when it
    lies on the trajectory, and to the far end of the sampled span otherwise.
    Finite blowup ends use dyadic windows in the distance to the extrapolated
    endpoint; captured ends use windows of equal length plus the exponential
    tail; ends reached only by exhausting the allowed duration use dyadic
    windows in elapsed time. The verdict rests on the last four window ratios.
    ``reference`` is the expected power of the integrand, if known.
    """
    end = End(end)
    traj = _in_t_chart(traj)
    ep = traj.left_end if end == End.Left else traj.right_end
    if ep.kind == EndKind.UserLimit and ep.detail.get("reason") in ("max_samples", "step_underflow_without_blowup"):
        raise UnresolvedEndpoint(f"the {end.value} end stopped early ({ep.detail['reason']})")
    t = traj.t
    if t_ref is None:
        t_ref = 0.0 if t[0] <= 0.0 <= t[-1] else (t[-1] if end == End.Left else t[0])
    elif not t[0] <= t_ref <= t[-1]:
        raise OutOfRange(f"t_ref={t_ref} outside [{t[0]}, {t[-1]}]")
    if len(t) < 2:
        return DistanceResult("Finite", 0.0, "sampled_span")
    prim = _Primitive(traj)
    if ep.kind == EndKind.UserLimit:
        stop = t[0] if end == End.Left else t[-1]
        return DistanceResult("Finite", float(prim.between(t_ref, stop)[0]), "sampled_span")
    if ep.kind == EndKind.FiniteBlowup:
        return _blowup_distance(traj, prim, end, ep.value, reference, t_ref)
    if ep.kind == EndKind.EquilibriumCapture:
        return _capture_distance(traj, prim, end, t_ref)
    return _infinite_distance(traj, prim, end, reference, t_ref)


def _blowup_distance(traj, prim, end, t_end, reference, t_ref) -> DistanceResult:
    t = traj.t
    last = t[-1] if end == End.Right else t[0]
    floor = max(1e-12 * max(1.0, abs(t_end)), 4.0 * abs(t_end - last))
    sgn = 1.0 if end == End.Right else -1.0
    edges = []
    d = abs(t_end - t_ref)
    while d > floor:
        edges.append(d)
        d *= 0.5
    if len(edges) < MIN_WINDOWS + 2:
        raise InsufficientSamples("too few dyadic windows before the blowup time")
    tt = t_end - sgn * np.array(edges)
    windows = [float(v) for v in prim.between(tt[:-1], tt[1:])]
    ratios = _ratios(windows)
    verdict = _decide(windows, ratios)
    delta = np.abs(t_end - t)
    sel = (delta >= floor) & (delta <= floor * 2.0**8)
    fit = None
    if np.count_nonzero(sel) >= 3:
        fit = fit_power(delta[sel], prim.f[sel], reference)
    if verdict == "Finite":
        tail = _geometric_tail(windows, ratios)
        value = float(prim.between(t_ref, tt[-1])[0]) + tail
        return DistanceResult("Finite", value, "dyadic_to_blowup", tuple(windows), ratios, fit, tail)
    return DistanceResult(verdict, math.inf if verdict == "Divergent" else math.nan, "dyadic_to_blowup",
                          tuple(windows), ratios, fit)


def _capture_distance(traj, prim, end, t_ref) -> DistanceResult:
    t = traj.t
    i_end = 0 if end == End.Left else len(t) - 1
    f0 = prim.f[i_end]
    # decay rate of the integrand per unit of |t| towards the end
    rho = prim.df[i_end] / f0 if end == End.Left else -prim.df[i_end] / f0
    sampled = float(prim.between(t_ref, t[i_end])[0])
    if not rho > 0:
        if f0 > 0:
            return DistanceResult("Divergent", math.inf, "equal_windows_capture")
        return DistanceResult("Finite", sampled, "equal_windows_capture")
    span = abs(t[i_end] - t_ref)
    width = min(math.log(2.0) / rho, span / (MIN_WINDOWS + 2))
    n = int(min(24, span // width))
    sgn = 1.0 if end == End.Left else -1.0
    edges = t[i_end] + sgn * width * np.arange(n, -1, -1)
    windows = [float(v) for v in prim.between(edges[:-1], edges[1:])]
    ratios = _ratios(windows)
    verdict = _decide(windows, ratios)
    tail = f0 / rho
    value = sampled + tail
    if verdict != "Finite":
        value = math.inf if verdict == "Divergent" else math.nan
    return DistanceResult(verdict, value, "equal_windows_capture", tuple(windows), ratios, None, tail)


def _infinite_distance(traj, prim, end, reference, t_ref) -> DistanceResult:
    t = traj.t
    u = (t - t_ref) if end == End.Right else (t_ref - t)
    u_max = float(u.max())
    edges = []
    d = u_max
    while d > max(1.0, 1e-9 * u_max) and len(edges) < 60:
        edges.append(d)
        d *= 0.5
    edges = edges[::-1]  # increasing: windows march outwards
    if len(edges) < MIN_WINDOWS + 2:
        raise InsufficientSamples("sampled span too short for dyadic windows")
    sgn = 1.0 if end == End.Right else -1.0
    tt = t_ref + sgn * np.array(edges)
    windows = [float(v) for v in prim.between(tt[:-1], tt[1:])]
    ratios = _ratios(windows)
    verdict = _decide(windows, ratios)
    sel = u >= edges[-5]
    fit = fit_power(u[sel], prim.f[sel], reference) if np.count_nonzero(sel) >= 3 else None
    if verdict == "Finite":
        tail = _geometric_tail(windows, ratios)
        value = float(prim.between(t_ref, tt[-1])[0]) + tail
        return DistanceResult("Finite", value, "dyadic_in_time", tuple(windows), ratios, fit, tail)
    return DistanceResult(verdict, math.inf if verdict == "Divergent" else math.nan, "dyadic_in_time",
                          tuple(windows), ratios, fit)


@dataclass(frozen=True)
class WChartResult:
    """The E(2) far end seen through ``W = c^2/(ab)``, ``V = a/b``,
    ``r = 2 sqrt(ab)``."""

    constant: float
    p: float
    r2: float
    fit_window: tuple
    L: float
    k: float
    k_spread: float
    k_rel_error: float
    windows: tuple
    ratios: tuple
    slope: float
    verdict: str
    V_decreasing: bool

    @property
    def fit_accepted(self) -> bool:
        return self.r2 >= FIT_R2_MIN

    def to_dict(self) -> dict:
        return {"constant": self.constant, "p": self.p, "r2": self.r2, "fit_window": list(self.fit_window),
                "L": self.L, "k": self.k, "k_spread": self.k_spread, "k_rel_error": self.k_rel_error, "windows": list(self.windows),
                "ratios": list(self.ratios), "slope": self.slope, "verdict": self.verdict,
                "V_decreasing": self.V_decreasing, "fit_accepted": self.fit_accepted}


def w_form_fit(r, W) -> tuple:
    """Least squares of ``W`` on ``{1, r^-4}``; returns ``(constant, p, r2)``."""
    r = np.asarray(r, dtype=float)
    W = np.asarray(W, dtype=float)
    X = np.column_stack([np.ones_like(r), r**-4])
    coef, *_ = np.linalg.lstsq(X, W, rcond=None)
    resid = W - X @ coef
    ss = float(np.sum((W - W.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return float(coef[0]), float(coef[1]), r2


def w_integral_growth(r, W, dW_dr=None) -> tuple:
    """Dyadic windows of ``int W^{-1/2} dr`` walking out to the largest ``r``.

    Returns ``(windows, ratios, verdict, slope)``; linear growth shows up as
    ratios near 2.
    """
    r = np.asarray(r, dtype=float)
    g = np.asarray(W, dtype=float) ** -0.5
    if dW_dr is None:
        G = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(r) * (g[:-1] + g[1:]))])
        dg = np.gradient(g, r)
    else:
        dg = -0.5 * g**3 * np.asarray(dW_dr, dtype=float)
        G = cumulative_coordinate(r, g, dg)
    edges = []
    d = float(r[-1])
    while d > r[0] and len(edges) < 40:
        edges.append(d)
        d *= 0.5
    edges = np.array(edges[::-1])
    if edges.size < MIN_WINDOWS + 2:
        raise InsufficientSamples("r range spans too few doublings")
    Ge = hermite_eval(r, G[:, None], g[:, None], edges)[:, 0]
    windows = tuple(float(v) for v in np.diff(Ge))
    ratios = _ratios(windows)
    verdict = _decide(windows, ratios)
    slope = float(windows[-1] / (edges[-1] - edges[-2]))
    return windows, ratios, verdict, slope


def e2_distance_via_W(traj: Trajectory, fit_fraction: float = 0.01) -> WChartResult:
    """Far-end distance of an E(2) Case-3 trajectory in the ``r = 2 sqrt(ab)``
    chart.

    ``W`` is fitted to ``constant + p r^-4`` over ``r >= fit_fraction r_max``;
    the constant is compared with ``L/2 + k`` where ``L`` is the last value of
    ``a/b`` and ``k = alpha/(ab)``. Raises ``NotCase3`` outside the invariant
    region.
    """
    traj = _in_t_chart(traj)
    audit = invariant_region_audit(GroupSpec.e2(), traj)
    if audit.region != "Case3":
        raise NotCase3(f"trajectory leaves 0 <= c^2 - a^2 <= 2 alpha ({audit.region})")
    y = traj.states
    a, b, c, al = y[:, 0], y[:, 1], y[:, 2], y[:, 3]
    dy = traj.derivs
    ab = a * b
    r = 2.0 * np.sqrt(ab)
    W = c * c / ab
    V = a / b
    keep = np.concatenate([[True], np.diff(r) > 0])
    r, W, V, ab, al = r[keep], W[keep], V[keep], ab[keep], al[keep]
    dy, a, b, c = dy[keep], a[keep], b[keep], c[keep]
    dab = dy[:, 0] * b + a * dy[:, 1]
    dr_dt = dab / np.sqrt(ab)
    dW_dt = (2 * c * dy[:, 2] * ab - c * c * dab) / (ab * ab)
    dW_dr = dW_dt / dr_dt
    sel = r >= fit_fraction * r[-1]
    if np.count_nonzero(sel) < 5:
        raise InsufficientSamples("too few samples in the large-r window")
    const, p, r2 = w_form_fit(r[sel], W[sel])
    ratio = al / ab
    k = float(np.median(ratio))
    k_spread = float(np.max(np.abs(ratio / k - 1.0)))
    L = float(V[-1])
    predicted = 0.5 * L + k
    windows, ratios, verdict, slope = w_integral_growth(r, W, dW_dr)
    return WChartResult(const, p, r2, (float(r[sel][0]), float(r[-1])), L, k, k_spread,
                        abs(const - predicted) / abs(predicted), windows, ratios, slope, verdict,
                        bool(np.all(np.diff(V) <= 1e-12 * V[:-1])))


def asymptotic_blowup_fit(traj: Trajectory, end, references: dict | None = None,
                          min_samples: int = 5) -> dict:
    """Power-law exponents of ``a, b, c, alpha`` against the distance to an
    extrapolated blowup time, over the last decade of trustworthy samples."""
    end = End(end)
    traj = _in_t_chart(traj)
    ep = traj.left_end if end == End.Left else traj.right_end
    if ep.kind != EndKind.FiniteBlowup:
        raise UnresolvedEndpoint(f"the {end.value} end is {ep.kind.value}, not a finite blowup")
    references = references or {}
    t = traj.t
    last = t[-1] if end == End.Right else t[0]
    delta = np.abs(ep.value - t)
    lo = max(1e-9 * max(1.0, abs(ep.value)), 100.0 * abs(ep.value - last))
    sel = (delta >= lo) & (delta <= 10.0 * lo)
    if np.count_nonzero(sel) < min_samples:
        raise InsufficientSamples(f"{np.count_nonzero(sel)} samples in the last decade before the blowup")
    out = {}
    for j, name in enumerate(("a", "b", "c", "alpha")):
        vals = traj.states[sel, j]
        if np.all(vals > 0):
            out[name] = fit_power(delta[sel], vals, references.get(name))
    return out


@dataclass(frozen=True)
class AuditReport:
    samples: int
    monotone_violations: dict
    region: str
    region_violations: int
    sign_law_violations: int

    @property
    def clean(self) -> bool:
        return not any(self.monotone_violations.values()) and self.sign_law_violations == 0

    def to_dict(self) -> dict:
        return {"samples": self.samples, "monotone_violations": dict(sorted(self.monotone_violations.items())),
                "region": self.region, "region_violations": self.region_violations,
                "sign_law_violations": self.sign_law_violations, "clean": self.clean}


def _decreases(x, slack) -> int:
    return int(np.count_nonzero(np.diff(x) < -slack * np.abs(x[:-1])))


def invariant_region_audit(group: GroupSpec, traj: Trajectory, slack: float = 1e-10) -> AuditReport:
    """Count samples breaking the monotonicity of ``ab, ac, bc`` (and ``b``
    where it is forced) and, for E(2), the band ``0 <= c^2 - a^2 <= 2 alpha``.

    ``region`` is ``Case3`` when the band holds throughout; otherwise it names
    the side that fails first (``Case1`` below, ``Case2`` above).
    """
    y = traj.states
    a, b, c, al = y[:, 0], y[:, 1], y[:, 2], y[:, 3]
    mono = {"ab": _decreases(a * b, slack), "ac": _decreases(a * c, slack), "bc": _decreases(b * c, slack)}
    if group.tag == Group.E2 or (group.tag == Group.SU2 and np.all(a >= b * (1 - slack))):
        mono["b"] = _decreases(b, slack)
    region, region_bad, sign_bad = "NotApplicable", 0, 0
    if group.tag == Group.E2:
        gap = c * c - a * a
        scale = slack * (1.0 + a * a + c * c + 2 * np.abs(al))
        below = gap < -scale
        above = gap - 2 * al > scale
        bad = below | above
        region_bad = int(np.count_nonzero(bad))
        if region_bad == 0:
            region = "Case3"
        else:
            i = int(np.argmax(bad))
            region = "Case1" if below[i] else "Case2"
    if group.tag == Group.SU2:
        # where -a^2 + b^2 + c^2 < 0 its derivative must be positive
        dy = traj.derivs * chart_speed(traj.chart, y)[:, None]
        quantity = -a * a + b * b + c * c
        rate = 2 * (-a * dy[:, 0] + b * dy[:, 1] + c * dy[:, 2])
        neg = quantity < -slack * (a * a + b * b + c * c)
        sign_bad = int(np.count_nonzero(neg & (rate <= 0)))
    return AuditReport(len(traj), mono, region, region_bad, sign_bad)


# classification ----------------------------------------------------------------

LEFT_BOLT = "FiniteDistance+Bolt"
LEFT_NUT_FAIL = "FiniteDistance+NutFail"
LEFT_INCOMPLETE = "Incomplete"
RIGHT_INFINITE = "InfiniteDistance"
RIGHT_FINITE = "FiniteDistance"


class Overall(str, enum.Enum):
    CompleteWithBolt = "CompleteWithBolt"
    Incomplete = "Incomplete"
    Excluded = "Excluded"
    Unknown = "Unknown"


@dataclass(frozen=True)
class SeedSpec:
    """Where a classified trajectory starts.

    Either an equilibrium family (with ``q``, or ``params`` for two-parameter
    families) seeded on its unstable curve, or an explicit ``state``
    ``(a, b, c, alpha)`` at ``t = 0``. For the Heisenberg group ``c1`` selects
    the explicit complete solution.
    """

    family: str | None = None
    q: float = 1.0
    params: tuple | None = None
    epsilon: float = 1e-6
    weights: tuple | None = None
    state: tuple | None = None
    c1: float = 1.0
    manifold_order: int = 3

    def to_dict(self) -> dict:
        out = {"family": self.family, "epsilon": self.epsilon,
               "weights": list(self.weights) if self.weights is not None else None}
        if self.state is not None:
            out["state"] = [float(v) for v in self.state]
        elif self.family == Family.HEIS_bolt.value:
            out["c1"] = self.c1
        else:
            out["q"] = self.q
            if self.params is not None:
                out["params"] = [float(v) for v in self.params]
        return out


@dataclass
class ClassificationReport:
    group: str
    exp_neg_A: float | None
    seed: dict
    left_verdict: str | None
    right_verdict: str | None
    overall: Overall
    reasons: list = field(default_factory=list)
    left_distance: DistanceResult | None = None
    right_distance: DistanceResult | None = None
    exponents: dict = field(default_factory=dict)
    smoothness: dict | None = None
    escape_audit: dict = field(default_factory=dict)
    endpoints: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    ricci_flat: bool = False

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "exp_neg_A": self.exp_neg_A,
            "seed": self.seed,
            "left_verdict": self.left_verdict,
            "right_verdict": self.right_verdict,
            "overall": self.overall.value,
            "reasons": list(self.reasons),
            "left_distance": self.left_distance.to_dict() if self.left_distance else None,
            "right_distance": self.right_distance.to_dict() if self.right_distance else None,
            "exponents": {k: v.to_dict() for k, v in sorted(self.exponents.items())},
            "smoothness": self.smoothness,
            "escape_audit": self.escape_audit,
            "endpoints": self.endpoints,
            "extras": self.extras,
            "ricci_flat": self.ricci_flat,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_text(self) -> str:
        def dist(d):
            if d is None:
                return "-"
            v = "inf" if math.isinf(d.value) else f"{d.value:.6g}"
            return f"{d.verdict} ({v})"

        rows = [
            ("group", self.group + (f" e^-A={self.exp_neg_A:g}" if self.exp_neg_A is not None else "")),
            ("seed", ", ".join(f"{k}={v}" for k, v in sorted(self.seed.items()) if v is not None)),
            ("left end", self.left_verdict or "-"),
            ("left distance", dist(self.left_distance)),
            ("right end", self.right_verdict or "-"),
            ("right distance", dist(self.right_distance)),
            ("smoothness", "-" if self.smoothness is None else ("pass" if self.smoothness.get("pass") else "fail")),
            ("overall", self.overall.value),
            ("reasons", "; ".join(self.reasons) or "-"),
        ]
        w = self.extras.get("w_chart")
        if w:
            rows.insert(6, ("W chart", f"{w['verdict']}, W -> {w['constant']:.6g} (fit r2 {w['r2']:.3g})"))
        if self.ricci_flat:
            rows.append(("note", "alpha vanishes identically: Ricci-flat branch"))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows) + "\n"


def _endpoint_dict(traj: Trajectory) -> dict:
    return {"left": to_plain(traj.left_end.to_dict()), "right": to_plain(traj.right_end.to_dict())}


# expected power of the integrand abc at the far blowup end
_RIGHT_REFERENCE = {Group.SU2: -1.5, Group.E2: -1.5, Group.HEISENBERG: -1.5}
_NUT_REFERENCE = -1.5


def _limit_equilibrium(group: GroupSpec, traj: Trajectory) -> Equilibrium | None:
    ep = traj.left_end
    if ep.kind == EndKind.EquilibriumCapture:
        return make_equilibrium(group, ep.detail["family"], *ep.detail["parameters"])
    fam, params, _ = nearest_equilibrium(group, traj.states[0])
    if fam is None:
        return None
    if fam == Family.SU2_origin:
        return make_equilibrium(group, fam)
    return make_equilibrium(group, fam, *params)


def _smooth(group, eq, order):
    from .series import smoothness

    sol, rep = smoothness(group, eq, order)
    return sol, rep


def _excluded(group, seed, reason, exp_neg_A) -> ClassificationReport:
    return ClassificationReport(group.tag.value, exp_neg_A, seed.to_dict(), None, None, Overall.Excluded, [reason])


def classify(group: GroupSpec, seed: SeedSpec, opts: IntegratorOptions | None = None,
             order: int = 8) -> ClassificationReport:
    """Integrate from ``seed`` both ways, measure the distance to each end,
    test smooth extension at a captured orbit and combine the verdicts.

    The overall verdict is ``CompleteWithBolt`` only when the left end is a
    smooth bolt at finite distance and the right end is infinitely far.
    """
    group.require_flat()
    opts = opts or IntegratorOptions()
    exp_neg_A = group.exp_neg_A if group.tag == Group.SU2 else None
    if group.tag == Group.HEISENBERG:
        return _classify_heisenberg(group, seed, opts, order)
    if group.tag not in (Group.SU2, Group.E2):
        raise UnsupportedGroup(f"no classification for {group.tag.value}")

    reasons: list = []
    extras: dict = {}
    unstable_curve = seed.state is None
    limit_eq = None
    t_ref = 0.0
    fam = Family(seed.family) if seed.family else None
    if unstable_curve:
        if fam is None:
            raise DegenerateParameter("a seed needs a family or an explicit state")
        if fam == Family.E2_0p0r:
            return _excluded(group, seed, "ExcludedOpenCase: solutions near (0,p,0,r) are left open", exp_neg_A)
        if group.tag == Group.E2 and seed.q == 0:
            return _excluded(group, seed, "ExcludedOpenCase: the q=0 equilibrium is left open", exp_neg_A)
        if fam == Family.SU2_origin or (group.tag == Group.SU2 and seed.q == 0):
            # all eigenvalues vanish there; the left half comes from the explicit
            # nut solution, the right half is integrated from t = -1
            from .closed_form import su2_nut_trajectory

            g = group.gamma
            state = State(1 / math.sqrt(g), 1 / math.sqrt(g), 1.0, group.exp_neg_A / g, -1.0)
            traj = join(su2_nut_trajectory(g), integrate(group, state, Direction.Forward, opts))
            limit_eq = make_equilibrium(group, Family.SU2_origin)
            t_ref = -1.0
            extras["nut_solution"] = "a = b = (-gamma t)^(-1/2), c = (-t)^(-1/2) for t <= -1"
        else:
            params = seed.params if seed.params is not None else (seed.q,)
            eq = make_equilibrium(group, fam, *params)
            try:
                _, traj = launch(group, eq, seed.epsilon, seed.weights, opts, seed.manifold_order)
            except SeedLeavesPositiveOrthant as exc:
                return _excluded(group, seed, f"NoAdmissibleSeed: {exc}", exp_neg_A)
    else:
        s = State(*[float(v) for v in seed.state], t=0.0)
        traj = join(integrate(group, s, Direction.Backward, opts), integrate(group, s, Direction.Forward, opts))

    report = ClassificationReport(group.tag.value, exp_neg_A, seed.to_dict(), None, None, Overall.Incomplete,
                                  reasons, endpoints=_endpoint_dict(traj), extras=extras,
                                  ricci_flat=(group.tag == Group.SU2 and group.exp_neg_A == 0.0))
    audit = invariant_region_audit(group, traj)
    extras["audit"] = audit.to_dict()

    # left end
    left = distance_integral(traj, End.Left, _NUT_REFERENCE if traj.left_end.kind == EndKind.Infinite else None,
                             t_ref=t_ref)
    report.left_distance = left
    if traj.left_end.kind == EndKind.FiniteBlowup:
        report.left_verdict = LEFT_INCOMPLETE if left.finite else "InfiniteDistance"
        reasons.append("FiniteXi: the solution blows up at finite t on the left")
        try:
            report.exponents.update({f"left_{k}": v for k, v in asymptotic_blowup_fit(traj, End.Left).items()})
        except InsufficientSamples as exc:
            extras["left_fit_error"] = str(exc)
    elif left.finite:
        eq = limit_eq or _limit_equilibrium(group, traj)
        report.left_verdict, smooth_reasons, report.smoothness = _left_smoothness(group, eq, order)
        reasons.extend(smooth_reasons)
    else:
        report.left_verdict = "InfiniteDistance"

    # right end
    ref = _RIGHT_REFERENCE.get(group.tag) if traj.right_end.kind == EndKind.FiniteBlowup else None
    right = distance_integral(traj, End.Right, ref, t_ref=t_ref)
    report.right_distance = right
    if right.fit is not None:
        report.exponents["right_integrand"] = right.fit
    report.right_verdict = RIGHT_INFINITE if right.verdict == "Divergent" else RIGHT_FINITE
    if right.verdict == "Inconclusive":
        reasons.append("RightEndInconclusive")
    if group.tag == Group.E2 and audit.region == "Case3" and traj.right_end.kind != EndKind.UserLimit:
        try:
            extras["w_chart"] = e2_distance_via_W(traj).to_dict()
        except (NotCase3, InsufficientSamples) as exc:
            extras["w_chart_error"] = str(exc)
    report.escape_audit = {"method": "endpoint distances", "pass": right.verdict == "Divergent"}

    complete = (report.left_verdict == LEFT_BOLT and report.right_verdict == RIGHT_INFINITE
                and report.escape_audit["pass"])
    if complete:
        if group.tag == Group.E2 and not unstable_curve:
            report.overall = Overall.Unknown
            reasons.append("E2 completeness is only established along unstable curves")
        else:
            report.overall = Overall.CompleteWithBolt
    else:
        report.overall = Overall.Incomplete
        if report.right_verdict == RIGHT_FINITE:
            reasons.append("RightEndAtFiniteDistance")
    return report


def _left_smoothness(group, eq, order) -> tuple:
    if eq is None:
        return LEFT_INCOMPLETE, ["NoLimitOrbit"], None
    mirrored = eq.family == Family.SU2_0qq
    if mirrored:
        # swapping a and b maps (0,q,q) onto (q,0,q) and preserves the system
        eq = make_equilibrium(group, Family.SU2_q0q, eq.q)
    try:
        sol, rep = _smooth(group, eq, order)
    except Exception as exc:  # a recursion obstruction is a finding, not a crash
        return LEFT_INCOMPLETE, [f"SmoothExtensionFails: {exc}"], None
    d = rep.to_dict()
    d["family"] = eq.family.value
    if mirrored:
        d["mirrored_from"] = Family.SU2_0qq.value
    d["parity"] = {k: v.value for k, v in sorted(sol.parity.items())}
    if eq.family == Family.SU2_origin:
        if rep.passed:
            return LEFT_BOLT, [], d
        failed = [c.name for c in rep.metric_conditions + rep.kahler_conditions if not c.passed and not c.informational]
        slopes = f"a'(0) = {sol.coeffs['a'][1]:.12g}, c'(0) = {sol.coeffs['c'][1]:.12g}"
        return LEFT_NUT_FAIL, [f"NutFail: cannot have both slopes 1 ({slopes}); failed {', '.join(failed)}"], d
    if rep.passed:
        return LEFT_BOLT, [], d
    failed = [c.name for c in rep.metric_conditions + rep.kahler_conditions if not c.passed and not c.informational]
    why = []
    if rep.integrality is False:
        why.append(f"integrality ({rep.weights.phrasings[0]})" if rep.weights.phrasings else "integrality")
    if failed:
        why.append("failed " + ", ".join(failed))
    return LEFT_INCOMPLETE, ["SmoothExtensionFails: " + "; ".join(why)], d


def _classify_heisenberg(group: GroupSpec, seed: SeedSpec, opts, order) -> ClassificationReport:
    from .closed_form import HeisenbergSolution, heis_length_bounds, heis_q_length, heis_states, heis_verify

    sol = HeisenbergSolution(seed.c1)
    seed = SeedSpec(family=Family.HEIS_bolt.value, c1=seed.c1, epsilon=seed.epsilon)
    reasons: list = []
    ver = heis_verify(sol)
    states, _ = heis_states(sol, np.array([0.0]))
    s = State(*states[0], t=0.0)
    traj = join(integrate(group, s, Direction.Backward, opts), integrate(group, s, Direction.Forward, opts))
    report = ClassificationReport(group.tag.value, None, seed.to_dict(), None, None, Overall.Incomplete, reasons,
                                  endpoints=_endpoint_dict(traj))
    report.extras["closed_form_residuals"] = ver.to_dict()
    report.extras["closed_form_bolt_distance"] = heis_q_length(sol, -math.inf, 0.0)
    report.extras["drift"] = first_integral_drift(traj)
    left = distance_integral(traj, End.Left)
    report.left_distance = left
    if left.finite:
        eq = _limit_equilibrium(group, traj)
        report.left_verdict, why, report.smoothness = _left_smoothness(group, eq, order)
        reasons.extend(why)
    else:
        report.left_verdict = "InfiniteDistance"
    ref = _RIGHT_REFERENCE[Group.HEISENBERG] if traj.right_end.kind == EndKind.FiniteBlowup else None
    right = distance_integral(traj, End.Right, ref)
    report.right_distance = right
    if right.fit is not None:
        report.exponents["right_integrand"] = right.fit
    report.right_verdict = RIGHT_INFINITE if right.verdict == "Divergent" else RIGHT_FINITE
    escape = heis_length_bounds(sol, np.array([[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, math.inf]]))
    report.escape_audit = {"method": "length bounds", **to_plain(escape.to_dict()),
                           "pass": escape.verdict == "EscapeNeedsInfiniteLength"}
    if ver.worst > 1e-10:
        reasons.append(f"ClosedFormResidual {ver.worst:.3g}")
    complete = (report.left_verdict == LEFT_BOLT and report.right_verdict == RIGHT_INFINITE
                and report.escape_audit["pass"] and ver.worst <= 1e-10)
    report.overall = Overall.CompleteWithBolt if complete else Overall.Incomplete
    return report
