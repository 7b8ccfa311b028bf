"""Adaptive integration of the Kähler systems with endpoint detection, chart
changes between the t, tau, r and q coordinates, and Hermite resampling."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import GroupSpec, State, VectorField, check_interior, jacobian, rhs_vec, slave_alpha
from .equilibria import nearest_equilibrium
from .errors import InvalidOptions, NonmonotoneChart, OutOfRange


class Chart(str, enum.Enum):
    T = "t"
    Tau = "tau"
    R = "r"
    Q = "q"


class Direction(str, enum.Enum):
    Forward = "forward"
    Backward = "backward"


class EndKind(str, enum.Enum):
    Infinite = "Infinite"
    FiniteBlowup = "FiniteBlowup"
    EquilibriumCapture = "EquilibriumCapture"
    UserLimit = "UserLimit"


@dataclass(frozen=True)
class Endpoint:
    """Where a trajectory stops. ``value`` is in the t chart: the extrapolated
    blowup time for ``FiniteBlowup``, the last sample time otherwise."""

    value: float
    kind: EndKind
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": self.value, "kind": self.kind.value, "detail": dict(sorted(self.detail.items()))}


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_step: float = math.inf
    blowup_threshold: float = 1e8
    capture_radius: float = 1e-9  # multiplied by 1 + |equilibrium point|
    max_samples: int = 200_000
    max_duration: float = 1e9
    first_step: float | None = None

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "blowup_threshold", "capture_radius", "max_duration"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and not math.isnan(v)):
                raise InvalidOptions(f"{name} must be positive, got {v!r}")
        if not (isinstance(self.max_samples, int) and self.max_samples >= 2):
            raise InvalidOptions("max_samples must be an integer >= 2")
        if self.first_step is not None and not self.first_step > 0:
            raise InvalidOptions("first_step must be positive")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of a solution in one chart.

    ``states`` is ``(n, 4)`` with alpha filled in even for reduced SU(2);
    ``derivs`` holds derivatives with respect to the chart coordinate; ``t``
    keeps the original time of every sample so charts can be changed freely.
    """

    chart: Chart
    coords: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    t: np.ndarray
    left_end: Endpoint
    right_end: Endpoint
    group: GroupSpec | None = None

    def __len__(self) -> int:
        return len(self.coords)

    def state(self, i: int) -> State:
        return State.from_array(self.states[i], self.coords[i])

    def samples(self):
        for i in range(len(self)):
            yield self.coords[i], self.state(i)

    def speed_t(self) -> np.ndarray:
        """``dcoord/dt`` at every sample."""
        return chart_speed(self.chart, self.states)

    @classmethod
    def constant(cls, state: State, t0: float, t1: float, n: int = 2, group: GroupSpec | None = None) -> "Trajectory":
        t = np.linspace(t0, t1, n)
        y = np.tile(state.as_array(), (n, 1))
        return cls(Chart.T, t, y, np.zeros_like(y), t.copy(),
                   Endpoint(t0, EndKind.UserLimit), Endpoint(t1, EndKind.UserLimit), group)


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


def _dopri_step(f, y, k1, h):
    k = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], k) if a != 0.0)
        k.append(f(yi))
    y_new = y + h * sum(b * kj for b, kj in zip(_B, k) if b != 0.0)
    err = h * sum(e * kj for e, kj in zip(_E, k) if e != 0.0)
    return y_new, k[-1], err


def _initial_step(f, y, f0, rtol, atol):
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(y + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def _blowup_extrapolation(ts, norms, dnorms):
    """Fit ``u = N / N'`` linearly in ``t`` over the last three steps.

    For ``N ~ C |eta - t|^{-beta}`` one has ``u = (eta - t) / beta``, so the root of
    the line is the blowup time and minus its inverse slope is ``beta``.
    """
    u = np.asarray(norms) / np.asarray(dnorms)
    slope, icpt = np.polyfit(np.asarray(ts), u, 1)
    if slope >= 0:
        return ts[-1], math.nan
    return -icpt / slope, -1.0 / slope


def deviation_field(group: GroupSpec, base: np.ndarray, full: bool = False):
    """``z -> f(base + z) - f(base)`` evaluated by expanding in powers of ``z``.

    Near an equilibrium this keeps the rounding error proportional to ``|z|``
    rather than to ``|base|``.
    """
    from .core import rhs_terms
    from .powerseries import Series

    dim = len(base)
    f0 = np.array(rhs_terms(group, *base[:3], base[3] if dim == 4 else None, full=full)[:dim])

    def field(z):
        comps = [Series([base[i], z[i], 0.0, 0.0]) for i in range(dim)]
        out = rhs_terms(group, comps[0], comps[1], comps[2], comps[3] if dim == 4 else None, full=full)
        return np.array([o.c[1] + o.c[2] + o.c[3] for o in out[:dim]]) + f0

    return field


def integrate(group: GroupSpec, s0: State, direction=Direction.Forward, opts: IntegratorOptions | None = None,
              full: bool = False, t_stop: float | None = None, anchor=None,
              offset: np.ndarray | None = None) -> Trajectory:
    """Integrate from ``s0`` in one time direction with a Dormand-Prince 5(4)
    pair under PI step control.

    The run stops at blowup (state norm above the threshold, or step
    underflow), at capture by an equilibrium, or at a user limit
    (``t_stop``, ``max_duration``, ``max_samples``). The returned trajectory is
    in the t chart with increasing coordinates; the unexplored side carries a
    ``UserLimit`` endpoint at the start time.

    ``anchor`` (an equilibrium) switches to integrating the deviation from it,
    which is how runs that approach an equilibrium should be made; ``offset``
    then gives the exact starting deviation (``s0`` still supplies the time).
    """
    opts = opts or IntegratorOptions()
    direction = Direction(direction)
    group.require_flat()
    check_interior(s0)
    vf = VectorField(group, full)
    sign = 1.0 if direction == Direction.Forward else -1.0

    t0 = float(s0.t)
    y = vf.project(slave_alpha(group, s0.as_array(), full))
    if anchor is not None:
        base = vf.project(anchor.as_array())
        dev = deviation_field(group, base, full)
        y = y - base if offset is None else vf.project(np.asarray(offset, dtype=float))

        def f(z):
            return sign * dev(z)

        def lift(z):
            return vf.lift(base + z)
    else:
        base = np.zeros(vf.dim)

        def f(z):
            return sign * vf(z)

        lift = vf.lift
    fy = f(y)
    ts, ys, fs = [0.0], [y.copy()], [fy.copy()]
    yb = base + y
    norms, dnorms = [float(np.linalg.norm(yb))], [float(yb @ fy / np.linalg.norm(yb))]
    detail: dict = {}

    if not np.any(fy != 0.0):
        span = min(1.0, opts.max_duration) if t_stop is None else abs(t_stop - t0)
        traj = Trajectory.constant(State.from_array(lift(y), t0), t0, t0 + sign * span, group=group)
        if sign < 0:
            traj = Trajectory.constant(State.from_array(lift(y)), t0 - span, t0, group=group)
        return traj

    limit = opts.max_duration if t_stop is None else min(opts.max_duration, sign * (t_stop - t0))
    if limit <= 0:
        raise InvalidOptions("t_stop lies on the wrong side of the start time")
    rtol, atol = opts.rel_tol, opts.abs_tol
    h = opts.first_step or _initial_step(f, y, fy, rtol, atol)
    h = min(h, opts.max_step, limit)
    s = 0.0
    err_prev = 1e-4
    kind = EndKind.UserLimit
    while True:
        if len(ts) >= opts.max_samples:
            detail["reason"] = "max_samples"
            break
        if s >= limit * (1 - 1e-15):
            if t_stop is None:
                # the solution outlived the whole allowed duration
                kind = EndKind.Infinite
                detail["reason"] = "max_duration"
            else:
                detail["reason"] = "t_stop"
            break
        h = min(h, limit - s, opts.max_step)
        if h < 1e-14 * max(1.0, abs(s)):
            grown = norms[-1] > 1e3 * norms[0] and dnorms[-1] > 0
            if grown:
                kind = EndKind.FiniteBlowup
                detail["reason"] = "step_underflow"
            else:
                detail["reason"] = "step_underflow_without_blowup"
                detail["step_underflow_without_blowup"] = True
            break
        y_new, f_new, err_vec = _dopri_step(f, y, fy, h)
        if not np.all(np.isfinite(y_new)) or np.any(base[:3] + y_new[:3] <= 0):
            h *= 0.25
            continue
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue
        s += h
        y, fy = y_new, f_new
        yb = base + y
        n = float(np.linalg.norm(yb))
        ts.append(s)
        ys.append(y.copy())
        fs.append(fy.copy())
        norms.append(n)
        dnorms.append(float(yb @ fy / n))
        if n > opts.blowup_threshold:
            kind = EndKind.FiniteBlowup
            detail["reason"] = "norm_threshold"
            break
        fam, params, dist = nearest_equilibrium(group, lift(y))
        if fam is not None:
            pnorm = math.sqrt(sum(p * p for p in params))
            if dist < opts.capture_radius * (1.0 + pnorm):
                kind = EndKind.EquilibriumCapture
                detail.update(family=fam.value, parameters=list(params), distance=dist)
                break
        err = max(err, 1e-10)
        fac = 0.9 * err ** (-0.7 / 5) * err_prev ** (0.4 / 5)
        h *= min(5.0, max(0.2, fac))
        err_prev = err

    ts = np.array(ts)
    ys4 = lift(np.array(ys))
    fs4 = sign * rhs_vec(group, ys4, full)
    end_value = t0 + sign * ts[-1]
    if kind == EndKind.FiniteBlowup and len(ts) >= 3:
        eta_s, beta = _blowup_extrapolation(ts[-3:], norms[-3:], dnorms[-3:])
        detail["last_sample"] = float(end_value)
        detail["exponent"] = float(beta)
        end_value = t0 + sign * eta_s
    stop = Endpoint(float(end_value), kind, detail)
    start = Endpoint(t0, EndKind.UserLimit)
    tt = t0 + sign * ts
    derivs = sign * fs4  # back to d/dt
    if sign < 0:
        tt, ys4, derivs = tt[::-1], ys4[::-1], derivs[::-1]
        return Trajectory(Chart.T, tt.copy(), ys4.copy(), derivs.copy(), tt.copy(), stop, start, group)
    return Trajectory(Chart.T, tt, ys4, derivs, tt.copy(), start, stop, group)


def integrate_both(group: GroupSpec, s0: State, opts: IntegratorOptions | None = None, full: bool = False,
                   t_left: float | None = None, t_right: float | None = None) -> Trajectory:
    """Backward and forward runs from ``s0`` joined into one t-chart trajectory."""
    back = integrate(group, s0, Direction.Backward, opts, full, t_left)
    fwd = integrate(group, s0, Direction.Forward, opts, full, t_right)
    return join(back, fwd)


def join(back: Trajectory, fwd: Trajectory) -> Trajectory:
    """Glue a backward run and a forward run that share their first sample."""
    return Trajectory(
        Chart.T,
        np.concatenate([back.coords, fwd.coords[1:]]),
        np.concatenate([back.states, fwd.states[1:]]),
        np.concatenate([back.derivs, fwd.derivs[1:]]),
        np.concatenate([back.t, fwd.t[1:]]),
        back.left_end,
        fwd.right_end,
        fwd.group,
    )


def launch(group: GroupSpec, eq, epsilon: float = 1e-6, weights=None, opts: IntegratorOptions | None = None,
           manifold_order: int = 3, t0: float = 0.0) -> tuple:
    """Seed the unstable curve of ``eq`` and integrate it both ways.

    The backward half integrates the deviation from ``eq`` starting from the
    exact seed offset. Returns ``(seed, trajectory)``.
    """
    from .equilibria import linearize, seed_offset, unstable_direction

    report = linearize(group, eq)
    v = unstable_direction(group, eq, report, weights)
    z = seed_offset(group, eq, v, max(report.unstable_eigenvalues), epsilon, manifold_order)
    y = eq.as_array() + z
    seed = State(y[0], y[1], y[2], y[3], t0)
    back = integrate(group, seed, Direction.Backward, opts, anchor=eq, offset=z)
    fwd = integrate(group, seed, Direction.Forward, opts)
    return seed, join(back, fwd)


# exponents (i, j, k) of the monomial a^i b^j c^k and its constant factor
_SPEED = {
    Chart.T: (0, 0, 0, 1.0),
    Chart.Tau: (1, 1, 1, math.sqrt(2.0)),
    Chart.R: (1, 1, 1, 1.0),
    Chart.Q: (2, 0, 0, 1.0),
}


def chart_speed(chart: Chart, states: np.ndarray) -> np.ndarray:
    i, j, k, const = _SPEED[Chart(chart)]
    return const * states[:, 0] ** i * states[:, 1] ** j * states[:, 2] ** k


def chart_speed_rate(chart: Chart, states: np.ndarray, dstates_dt: np.ndarray) -> np.ndarray:
    """``d log(speed)/dt``."""
    i, j, k, _ = _SPEED[Chart(chart)]
    return (i * dstates_dt[:, 0] / states[:, 0] + j * dstates_dt[:, 1] / states[:, 1]
            + k * dstates_dt[:, 2] / states[:, 2])


def cumulative_coordinate(t: np.ndarray, f: np.ndarray, df: np.ndarray, ddf: np.ndarray | None = None) -> np.ndarray:
    """Cumulative integral of ``f`` over ``t``.

    With first derivatives this is the Hermite-corrected trapezoid rule
    ``h (f0 + f1)/2 + h^2 (f0' - f1')/12`` (fourth order); second derivatives
    add ``h^3 (f0'' + f1'')/120`` and lift the rule to sixth order.
    """
    h = np.diff(t)
    if ddf is None:
        pieces = 0.5 * h * (f[:-1] + f[1:]) + h * h * (df[:-1] - df[1:]) / 12.0
    else:
        pieces = (0.5 * h * (f[:-1] + f[1:]) + h * h * (df[:-1] - df[1:]) / 10.0
                  + h**3 * (ddf[:-1] + ddf[1:]) / 120.0)
    return np.concatenate([[0.0], np.cumsum(pieces)])


def second_derivatives(group: GroupSpec, states: np.ndarray, dstates_dt: np.ndarray) -> np.ndarray:
    """``d^2 y/dt^2 = J(y) y'`` row by row, using the full four-variable system."""
    return np.einsum("nij,nj->ni", np.array([jacobian(group, y, full=True) for y in states]), dstates_dt)


def chart_speed_second(chart: Chart, states: np.ndarray, d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """``d^2 speed/dt^2`` for the monomial speed of ``chart``."""
    i, j, k, _ = _SPEED[Chart(chart)]
    powers = np.array([i, j, k], dtype=float)
    x, dx, ddx = states[:, :3], d1[:, :3], d2[:, :3]
    rate = (powers * dx / x).sum(axis=1)
    drate = (powers * (ddx / x - (dx / x) ** 2)).sum(axis=1)
    return chart_speed(chart, states) * (rate * rate + drate)


def change_chart(traj: Trajectory, target, group: GroupSpec | None = None) -> Trajectory:
    """Re-express ``traj`` in another chart.

    The new coordinate is the cumulative integral of its t-speed, anchored at
    the left end. When that end is an equilibrium capture and the speed decays
    there, the anchor includes the exponential tail so that the coordinate
    reads 0 at the singular orbit.
    """
    target = Chart(target)
    if target == traj.chart:
        return traj
    t = traj.t
    dstates_dt = traj.derivs * chart_speed(traj.chart, traj.states)[:, None]
    speed = chart_speed(target, traj.states)
    if np.any(speed <= 0) or not np.all(np.isfinite(speed)):
        raise NonmonotoneChart(f"the {target.value} speed must stay positive")
    if target == Chart.T:
        coords = t.copy()
    else:
        dspeed = speed * chart_speed_rate(target, traj.states, dstates_dt)
        ddspeed = None
        if group is not None or traj.group is not None:
            dd = second_derivatives(group or traj.group, traj.states, dstates_dt)
            ddspeed = chart_speed_second(target, traj.states, dstates_dt, dd)
        coords = cumulative_coordinate(t, speed, dspeed, ddspeed)
        if traj.left_end.kind == EndKind.EquilibriumCapture and _speed_vanishes_at_limit(target, traj):
            rate = dspeed[0] / speed[0]
            if rate > 0:
                coords = coords + speed[0] / rate
    if np.any(np.diff(coords) <= 0):
        raise NonmonotoneChart("new coordinate is not strictly increasing")
    derivs = dstates_dt / speed[:, None]
    return Trajectory(target, coords, traj.states, derivs, t, traj.left_end, traj.right_end, group or traj.group)


def _speed_vanishes_at_limit(target: Chart, traj: Trajectory) -> bool:
    """Whether the new coordinate converges at the captured left end, which
    happens exactly when its t-speed is zero at the limiting equilibrium."""
    from .equilibria import make_equilibrium

    detail = traj.left_end.detail
    group = traj.group
    if group is None or "family" not in detail:
        return False
    eq = make_equilibrium(group, detail["family"], *detail.get("parameters", ()))
    return bool(chart_speed(target, eq.as_array()[None, :])[0] == 0.0)


def _hermite(x0, x1, y0, y1, d0, d1, x):
    h = x1 - x0
    s = (x - x0) / h
    s2, s3 = s * s, s * s * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1


def hermite_eval(coords, values, derivs, mesh) -> np.ndarray:
    """Cubic Hermite interpolation of ``values`` (``(n, m)``) at ``mesh``."""
    mesh = np.atleast_1d(np.asarray(mesh, dtype=float))
    idx = np.clip(np.searchsorted(coords, mesh, side="right") - 1, 0, len(coords) - 2)
    x0, x1 = coords[idx][:, None], coords[idx + 1][:, None]
    out = _hermite(x0, x1, values[idx], values[idx + 1], derivs[idx], derivs[idx + 1], mesh[:, None])
    exact = np.searchsorted(coords, mesh)
    hit = (exact < len(coords)) & (coords[np.minimum(exact, len(coords) - 1)] == mesh)
    out[hit] = values[exact[hit]]
    return out


def resample(traj: Trajectory, mesh) -> Trajectory:
    """Samples of ``traj`` on ``mesh`` by cubic Hermite interpolation using the
    stored derivatives."""
    mesh = np.atleast_1d(np.asarray(mesh, dtype=float))
    lo, hi = traj.coords[0], traj.coords[-1]
    if mesh.size == 0 or mesh.min() < lo or mesh.max() > hi:
        raise OutOfRange(f"mesh must lie in [{lo}, {hi}]")
    if np.any(np.diff(mesh) <= 0):
        raise OutOfRange("mesh must be strictly increasing")
    if len(traj) == 1:
        return traj
    speed = chart_speed(traj.chart, traj.states)
    vals = np.column_stack([traj.states, traj.t])
    ders = np.column_stack([traj.derivs, 1.0 / speed])
    out = hermite_eval(traj.coords, vals, ders, mesh)
    states = out[:, :4]
    if traj.group is not None:
        # the full form gives the same a, b, c derivatives as the reduced SU(2) one
        d_t = rhs_vec(traj.group, states, full=True)
        derivs = d_t / chart_speed(traj.chart, states)[:, None]
    else:
        derivs = hermite_derivative(traj.coords, traj.states, traj.derivs, mesh)
    return replace(traj, coords=mesh, states=states, derivs=derivs, t=out[:, 4])


def hermite_derivative(coords, values, derivs, mesh) -> np.ndarray:
    mesh = np.atleast_1d(np.asarray(mesh, dtype=float))
    idx = np.clip(np.searchsorted(coords, mesh, side="right") - 1, 0, len(coords) - 2)
    x0, x1 = coords[idx][:, None], coords[idx + 1][:, None]
    h = x1 - x0
    s = (mesh[:, None] - x0) / h
    y0, y1, d0, d1 = values[idx], values[idx + 1], derivs[idx], derivs[idx + 1]
    return ((6 * s * s - 6 * s) * (y0 - y1) / h + (3 * s * s - 4 * s + 1) * d0 + (3 * s * s - 2 * s) * d1)


def first_integral_drift(traj: Trajectory) -> dict:
    """Maximum relative deviation of each first integral from its first sample."""
    from .core import first_integral_series

    out = {}
    for name, vals in first_integral_series(traj.group, traj.states).items():
        out[name] = float(np.max(np.abs(vals / vals[0] - 1.0)))
    return out

