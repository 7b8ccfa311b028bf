"""Command-line front end: ``cklab <equilibria|integrate|classify|verify|batch>``.

Settings come from an optional INI file (``--config``) and from flags; flags
win. Exit codes: 0 success, 1 internal error, 2 invalid configuration,
3 verification failure.
"""
from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Group, GroupSpec, State
from .errors import CklabError, ConfigError
from .io import dumps, write_json, write_trajectory

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2, 3
COMMANDS = ("equilibria", "integrate", "classify", "verify", "batch")


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in str(text).replace(" ", "").split(",") if v)
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _float(text) -> float:
    try:
        return float(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"expected a number, got {text!r}") from exc


def _int(text) -> int:
    try:
        return int(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"expected an integer, got {text!r}") from exc


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


# key -> converter, per config section
RUN_KEYS = {
    "group": str, "family": str, "q": _floats, "p": _float, "r": _float, "exp_neg_a": _float, "c1": _float,
    "epsilon": _float, "weights": _floats, "state": _floats, "chart": str, "order": _int,
    "manifold_order": _int, "inject_error": _bool,
}
INTEGRATOR_KEYS = {
    "rel_tol": _float, "abs_tol": _float, "max_step": _float, "blowup_threshold": _float,
    "capture_radius": _float, "max_samples": _int, "max_duration": _float,
}
OUTPUT_KEYS = {"dir": str, "formats": lambda s: tuple(v.strip() for v in str(s).split(",") if v.strip())}
SECTIONS = {"run": RUN_KEYS, "integrator": INTEGRATOR_KEYS, "output": OUTPUT_KEYS}


@dataclass
class RunConfig:
    command: str
    run: dict = field(default_factory=dict)
    integrator: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    as_json: bool = False

    def get(self, key, default=None):
        return self.run.get(key, default)

    def out_dir(self) -> Path:
        if "dir" in self.output and self.output.get("_from_flag"):
            return Path(self.output["dir"])
        env = os.environ.get("CKLAB_OUT")
        if env:
            return Path(env)
        return Path(self.output.get("dir", "cklab_out"))

    def formats(self) -> tuple:
        fm = self.output.get("formats", ("csv", "json"))
        bad = set(fm) - {"csv", "json"}
        if bad:
            raise ConfigError(f"unknown output formats {sorted(bad)}")
        return fm

    def group(self) -> GroupSpec:
        tag = self.get("group")
        if not tag:
            raise ConfigError("a group is required (--group su2|e2|heisenberg)")
        try:
            Group(str(tag).lower())
        except ValueError as exc:
            raise ConfigError(f"unknown group {tag!r}") from exc
        if str(tag).lower() == "custom":
            raise ConfigError("the custom group is library-only")
        return GroupSpec.from_tag(str(tag).lower(), self.get("exp_neg_a", 1.0))

    def options(self):
        from .flow import IntegratorOptions

        return IntegratorOptions(**self.integrator)


def _parse_section(name: str, items, target: dict, source: str):
    schema = SECTIONS.get(name)
    if schema is None:
        raise ConfigError(f"{source}: unknown section [{name}]")
    for key, raw in items:
        if key not in schema:
            raise ConfigError(f"{source}: unknown key {key!r} in [{name}]")
        target[key] = schema[key](raw)


def read_config_file(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return cp


def config_from_sections(command: str, sections: dict, source: str) -> RunConfig:
    cfg = RunConfig(command)
    for name, items in sections.items():
        _parse_section(name, items, getattr(cfg, name) if name in SECTIONS else {}, source)
    return cfg


FLAG_TO_KEY = {
    "group": ("run", "group"), "family": ("run", "family"), "q": ("run", "q"), "p": ("run", "p"),
    "r": ("run", "r"), "exp_neg_a": ("run", "exp_neg_a"), "c1": ("run", "c1"), "epsilon": ("run", "epsilon"),
    "weights": ("run", "weights"), "state": ("run", "state"), "chart": ("run", "chart"), "order": ("run", "order"),
    "manifold_order": ("run", "manifold_order"), "inject_error": ("run", "inject_error"),
    "rel_tol": ("integrator", "rel_tol"), "abs_tol": ("integrator", "abs_tol"),
    "max_samples": ("integrator", "max_samples"), "max_duration": ("integrator", "max_duration"),
    "out": ("output", "dir"), "formats": ("output", "formats"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [run], [integrator] and [output] sections")
    common.add_argument("--out", help="output directory (overrides CKLAB_OUT)")
    common.add_argument("--formats", help="comma list of csv,json")
    common.add_argument("--json", action="store_true", help="print JSON instead of a text table")
    g = common.add_argument_group("model")
    g.add_argument("--group", help="su2, e2 or heisenberg")
    g.add_argument("--family", help="equilibrium family, e.g. qq0, q0q, origin, q0q0, 0p0r")
    g.add_argument("--q", help="equilibrium parameter q (comma list for equilibria)")
    g.add_argument("--p", help="E(2) (0,p,0,r) parameter p")
    g.add_argument("--r", help="E(2) (0,p,0,r) parameter r")
    g.add_argument("--exp-neg-a", dest="exp_neg_a", help="SU(2) constant e^-A")
    g.add_argument("--c1", help="Heisenberg bolt parameter")
    g.add_argument("--epsilon", help="distance of the seed along the unstable curve")
    g.add_argument("--weights", help="E(2) unstable-eigenspace weights w_b,w_alpha")
    g.add_argument("--state", help="explicit initial state a,b,c,alpha at t=0")
    g.add_argument("--manifold-order", dest="manifold_order", help="order of the unstable-curve seed expansion")
    g.add_argument("--chart", help="output chart: t, tau, r or q")
    g.add_argument("--order", help="series truncation order")
    g.add_argument("--inject-error", dest="inject_error", action="store_const", const="true",
                   help="add corrupted negative controls to verify")
    i = common.add_argument_group("integrator")
    i.add_argument("--rel-tol", dest="rel_tol")
    i.add_argument("--abs-tol", dest="abs_tol")
    i.add_argument("--max-samples", dest="max_samples")
    i.add_argument("--max-duration", dest="max_duration")

    parser = argparse.ArgumentParser(prog="cklab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}")
    sub.required = True
    sub.add_parser("equilibria", parents=[common], help="equilibria and their spectra")
    sub.add_parser("integrate", parents=[common], help="integrate an unstable curve or an explicit state")
    sub.add_parser("classify", parents=[common], help="completeness classification of one trajectory")
    sub.add_parser("verify", parents=[common], help="residual checks of the closed forms, series and cross-checks")
    b = sub.add_parser("batch", parents=[common], help="run every [job:NAME] section of a config file")
    b.add_argument("--workers", type=int, default=1)
    return parser


def config_from_args(args) -> RunConfig:
    sections: dict = {}
    if args.config:
        cp = read_config_file(args.config)
        for name in cp.sections():
            if name.startswith("job:"):
                continue
            sections[name] = list(cp.items(name))
    cfg = config_from_sections(args.command, sections, args.config or "flags")
    for flag, (section, key) in FLAG_TO_KEY.items():
        raw = getattr(args, flag, None)
        if raw is None:
            continue
        target = getattr(cfg, section)
        target[key] = SECTIONS[section][key](raw)
        if flag == "out":
            target["_from_flag"] = True
    cfg.as_json = bool(args.json)
    return cfg


# commands ---------------------------------------------------------------------

SU2_FAMILIES = {"qq0": "SU2_qq0", "0qq": "SU2_0qq", "q0q": "SU2_q0q", "origin": "SU2_origin", "000": "SU2_origin"}
E2_FAMILIES = {"q0q0": "E2_q0q0", "q0q": "E2_q0q0", "0p0r": "E2_0p0r"}


def resolve_family(group: GroupSpec, name: str | None):
    from .equilibria import Family

    if group.tag == Group.HEISENBERG:
        return Family.HEIS_bolt
    table = SU2_FAMILIES if group.tag == Group.SU2 else E2_FAMILIES
    if name is None:
        return Family(table["qq0" if group.tag == Group.SU2 else "q0q0"])
    key = str(name)
    if key in table:
        return Family(table[key])
    try:
        fam = Family(key)
    except ValueError as exc:
        raise ConfigError(f"unknown family {name!r} for {group.tag.value}") from exc
    if fam.value not in table.values():
        raise ConfigError(f"family {name!r} does not belong to {group.tag.value}")
    return fam


def _single_q(cfg: RunConfig) -> float:
    qs = cfg.get("q", (1.0,))
    if len(qs) != 1:
        raise ConfigError("give a single q for this command")
    return qs[0]


def _weights(cfg: RunConfig):
    w = cfg.get("weights")
    if w is not None and len(w) != 2:
        raise ConfigError("weights need two values w_b,w_alpha")
    return w


def cmd_equilibria(cfg: RunConfig, out=sys.stdout) -> int:
    from .equilibria import Family, analytic_eigenvalues, linearize, make_equilibrium

    group = cfg.group()
    if group.tag not in (Group.SU2, Group.E2):
        raise ConfigError("equilibria are tabulated for su2 and e2 only")
    qs = cfg.get("q", (1.0,))
    rows = []
    fams = ([Family.SU2_qq0, Family.SU2_0qq, Family.SU2_q0q, Family.SU2_origin] if group.tag == Group.SU2
            else [Family.E2_q0q0, Family.E2_0p0r])
    if cfg.get("family"):
        fams = [resolve_family(group, cfg.get("family"))]
    for fam in fams:
        if fam == Family.SU2_origin:
            params_list = [()]
        elif fam == Family.E2_0p0r:
            params_list = [(cfg.get("p", 1.0), cfg.get("r", 1.0))]
        else:
            params_list = [(q,) for q in qs]
        for params in params_list:
            eq = make_equilibrium(group, fam, *params)
            rep = linearize(group, eq)
            ev = sorted(float(v) for v in np.real(rep.eigenvalues))
            ref = sorted(float(v) for v in analytic_eigenvalues(group, eq))
            err = max((abs(a - b) / max(1.0, abs(b)) for a, b in zip(ev, ref)), default=0.0)
            rows.append({
                "family": fam.value,
                "parameters": [float(p) for p in params],
                "point": [float(v) for v in eq.as_array()],
                "eigenvalues": ev,
                "analytic": ref,
                "max_rel_error": err,
                "unstable_dimension": int(sum(np.asarray(d).shape[1] for d in rep.unstable_directions)),
            })
    doc = {"group": group.tag.value, "exp_neg_A": group.exp_neg_A if group.tag == Group.SU2 else None,
           "equilibria": rows}
    if "json" in cfg.formats() and (cfg.output.get("_from_flag") or os.environ.get("CKLAB_OUT")):
        write_json(cfg.out_dir() / "equilibria.json", doc)
    if cfg.as_json:
        out.write(dumps(doc))
    else:
        out.write(f"{'family':<12} {'parameters':<14} {'eigenvalues':<40} max rel err\n")
        for r in rows:
            ev = ", ".join(f"{v:.10g}" for v in r["eigenvalues"])
            pr = ",".join(f"{v:g}" for v in r["parameters"]) or "-"
            out.write(f"{r['family']:<12} {pr:<14} {ev:<40} {r['max_rel_error']:.2e}\n")
    return EXIT_OK


def _trajectory_for(cfg: RunConfig, group: GroupSpec):
    from .closed_form import HeisenbergSolution, heis_states
    from .equilibria import make_equilibrium
    from .flow import integrate_both, launch

    opts = cfg.options()
    state = cfg.get("state")
    if state is not None:
        if len(state) != 4:
            raise ConfigError("state needs four values a,b,c,alpha")
        return {"state": list(state)}, integrate_both(group, State(*state), opts)
    if group.tag == Group.HEISENBERG:
        c1 = cfg.get("c1", 1.0)
        states, _ = heis_states(HeisenbergSolution(c1), np.array([0.0]))
        return {"closed_form_c1": c1}, integrate_both(group, State(*states[0]), opts)
    fam = resolve_family(group, cfg.get("family"))
    from .equilibria import Family

    if fam == Family.E2_0p0r:
        params = (cfg.get("p", 1.0), cfg.get("r", 1.0))
    elif fam == Family.SU2_origin:
        params = ()
    else:
        params = (_single_q(cfg),)
    eq = make_equilibrium(group, fam, *params)
    seed, traj = launch(group, eq, cfg.get("epsilon", 1e-6), _weights(cfg), opts, cfg.get("manifold_order", 3))
    return {"family": fam.value, "parameters": list(params), "epsilon": cfg.get("epsilon", 1e-6),
            "weights": list(_weights(cfg)) if _weights(cfg) else None,
            "seed": [float(v) for v in seed.as_array()]}, traj


def cmd_integrate(cfg: RunConfig, out=sys.stdout) -> int:
    from .flow import Chart, change_chart, first_integral_drift

    group = cfg.group()
    provenance, traj = _trajectory_for(cfg, group)
    chart = cfg.get("chart", "t")
    try:
        chart = Chart(chart)
    except ValueError as exc:
        raise ConfigError(f"unknown chart {chart!r}") from exc
    traj = change_chart(traj, chart, group)
    outdir = cfg.out_dir()
    files = []
    if "csv" in cfg.formats():
        csv_path, side = write_trajectory(traj, outdir / "trajectory.csv")
        files += [str(csv_path), str(side)]
    drift = first_integral_drift(traj) if not (group.tag == Group.SU2 and group.exp_neg_A == 0) else {}
    summary = {"group": group.tag.value, "chart": chart.value, "samples": len(traj), "provenance": provenance,
               "left_end": traj.left_end.to_dict(), "right_end": traj.right_end.to_dict(),
               "first_integral_drift": drift}
    if "json" in cfg.formats():
        files.append(str(write_json(outdir / "integrate.json", summary)))
    if cfg.as_json:
        out.write(dumps(summary))
    else:
        out.write(f"samples      {len(traj)} ({chart.value} chart)\n")
        for side_name, ep in (("left end", traj.left_end), ("right end", traj.right_end)):
            out.write(f"{side_name:<12} {ep.kind.value} at t = {ep.value:.12g}\n")
        for k, v in drift.items():
            out.write(f"drift {k:<6} {v:.3e}\n")
        for f in files:
            out.write(f"wrote        {f}\n")
    return EXIT_OK


def seed_from_config(cfg: RunConfig, group: GroupSpec):
    from .diagnostics import SeedSpec
    from .equilibria import Family

    state = cfg.get("state")
    if state is not None:
        if len(state) != 4:
            raise ConfigError("state needs four values a,b,c,alpha")
        return SeedSpec(state=tuple(state), epsilon=cfg.get("epsilon", 1e-6))
    fam = resolve_family(group, cfg.get("family"))
    if fam == Family.HEIS_bolt:
        return SeedSpec(family=fam.value, c1=cfg.get("c1", 1.0))
    params = (cfg.get("p", 1.0), cfg.get("r", 1.0)) if fam == Family.E2_0p0r else None
    q = 0.0 if fam == Family.SU2_origin else _single_q(cfg)
    w = _weights(cfg)
    return SeedSpec(family=fam.value, q=q, params=params, epsilon=cfg.get("epsilon", 1e-6),
                    weights=tuple(w) if w else None, manifold_order=cfg.get("manifold_order", 3))


def cmd_classify(cfg: RunConfig, out=sys.stdout) -> int:
    from .diagnostics import classify

    group = cfg.group()
    report = classify(group, seed_from_config(cfg, group), cfg.options(), cfg.get("order", 8))
    outdir = cfg.out_dir()
    if "json" in cfg.formats():
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "classification.json").write_text(report.to_json())
        (outdir / "classification.txt").write_text(report.to_text())
    out.write(report.to_json() if cfg.as_json else report.to_text())
    return EXIT_OK


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    informational: bool = False
    note: str = ""
    expect_fail: bool = False

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.threshold)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold, "pass": self.passed,
                "informational": self.informational, "note": self.note}


def verification_checks(order: int = 8, inject_error: bool = False) -> list:
    """Every residual the verify command reports."""
    from .ansatz import central_curvature_ricci, central_residual_reduced, central_residual_scale, implied_central_value
    from .closed_form import HeisenbergSolution, SU2BiaxialSolution, heis_verify, su2_biaxial_residual
    from .core import Derivative, rhs
    from .equilibria import make_equilibrium
    from .flow import launch
    from .series import corrupt, series_solve, smoothness, vz_kahler_check

    checks = []
    for c1 in (0.5, 1.0, 2.0):
        checks.append(Check(f"heisenberg_closed_form_c1={c1:g}", heis_verify(HeisenbergSolution(c1)).worst, 1e-10))
    for c1 in (0.5, 1.0, 2.0):
        r4 = heisenberg_r4_coefficient(c1)
        checks.append(Check(f"heisenberg_sigma3_r4_vs_-1/(4c1)_c1={c1:g}", abs(r4 + 0.25 / c1), 1e-8,
                            informational=True, note=f"closed form gives {r4:.12g}"))
    q = np.linspace(-5.0, 5.0, 1001)
    for gamma, B in ((2.0, 1.0), (1.3, 0.5), (3.0, 0.0)):
        checks.append(Check(f"su2_biaxial_gamma={gamma:g}_B={B:g}",
                            su2_biaxial_residual(SU2BiaxialSolution(gamma, 0.0, B), q), 1e-10))
    su2, e2, heis = GroupSpec.su2(1.0), GroupSpec.e2(), GroupSpec.heisenberg()
    for name, g, fam, params in (("su2_bolt", su2, "SU2_qq0", (1.0,)), ("su2_nut", su2, "SU2_origin", ()),
                                 ("e2_bolt", e2, "E2_q0q0", (1.0,)), ("heisenberg_bolt", heis, "HEIS_bolt", (1.0,))):
        sol = series_solve(g, make_equilibrium(g, fam, *params), order)
        checks.append(Check(f"series_residual_{name}_order={order}", sol.residual, 1e-12))
    rng = np.random.default_rng(12345)
    worst = 0.0
    for _ in range(100):
        g = (su2, e2)[int(rng.integers(2))]
        a, b, c = rng.uniform(0.2, 2.0, 3)
        al = g.exp_neg_A * a * b if g.tag == Group.SU2 else rng.uniform(0.2, 2.0)
        s = State(a, b, c, al)
        dal = rng.uniform(-1.0, 1.0)
        d = rhs(g, s, full=True)
        d = Derivative(d.da, d.db, d.dc, dal)
        x = central_curvature_ricci(g, s, dal)
        y = implied_central_value(g, s, d)
        worst = max(worst, abs(x - y) / max(1.0, abs(y)))
    checks.append(Check("ricci_route_vs_reduced_central_100_states", worst, 1e-8))
    for name, g, fam in (("su2", su2, "SU2_qq0"), ("e2", e2, "E2_q0q0")):
        _, traj = launch(g, make_equilibrium(g, fam, 1.0))
        res = 0.0
        for i in range(len(traj)):
            s = traj.state(i)
            d = Derivative.from_array(traj.derivs[i])
            res = max(res, abs(central_residual_reduced(g, s, d)) / central_residual_scale(g, s))
        checks.append(Check(f"central_residual_along_{name}_run", res, 1e-9))
        from .flow import first_integral_drift

        checks.append(Check(f"first_integral_drift_{name}_run", max(first_integral_drift(traj).values()), 1e-8))
    if inject_error:
        checks.append(Check("negative_control_heisenberg_rate_2.1",
                            heis_verify(HeisenbergSolution(1.0, rate=2.1)).worst, 1e-10, expect_fail=True))
        eq = make_equilibrium(su2, "SU2_qq0", 1.0)
        sol, _ = smoothness(su2, eq, order)
        bad = corrupt(sol, "c", 2, 0.1)
        rep = vz_kahler_check(bad, su2, eq)
        checks.append(Check("negative_control_series_c2=0.1", 0.0 if rep.kahler_pass else 1.0, 0.5,
                            expect_fail=True))
    return checks


def heisenberg_r4_coefficient(c1: float) -> float:
    """Coefficient of ``r^4`` in the sigma_3 coefficient of the closed form as
    a series in the geodesic distance ``r`` from the bolt, from the exact
    expansion ``u = e^{2q} = c1 r^2 + r^4/6 + ...``."""
    # phi' = u / sqrt(c1^2 + u) = u/c1 - u^2/(2 c1^3) + ...
    u2, u4 = c1, 1.0 / 6.0
    return u4 / c1 - u2 * u2 / (2.0 * c1**3)


def cmd_verify(cfg: RunConfig, out=sys.stdout) -> int:
    checks = verification_checks(cfg.get("order", 8), cfg.get("inject_error", False))
    failed = [c for c in checks if not c.passed and not c.informational]
    doc = {"checks": [c.to_dict() for c in checks], "failures": [c.name for c in failed], "pass": not failed}
    if "json" in cfg.formats() and (cfg.output.get("_from_flag") or os.environ.get("CKLAB_OUT")):
        write_json(cfg.out_dir() / "verify.json", doc)
    if cfg.as_json:
        out.write(dumps(doc))
    else:
        width = max(len(c.name) for c in checks)
        for c in checks:
            status = "pass" if c.passed else ("known discrepancy" if c.informational else "FAIL")
            extra = f"  {c.note}" if c.note else ""
            out.write(f"{c.name.ljust(width)}  {c.value:.3e} <= {c.threshold:.0e}  {status}{extra}\n")
        out.write(f"{len(checks) - len(failed)}/{len(checks)} checks pass\n")
    return EXIT_OK if not failed else EXIT_VERIFY


def _run_job(args: tuple) -> tuple:
    name, command, sections, source, outdir = args
    import io as _io

    buf = _io.StringIO()
    try:
        cfg = config_from_sections(command, sections, source)
        cfg.output["dir"] = str(outdir)
        cfg.output["_from_flag"] = True
        code = HANDLERS[command](cfg, buf)
    except CklabError as exc:
        return name, EXIT_CONFIG, f"{type(exc).__name__}: {exc}\n"
    return name, code, buf.getvalue()


def cmd_batch(cfg: RunConfig, args, out=sys.stdout) -> int:
    if not args.config:
        raise ConfigError("batch needs --config with [job:NAME] sections")
    cp = read_config_file(args.config)
    shared = {n: list(cp.items(n)) for n in cp.sections() if not n.startswith("job:")}
    jobs = []
    for sec in cp.sections():
        if not sec.startswith("job:"):
            continue
        name = sec[4:]
        items = dict(cp.items(sec))
        command = items.pop("command", None)
        if command not in HANDLERS:
            raise ConfigError(f"[{sec}] needs command = one of {sorted(HANDLERS)}")
        sections = {k: list(v) for k, v in shared.items()}
        run = dict(sections.get("run", []))
        run.update(items)
        sections["run"] = list(run.items())
        jobs.append((name, command, sections, args.config, str(cfg.out_dir() / name)))
    if not jobs:
        raise ConfigError("no [job:NAME] sections found")
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as ex:
            results = list(ex.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    code = EXIT_OK
    for name, c, text in results:
        out.write(f"== {name} (exit {c})\n{text}")
        code = max(code, c)
    return code


HANDLERS = {"equilibria": cmd_equilibria, "integrate": cmd_integrate, "classify": cmd_classify,
            "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "batch":
            return cmd_batch(cfg, args, sys.stdout)
        return HANDLERS[args.command](cfg, sys.stdout)
    except (ConfigError, CklabError) as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"cklab {args.command}: error: {exc}\n")
        return EXIT_CONFIG
    except Exception as exc:  # anything else is a bug
        sys.stderr.write(f"cklab {args.command}: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
