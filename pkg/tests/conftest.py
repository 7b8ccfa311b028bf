"""Shared fixtures and the per-criterion acceptance summary."""
from __future__ import annotations

from collections import defaultdict

import pytest

from cklab import GroupSpec, launch, make_equilibrium

CRITERIA = {
    1: "eigenvalue oracle",
    2: "Heisenberg closed form",
    3: "central flatness along trajectories",
    4: "first integrals",
    5: "completeness asymptotics",
    6: "incompleteness reproduction",
    7: "series and parity",
    8: "E(2) scaling symmetry",
    9: "Ricci route cross-validation",
    10: "determinism",
}

_outcomes: dict = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", int(mark.args[0])))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes[crit].append((report.nodeid, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        runs = _outcomes.get(n, [])
        if not runs:
            terminalreporter.write_line(f"criterion {n:2d} ({title}): NOT RUN")
            continue
        failed = [node.split("::")[-1] for node, ok in runs if not ok]
        status = "PASS" if not failed else "FAIL"
        detail = f"{len(runs) - len(failed)}/{len(runs)} checks"
        if failed:
            detail += "; failing: " + ", ".join(failed)
        terminalreporter.write_line(f"criterion {n:2d} ({title}): {status} ({detail})")


@pytest.fixture(scope="session")
def su2_bolt_run():
    g = GroupSpec.su2(1.0)
    eq = make_equilibrium(g, "SU2_qq0", 1.0)
    seed, traj = launch(g, eq)
    return g, eq, seed, traj


@pytest.fixture(scope="session")
def e2_bolt_run():
    g = GroupSpec.e2()
    eq = make_equilibrium(g, "E2_q0q0", 1.0)
    seed, traj = launch(g, eq)
    return g, eq, seed, traj
