"""Shared fixtures and the per-criterion acceptance summary."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from strichartz_lab.exponents import ExponentTuple

settings.register_profile("lab", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")

# criterion number -> [title, passed, details]
_ACCEPTANCE: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = marker.args
        entry = _ACCEPTANCE.setdefault(number, [title, True, []])
        entry[1] = entry[1] and rep.passed
        entry[2].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, details = _ACCEPTANCE[number]
        line = f"{number:>2}. {'PASS' if passed else 'FAIL'}  {title}"
        if details:
            line += "  [" + "; ".join(details) + "]"
        terminalreporter.write_line(line)


P_TUPLE = ExponentTuple(Fraction(1, 4), Fraction(1, 12), Fraction(1, 4), Fraction(3, 4), 3)
REGIME_I_TUPLE = ExponentTuple(Fraction(0), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), 3)
VIOLATING_TUPLE = ExponentTuple(Fraction(1, 2), Fraction(0), Fraction(1, 2), Fraction(0), 3)

J_RANGE = range(-2, 7)


@pytest.fixture(scope="session")
def p_sweep():
    from strichartz_lab.experiments import bilinear_decay_sweep

    return bilinear_decay_sweep(P_TUPLE, J_RANGE, trials=2, seed=1)


@pytest.fixture(scope="session")
def regime_i_sweep():
    from strichartz_lab.experiments import bilinear_decay_sweep

    return bilinear_decay_sweep(REGIME_I_TUPLE, J_RANGE, trials=2, seed=1)


@pytest.fixture(scope="session")
def violating_counterexample():
    from strichartz_lab.experiments import counterexample_sweep

    return counterexample_sweep(VIOLATING_TUPLE)
