import warnings

import pytest

from odeim_bd.core import ModelParams
from odeim_bd.field import FieldConfig, solve_field

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def params_massive():
    return ModelParams(1.0, 0.1, 1.0)


@pytest.fixture(scope="session")
def params_conformal():
    return ModelParams(1.0, 0.1, 0.0)


@pytest.fixture(scope="session")
def field_s1(params_massive):
    return solve_field(params_massive, FieldConfig())


@pytest.fixture(scope="session")
def field_exact():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return solve_field(ModelParams(0.3, 0.3, 0.0), FieldConfig())


@pytest.fixture(scope="session")
def limit_fields():
    """Fields for the conformal-limit sequence s = 0.4, 0.2, 0.1."""
    return {s: solve_field(ModelParams(1.0, 0.1, s), FieldConfig()) for s in (0.4, 0.2, 0.1)}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
