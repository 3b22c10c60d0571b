import pytest

import helpers

# Filled by test_acceptance.py; one (criterion, passed, detail) per check.
ACCEPTANCE = []


@pytest.fixture
def program():
    return helpers.example_program()


@pytest.fixture
def sample():
    return helpers.example_sample()


@pytest.fixture
def model():
    return helpers.example_model()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
