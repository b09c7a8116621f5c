import sys
from pathlib import Path

import pytest
from hypothesis import settings

from oocrn import funcspec
from oocrn.crnfile import load_crn

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def spec_path(name: str) -> Path:
    return FIXTURES / f"{name}.json"


@pytest.fixture(scope="session")
def specs():
    names = ("affine", "dip", "wedges", "parity", "double_minus_one")
    return {n: funcspec.load_spec(spec_path(n)) for n in names}


@pytest.fixture(scope="session")
def dip_leader():
    return load_crn(FIXTURES / "dip_leader.crn")


@pytest.fixture(scope="session")
def double_crn():
    return load_crn(FIXTURES / "double_minus_one.crn")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, title, elapsed, limit = results[number]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}  ({elapsed:.2f}s, limit {limit:g}s)")
