import importlib

import pytest

from maxent_reweight import _pykernels
from maxent_reweight.config import demo_config, parse_config
from maxent_reweight.pipeline import run_transform


def _backends():
    out = [pytest.param(_pykernels, id="python")]
    try:
        out.append(pytest.param(importlib.import_module("maxent_reweight._ckernels"), id="cython"))
    except ImportError:
        pass
    return out


BACKENDS = _backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def triangular_run():
    return run_transform(parse_config(demo_config("triangular")))


@pytest.fixture(scope="session")
def neutrino_run():
    return run_transform(parse_config(demo_config("neutrino")))


ACCEPTANCE_LINES = {}


def record_criterion(number: int, title: str, ok: bool, detail: str):
    ACCEPTANCE_LINES[number] = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
