import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from riesz_stability.corpus import build_corpus  # noqa: E402
from riesz_stability.kernel import Kernel  # noqa: E402


@pytest.fixture(scope="session")
def coulomb():
    return Kernel(3, 1.0)


@pytest.fixture(scope="session")
def corpus64():
    return build_corpus(64)


# acceptance summary ------------------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    k = props.get("criterion")
    if k is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _ACCEPTANCE.setdefault(k, []).append((report.passed, props.get("summary", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        results = _ACCEPTANCE[k]
        ok = all(p for p, _ in results)
        detail = "; ".join(s for _, s in results if s)
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
