import importlib
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from motprobe.config import paper_default  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def cfg():
    return paper_default()


def _backends():
    mods = [importlib.import_module("motprobe._kernels_py")]
    try:
        mods.append(importlib.import_module("motprobe._kernels"))
    except ImportError:
        pass
    return mods


@pytest.fixture(params=_backends(), ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def kernel_module(request):
    return request.param


# One verdict line per acceptance criterion, shown in the terminal summary.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
