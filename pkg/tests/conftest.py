import importlib

import pytest

KERNELS = ["_kernel_py"]
try:
    importlib.import_module("ks_forge.assignments._kernel_c")
    KERNELS.append("_kernel_c")
except ImportError:
    pass

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(params=KERNELS)
def kernel(request):
    return importlib.import_module(f"ks_forge.assignments.{request.param}")


@pytest.fixture
def report_criterion():
    def report(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
