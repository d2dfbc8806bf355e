import sys

import pytest

from ptcsched import _pykernels

try:
    from ptcsched import _kernels
except ImportError:  # extension not built
    _kernels = None

BACKENDS = [_pykernels] + ([_kernels] if _kernels is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda k: k.BACKEND)
def kernel(request):
    return request.param


@pytest.fixture(params=BACKENDS, ids=lambda k: k.BACKEND)
def any_backend(request, monkeypatch):
    """Run the public relaxation/filtering API on each kernel backend."""
    from ptcsched import filtering, relaxation

    monkeypatch.setattr(relaxation, "kernel", request.param)
    monkeypatch.setattr(filtering, "_ft", request.param.min_flowtime)
    return request.param


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
