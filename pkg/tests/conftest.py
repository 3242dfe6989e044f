import os

import pytest

from fairshare import kernels
from fairshare.instance import Instance, Link, Path, Request


def linear_network(alpha: float = 1.0, weights=(1.0, 1.0, 1.0)) -> Instance:
    """Two unit links in series; r0 crosses both, r1 and r2 use one each."""
    links = (Link("j1", 1.0), Link("j2", 1.0))
    paths = (Path("p0", ("j1", "j2")), Path("p1", ("j1",)), Path("p2", ("j2",)))
    reqs = (Request("r0", weights[0], ("p0",)), Request("r1", weights[1], ("p1",)),
            Request("r2", weights[2], ("p2",)))
    return Instance(links, paths, reqs, alpha)


def single_link(capacity: float = 10.0, n: int = 1, alpha: float = 1.0) -> Instance:
    links = (Link("j", capacity),)
    paths = tuple(Path(f"p{i}", ("j",)) for i in range(n))
    reqs = tuple(Request(f"r{i}", 1.0, (f"p{i}",)) for i in range(n))
    return Instance(links, paths, reqs, alpha)


def two_disjoint(c=(3.0, 5.0), alpha: float = 1.0) -> Instance:
    links = (Link("a", c[0]), Link("b", c[1]))
    paths = (Path("pa", ("a",)), Path("pb", ("b",)))
    return Instance(links, paths, (Request("r", 1.0, ("pa", "pb")),), alpha)


@pytest.fixture
def linear():
    return linear_network()


@pytest.fixture(params=["python", "compiled"])
def backend(request):
    if request.param == "compiled" and kernels.compiled_backend is None:
        pytest.skip("compiled kernels not built")
    return kernels.python_backend if request.param == "python" else kernels.compiled_backend


def pytest_report_header(config):
    return f"fairshare kernels: {kernels.BACKEND} (FAIRSHARE_PURE_PYTHON={os.environ.get('FAIRSHARE_PURE_PYTHON', '')})"


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
