import pytest

from randsmooth.noise import NoiseDistribution


@pytest.fixture
def gauss1():
    return NoiseDistribution.gaussian(1)


@pytest.fixture(params=["gaussian", "logistic"])
def dist3(request):
    return NoiseDistribution(request.param, 3)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line, then assert it."""

    def check(number: int, title: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}  {detail}".rstrip())
        assert ok, f"criterion {number} failed: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
