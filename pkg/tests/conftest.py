import pytest

from traintrack.fixtures import corpus


@pytest.fixture(scope="session")
def maps():
    return corpus()


@pytest.fixture
def F(maps):
    return maps.__getitem__


CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion: ``with criterion(n, "what") as notes: ...``."""
    from contextlib import contextmanager

    @contextmanager
    def run(n: int, label: str):
        notes: list[str] = []
        try:
            yield notes
        except BaseException as exc:
            CRITERIA[n] = f"criterion {n:2d} FAIL  {label}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
            raise
        CRITERIA[n] = f"criterion {n:2d} PASS  {label}" + "".join(f" [{x}]" for x in notes)
        print(CRITERIA[n])

    return run


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[n])
