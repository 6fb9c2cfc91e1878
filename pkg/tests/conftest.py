import pytest

from mtf_limit import weights
from mtf_limit.limit_law import LimitLaw

BUILTIN_SWEEP = [
    ("dirac", {}),
    ("gamma", {"alpha": 0.25}),
    ("gamma", {"alpha": 1.0}),
    ("gamma", {"alpha": 4.0}),
    ("geometric", {"p": 0.1}),
    ("geometric", {"p": 0.5}),
    ("geometric", {"p": 0.9}),
    ("poisson", {"lambda": 0.5}),
    ("poisson", {"lambda": 1.0}),
    ("poisson", {"lambda": 5.0}),
]


def sweep_id(item):
    kind, params = item
    return kind + "".join(f"-{v:g}" for v in params.values())


def make_family(kind, params):
    return weights.from_descriptor({"kind": kind, "params": params})


@pytest.fixture(params=BUILTIN_SWEEP, ids=sweep_id)
def builtin_family(request):
    return make_family(*request.param)


@pytest.fixture
def builtin_law(builtin_family):
    return LimitLaw.of(builtin_family)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    def record(criterion, passed, detail):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
