import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_masses(rng, M, n=None, sparsity=0.5):
    """Random mass vectors with some exact zeros, rows summing to one."""
    shape = (M,) if n is None else (n, M)
    raw = rng.exponential(size=shape) * (rng.random(shape) > sparsity)
    raw = np.atleast_2d(raw)
    empty = raw.sum(axis=1) == 0
    raw[empty, rng.integers(M, size=empty.sum())] = 1.0
    out = raw / raw.sum(axis=1, keepdims=True)
    return out[0] if n is None else out


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
