import numpy as np
import pytest
from hypothesis import settings

from ifsflex import AffineSystem

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# Lines recorded by the acceptance suite; echoed in the terminal summary so
# they show up in the plain `pytest -v` log.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_affine(rng: np.random.Generator, d=None, max_ratio=None, min_sep=None, total=None) -> AffineSystem:
    """Random valid affine system.

    ``max_ratio`` bounds max/min rate, ``min_sep`` is the minimal gap between
    sorted rates, ``total`` fixes the rate sum (default: uniform in (0.3, 0.98)).
    """
    if d is None:
        d = int(rng.integers(2, 5))
    for _ in range(10_000):
        s = total if total is not None else rng.uniform(0.3, 0.98)
        w = rng.uniform(0.05, 1.0, size=d)
        if max_ratio is not None:
            w = rng.uniform(1.0, max_ratio, size=d)
        rates = s * w / w.sum()
        if max_ratio is not None and rates.max() / rates.min() > max_ratio:
            continue
        if min_sep is not None and np.min(np.diff(np.sort(rates))) < min_sep:
            continue
        if np.all((rates > 0) & (rates < 1)):
            return AffineSystem(tuple(float(r) for r in rates))
    raise RuntimeError("generator failed")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
