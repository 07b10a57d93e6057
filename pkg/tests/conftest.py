import itertools

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def kron_ladder(cutoffs, mode):
    """Dense truncated annihilator on ``mode`` of a tensor product space.

    Built from ``diag(sqrt(1..n-1), 1)`` factors; independent of the sector code.
    """
    mats = []
    for m, n in enumerate(cutoffs):
        if m == mode:
            mats.append(np.diag(np.sqrt(np.arange(1, n)), 1))
        else:
            mats.append(np.eye(n))
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def product_index(cutoffs):
    """Map occupation tuples to their row in the Kronecker product basis."""
    return {occ: i for i, occ in enumerate(itertools.product(*[range(n) for n in cutoffs]))}


def project(dense, sector, cutoffs):
    idx = product_index(cutoffs)
    rows = [idx[tuple(int(v) for v in occ)] for occ in sector.basis]
    return dense[np.ix_(rows, rows)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
