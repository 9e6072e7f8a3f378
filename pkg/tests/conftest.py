import numpy as np
import pytest

from hybridcache import PopularityMatrix, SystemConfig

# (Z vector, reference N1*, reference M1*) for K=10, N=1000, M=100, alpha=1
TABLE_ROWS = [
    ([10] * 10, 352, 37),
    ([8, 9, 9, 9, 9, 10, 11, 11, 12, 12], 344, 39),
    ([6, 8, 9, 9, 9, 10, 11, 12, 12, 14], 340, 40),
    ([5, 7, 9, 9, 9, 10, 11, 12, 13, 15], 332, 42),
    ([4, 6, 9, 9, 9, 10, 11, 12, 14, 16], 328, 43),
    ([3, 5, 7, 9, 9, 11, 11, 13, 15, 17], 316, 46),
    ([2, 4, 6, 8, 9, 11, 12, 14, 16, 18], 240, 40),
    ([1, 3, 5, 7, 9, 11, 13, 15, 17, 19], 240, 40),
    ([0, 2, 4, 6, 9, 11, 14, 16, 18, 20], 233, 43),
    ([0, 2, 2, 3, 7, 11, 14, 16, 20, 25], 219, 49),
    ([1, 1, 1, 1, 1, 5, 15, 20, 25, 30], 172, 52),
]

# four contents (rows W1..W4) by four SBSs (columns)
HETERO_P = np.array([
    [0.3, 0.2, 0.3, 0.2],
    [0.2, 0.3, 0.2, 0.3],
    [0.5, 0.5, 0.0, 0.0],
    [0.0, 0.0, 0.5, 0.5],
])


@pytest.fixture
def hetero_pop():
    return PopularityMatrix(HETERO_P)


def hetero_config(M):
    return SystemConfig(K=4, N=4, M=M, Z=[1, 1, 1, 1])


# criterion number -> PASS/FAIL line, filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
