import numpy as np
import pytest

from bridgewalk.graph import generate_planted_partition, generate_two_star


def dense_rwc_oracle(graph, partition, alpha):
    """RWC from first principles: explicit P_x/P_y, two dense solves."""
    n = graph.n_vertices
    in_x = np.asarray(partition.in_x)
    e_x = in_x / in_x.sum()
    e_y = (~in_x) / (~in_x).sum()
    p = np.zeros((n, n))
    for u in range(n):
        succ = graph.successors(u)
        for v in succ:
            p[v, u] = 1.0 / len(succ)
    r = {}
    for name, e in (("x", e_x), ("y", e_y)):
        pe = p.copy()
        for u in range(n):
            if not graph.successors(u):
                pe[:, u] = e
        r[name] = np.linalg.solve(np.eye(n) - alpha * pe, (1 - alpha) * e)
    c_x = np.zeros(n)
    c_x[list(partition.x_star)] = 1
    c_y = np.zeros(n)
    c_y[list(partition.y_star)] = 1
    return float((c_x - c_y) @ (r["x"] - r["y"]))


@pytest.fixture
def two_star10():
    return generate_two_star(10)


@pytest.fixture(scope="session")
def planted_small():
    return generate_planted_partition(60, 0.05, 0.005, 0.05, seed=7, k1=4, k2=4)


@pytest.fixture(scope="session")
def planted_500():
    return generate_planted_partition(250, 0.01, 0.001, 0.02, seed=1)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[num])
