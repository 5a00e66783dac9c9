import numpy as np
import pytest
from hypothesis import strategies as st

from perron_tree.tree import Tree


def path(n):
    return Tree.from_edges([(i, i + 1) for i in range(n - 1)], n=n)


def star(leaves):
    return Tree.from_edges([(0, i) for i in range(1, leaves + 1)], n=leaves + 1)


def spider(legs, length):
    edges, nxt = [], 1
    for _ in range(legs):
        prev = 0
        for _ in range(length):
            edges.append((prev, nxt))
            prev, nxt = nxt, nxt + 1
    return Tree.from_edges(edges, n=nxt)


def double_star(leaves):
    """Two adjacent centers 0 and 1, each with ``leaves`` pendant vertices."""
    edges = [(0, 1)]
    nxt = 2
    for c in (0, 1):
        for _ in range(leaves):
            edges.append((c, nxt))
            nxt += 1
    return Tree.from_edges(edges, n=nxt)


def path_lambda1(n):
    # normalized Laplacian of P_n has eigenvalues 1 - cos(pi k / (n - 1))
    return 1.0 - np.cos(np.pi / (n - 1))


@pytest.fixture
def p4():
    return path(4)


tree_args = st.tuples(st.integers(2, 30), st.integers(0, 2**63 - 1))


# one line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
