import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def block_graph(sizes, weight=1.0, rng=None):
    """Symmetric nonnegative block-diagonal affinity with the given block sizes."""
    n = sum(sizes)
    W = np.zeros((n, n))
    start = 0
    for s in sizes:
        block = np.full((s, s), weight) if rng is None else rng.uniform(0.1, 1.0, (s, s))
        W[start:start + s, start:start + s] = 0.5 * (block + block.T)
        start += s
    return W


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS, TITLES
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(TITLES):
        if c in RESULTS:
            ok, detail = RESULTS[c]
            status = "PASS" if ok else "FAIL"
        else:
            status, detail = "SKIP", "not run"
        terminalreporter.write_line(f"criterion {c} [{status}] {TITLES[c]}: {detail}")
