import time

import numpy as np
import pytest

from ttmax import TTTensor


def random_tt(dims, ranks, seed=0, scale=1.0):
    """Gaussian cores; generic, hence minimal when ranks fit the dimensions."""
    rng = np.random.default_rng(seed)
    full = (1,) + tuple(ranks) + (1,)
    return TTTensor([scale * rng.standard_normal((full[s], n, full[s + 1]))
                     for s, n in enumerate(dims)])


def dense_by_loops(tt):
    """Entry-by-entry contraction with explicit sums over the rank indices."""
    out = np.zeros(tt.shape)
    for idx in np.ndindex(*tt.shape):
        vec = {0: 1.0}
        for g, i in zip(tt.cores, idx):
            nxt = {}
            for b in range(g.shape[2]):
                nxt[b] = sum(vec[a] * g[a, i, b] for a in vec)
            vec = nxt
        out[idx] = vec[0]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _column_minimax(col, u):
    """min over v of max_i |col_i - u_i v|, by checking every breakpoint of the convex objective."""
    cands = [0.0]
    for i in range(len(u)):
        if u[i] != 0:
            cands.append(col[i] / u[i])
        for k in range(i + 1, len(u)):
            for sign in (1.0, -1.0):
                den = u[i] - sign * u[k]
                if den != 0:
                    cands.append((col[i] - sign * col[k]) / den)
    return min(np.max(np.abs(col - u * v)) for v in cands)


def rank_one_chebyshev_oracle(a, angles=20001):
    """Grid over directions u = (cos t, sin t) of the best rank-1 max-norm error of a 2-row matrix.

    For each direction the best right factor is exact, so the result is an
    upper bound on the optimum that approaches it as the grid is refined.
    """
    a = np.asarray(a, dtype=float)
    best = np.inf
    for t in np.linspace(0.0, np.pi, angles):
        u = np.array([np.cos(t), np.sin(t)])
        best = min(best, max(_column_minimax(a[:, j], u) for j in range(a.shape[1])))
    return best


def rank_one_lower_bound_i2(eps):
    """Whether a rank-1 matrix within ``eps`` of I_2 can exist.

    Such a matrix needs u1 v1, u2 v2 >= 1 - eps and |u1 v2|, |u2 v1| <= eps;
    the products agree, so (1 - eps)^2 <= eps^2.
    """
    return (1 - eps) ** 2 <= eps**2


# -- acceptance reporting ---------------------------------------------------------

_ACCEPTANCE = pytest.StashKey[dict]()


class Criterion:
    """Context manager recording one PASS/FAIL line; assertion errors still propagate."""

    def __init__(self, table, number, title):
        self.table, self.number, self.title = table, number, title
        self.details = []

    def note(self, text):
        self.details.append(text)

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        status = "PASS" if exc_type is None else "FAIL"
        detail = "; ".join(self.details)
        if exc is not None:
            detail = (detail + "; " if detail else "") + f"{exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        line = f"{status} criterion {self.number:2d} {self.title} [{elapsed:.2f} s] {detail}"
        self.table[self.number] = line
        print(line)
        return False


@pytest.fixture
def criterion(request):
    table = request.config.stash.setdefault(_ACCEPTANCE, {})

    def make(number, title):
        return Criterion(table, number, title)

    return make


def pytest_terminal_summary(terminalreporter, config):
    table = config.stash.get(_ACCEPTANCE, {})
    if table:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(table):
            terminalreporter.write_line(table[number])
