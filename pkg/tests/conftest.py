import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.optimize import linprog

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- independent oracles shared by several test modules ----------------------------

def lp_transition_exists(p, q, gamma, cooling=False):
    """Stand-alone LP: is there a column-stochastic M with M p = q and M gamma = gamma?

    Written against the Kronecker form vec(M) (column-major), independent of
    the package's own witness code.  ``cooling`` swaps the Gibbs condition for
    an upper-triangular support.
    """
    p, q, gamma = (np.asarray(v, dtype=float) for v in (p, q, gamma))
    d = p.size
    eye = np.eye(d)
    # (x^T kron I) vec(M) = M x  for column-major vec
    rows = [np.kron(p, eye), np.kron(eye, np.ones(d))]
    rhs = [q, np.ones(d)]
    if not cooling:
        rows.append(np.kron(gamma, eye))
        rhs.append(gamma)
    a = np.vstack(rows)
    b = np.concatenate(rhs)
    bounds = []
    for col in range(d):
        for row in range(d):
            bounds.append((0, 0) if cooling and row > col else (0, None))
    res = linprog(np.zeros(d * d), A_eq=a, b_eq=b, bounds=bounds, method="highs")
    return res.status == 0


def l1_thermo_oracle(p, q, gamma, tol=1e-9):
    """p thermomajorizes q iff ||p - t gamma||_1 >= ||q - t gamma||_1 for all t >= 0.

    Both sides are piecewise linear in t with kinks at the ratios, so the
    kinks (and t = 0) suffice.
    """
    p, q, gamma = (np.asarray(v, dtype=float) for v in (p, q, gamma))
    ts = np.concatenate([[0.0], p / gamma, q / gamma])
    for t in ts:
        if np.abs(p - t * gamma).sum() < np.abs(q - t * gamma).sum() - tol:
            return False
    return True


def subset_majorization_oracle(p, q, tol=1e-9):
    """Largest k-subset sums of p dominate those of q, for every k."""
    d = len(p)
    for k in range(1, d + 1):
        best_p = max(sum(c) for c in itertools.combinations(p, k))
        best_q = max(sum(c) for c in itertools.combinations(q, k))
        if best_p < best_q - tol:
            return False
    return True


# -- random protocol generator (uses package samplers; not an oracle) ---------------

def random_witness(rng, gamma):
    """LP witness for a random thermomajorized pair (p, Mp)."""
    from thermolocc.gibbs_maps import random_gibbs_preserving, witness_matrix

    p = rng.dirichlet(np.ones(len(gamma)))
    q = random_gibbs_preserving(rng, gamma) @ p
    m = witness_matrix(p, q / q.sum(), gamma)
    return m if m is not None else random_gibbs_preserving(rng, gamma)


def random_round(rng, setup, measurer=None, retain=False, history_dims=(), witness=False):
    from thermolocc.gibbs_maps import random_gibbs_preserving
    from thermolocc.protocol import Round, other

    make = random_witness if witness else random_gibbs_preserving
    meas = measurer or ("A", "B")[rng.integers(2)]
    act = other(meas)
    g_o, g_m = setup.gamma(act), setup.gamma(meas)
    bank = {}
    for hist in itertools.product(*[range(d) for d in history_dims]):
        for c in range(setup.dim(meas)):
            bank[hist + (c,)] = make(rng, g_o)
    post = make(rng, g_m) if rng.random() < 0.5 else None
    return Round(meas, bank, post, retain)


def random_memoryless_protocol(rng, setup, max_rounds=3, mixture=False, witness=False):
    from thermolocc.protocol import Protocol

    if mixture:
        weights = rng.dirichlet(np.ones(3))
        subs = [random_memoryless_protocol(rng, setup, max_rounds, witness=witness) for _ in range(3)]
        return Protocol(setup, (), tuple(zip(weights, subs)))
    n = int(rng.integers(1, max_rounds + 1))
    return Protocol(setup, tuple(random_round(rng, setup, witness=witness) for _ in range(n)))


# -- acceptance summary --------------------------------------------------------------

ACCEPTANCE_LINES: dict[float, str] = {}
ACCEPTANCE_REPORTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
    for text in ACCEPTANCE_REPORTS:
        terminalreporter.write_line(text)
