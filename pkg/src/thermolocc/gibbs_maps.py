"""Gibbs-preserving stochastic matrices and their zero-temperature (cooling) limit.

Convention: column-stochastic, ``m[i, j]`` is the probability of ``j -> i``,
so a transition acts as ``q = m @ p``.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog

from . import rational
from .core import (EPS_NORM, fix_tolerance, is_zero_temperature,
                   prob_vector, thermo_majorizes)


def stochastic_matrix(m, tol: float = EPS_NORM) -> np.ndarray:
    """Validate a column-stochastic matrix, clamping tiny negatives."""
    arr = np.array(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    if np.any(arr < -tol):
        raise ValueError("matrix has negative entries")
    arr[arr < 0] = 0.0
    cols = arr.sum(axis=0)
    if np.any(np.abs(cols - 1.0) > tol * arr.shape[0]):
        raise ValueError(f"columns do not sum to 1: {cols.tolist()}")
    return arr


def is_cooling(m, tol: float = EPS_NORM) -> bool:
    """Upper-triangular in energy order: nothing is ever moved upwards."""
    arr = np.asarray(m, dtype=float)
    return bool(np.all(np.abs(np.tril(arr, -1)) <= tol))


def is_gibbs_preserving(m, gamma, tol: float | None = None) -> bool:
    """Whether ``m`` is stochastic and fixes ``gamma``.

    For the zero-temperature point mass the limit condition is used:
    the map must be a cooling matrix.
    """
    tol = fix_tolerance() if tol is None else tol
    arr = np.asarray(m, dtype=float)
    g = np.asarray(gamma, dtype=float)
    if arr.shape != (g.size, g.size):
        raise ValueError(f"dimension mismatch: {arr.shape} vs {g.size}")
    if np.any(arr < -tol) or np.any(np.abs(arr.sum(axis=0) - 1) > tol):
        return False
    if is_zero_temperature(g):
        return is_cooling(arr, tol)
    return bool(np.all(np.abs(arr @ g - g) <= tol))


def satisfies_detailed_balance(m, gamma, tol: float | None = None) -> bool:
    """``m[i, j] gamma[j] == m[j, i] gamma[i]`` for every pair."""
    tol = fix_tolerance() if tol is None else tol
    arr = np.asarray(m, dtype=float)
    flux = arr * np.asarray(gamma, dtype=float)[None, :]
    return bool(np.all(np.abs(flux - flux.T) <= tol))


def transition_feasible(p, q, gamma) -> bool:
    """Existence of a Gibbs-preserving map sending ``p`` to ``q``."""
    return thermo_majorizes(p, q, gamma)


def _witness_system(p, q, gamma):
    """Equality rows over the admissible entries of a d x d transition matrix."""
    d = p.size
    zero_t = is_zero_temperature(np.asarray(gamma, dtype=float))
    cells = [(i, j) for i in range(d) for j in range(d) if not (zero_t and i > j)]
    rows, rhs = [], []
    for j in range(d):
        rows.append([1 if c[1] == j else 0 for c in cells])
        rhs.append(1)
    for i in range(d):
        rows.append([p[j] if ii == i else 0 for ii, j in cells])
        rhs.append(q[i])
    if not zero_t:
        for i in range(d):
            rows.append([gamma[j] if ii == i else 0 for ii, j in cells])
            rhs.append(gamma[i])
    return cells, rows, rhs


def _exact_normalized(vec) -> np.ndarray:
    vals = [rational.frac(v) for v in vec]
    total = sum(vals)
    return np.array([v / total for v in vals], dtype=object)


def witness_matrix(p, q, gamma, exact: bool = False) -> np.ndarray | None:
    """Some Gibbs-preserving ``m`` with ``m p = q``, or None when none exists.

    Solved as a linear feasibility problem in the matrix entries; which
    feasible point comes back is unspecified.  ``exact=True`` runs an
    exact rational simplex on the float inputs taken at face value.
    """
    p = prob_vector(p)
    q = prob_vector(q)
    gamma = np.asarray(gamma, dtype=float)
    if not p.size == q.size == gamma.size:
        raise ValueError("dimension mismatch")
    d = p.size
    cells, rows, rhs = _witness_system(p, q, gamma)
    if exact:
        # renormalize exactly so float rounding cannot make the system inconsistent
        cells, rows, rhs = _witness_system(_exact_normalized(p), _exact_normalized(q),
                                           _exact_normalized(gamma))
        x = rational.feasible_point(rows, rhs)
        if x is None:
            return None
        out = np.zeros((d, d))
        for (i, j), v in zip(cells, x):
            out[i, j] = float(v)
        return out
    res = linprog(np.zeros(len(cells)), A_eq=np.array(rows, dtype=float), b_eq=np.array(rhs, dtype=float),
                  bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        return None
    out = np.zeros((d, d))
    for (i, j), v in zip(cells, res.x):
        out[i, j] = v if v > 0 else 0.0
    out /= out.sum(axis=0, keepdims=True)
    tol = fix_tolerance()
    if np.abs(out @ p - q).max() > tol:
        return None
    if not is_zero_temperature(gamma) and np.abs(out @ gamma - gamma).max() > tol:
        return None
    return out


def thermal_swap(gamma) -> np.ndarray:
    """Two-level thermal swap ((1-g, 1), (g, 0)) with g = gamma_1/gamma_0."""
    g_vec = np.asarray(gamma, dtype=float)
    if g_vec.size != 2:
        raise ValueError("the thermal swap is defined for two levels only")
    g = g_vec[1] / g_vec[0]
    return np.array([[1.0 - g, 1.0], [g, 0.0]])


def extremal_cooling_matrices(d: int) -> list[np.ndarray]:
    """All 0/1 upper-triangular stochastic matrices; there are d! of them."""
    if d < 1:
        raise ValueError("dimension must be positive")
    if d > 6:
        raise ValueError("dimension too large for exhaustive enumeration (max 6)")
    out = []
    for rows in itertools.product(*[range(j + 1) for j in range(d)]):
        m = np.zeros((d, d))
        m[list(rows), list(range(d))] = 1.0
        out.append(m)
    return out


def random_detailed_balance(rng: np.random.Generator, gamma) -> np.ndarray:
    """Metropolis-style random map obeying detailed balance with ``gamma``."""
    g = np.asarray(gamma, dtype=float)
    d = g.size
    if is_zero_temperature(g):
        return random_cooling(rng, d)
    a = rng.random((d, d))
    a = (a + a.T) / 2
    off = a * np.minimum(1.0, g[:, None] / g[None, :])
    np.fill_diagonal(off, 0.0)
    scale = max(1.0, off.sum(axis=0).max())
    m = off / scale
    np.fill_diagonal(m, 1.0 - m.sum(axis=0))
    return m


def random_cooling(rng: np.random.Generator, d: int) -> np.ndarray:
    m = np.triu(rng.random((d, d)))
    return m / m.sum(axis=0, keepdims=True)


def random_gibbs_preserving(rng: np.random.Generator, gamma) -> np.ndarray:
    """Random Gibbs-preserving map mixing an LP witness with a detailed-balance map.

    The LP witness tends to sit on a face of the polytope, so it reaches
    maps that detailed balance alone never produces.
    """
    g = np.asarray(gamma, dtype=float)
    d = g.size
    base = random_detailed_balance(rng, g)
    p = rng.dirichlet(np.ones(d))
    q = base @ p
    w = witness_matrix(p, q, g)
    if w is None:  # numerically borderline; fall back to the sampled map
        return base
    t = rng.random()
    m = t * w + (1 - t) * base
    return m / m.sum(axis=0, keepdims=True)
