"""Which outputs r can a thermal or bithermal tensor produce from inputs (p, q)?"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .core import (EPS_NORM, MajorizationCurve, curve_eval, fix_tolerance, is_zero_temperature,
                   prob_vector, thermo_curve, thermo_majorizes)
from .tensors import apply_tensor, bithermal_system


def thermal_reachable(p, q, r, gamma) -> bool:
    """A tensor thermal in the slot carrying ``p`` can output ``r`` iff p thermomajorizes r.

    ``q`` plays no role: a tensor with every layer equal to one witness
    matrix achieves any thermomajorized target.
    """
    return thermo_majorizes(p, r, gamma)


def bithermal_reachable_exact(p, q, r, gamma) -> bool:
    """LP decision over the d**3 tensor entries (d <= 3)."""
    p, q, r = (np.asarray(v, dtype=float) for v in (p, q, r))
    d = p.size
    if d > 3:
        raise ValueError("exact bithermal reachability is limited to d <= 3")
    rows, rhs, free = bithermal_system(np.asarray(gamma, dtype=float))
    rows = [list(map(float, row)) for row in rows]
    rhs = [float(v) for v in rhs]
    for i in range(d):
        row = [0.0] * d ** 3
        for j, k in itertools.product(range(d), repeat=2):
            row[(i * d + j) * d + k] = p[j] * q[k]
        rows.append(row)
        rhs.append(r[i])
    res = linprog(np.zeros(d ** 3), A_eq=np.array(rows), b_eq=np.array(rhs), bounds=(0, None),
                  method="highs", options={"primal_feasibility_tolerance": 1e-10})
    return res.status == 0


def upper_envelope(curves: list[MajorizationCurve]) -> MajorizationCurve:
    """Pointwise maximum of piecewise-linear curves, with crossing points added."""
    if not curves:
        raise ValueError("need at least one curve")
    xs = np.unique(np.concatenate([c.xs for c in curves]))
    grid = list(xs)
    # crossings between consecutive grid points
    for a, b in zip(xs[:-1], xs[1:]):
        if b - a <= 0:
            continue
        vals_a = [curve_eval(c, a) if a > 0 else 0.0 for c in curves]
        vals_b = [curve_eval(c, b) for c in curves]
        for u, w in itertools.combinations(range(len(curves)), 2):
            da = vals_a[u] - vals_a[w]
            db = vals_b[u] - vals_b[w]
            if da * db < 0:
                grid.append(a + (b - a) * da / (da - db))
    grid = np.unique(np.array(grid))
    ys = np.array([max(curve_eval(c, x) for c in curves) if x > 0 else 0.0 for x in grid])
    return MajorizationCurve(grid, ys)


def max_curve_bound(p, q, gamma, vertices) -> MajorizationCurve:
    """Envelope of the thermomajorization curves of all vertex images of (p, q)."""
    vertices = list(vertices)
    if not vertices:
        raise ValueError("empty vertex list")
    curves = [thermo_curve(apply_tensor(t, p, q), gamma) for t in vertices]
    return upper_envelope(curves)


def below_envelope(r, gamma, envelope: MajorizationCurve, tol: float = 1e-9) -> bool:
    curve = thermo_curve(r, gamma)
    grid = np.union1d(curve.xs, envelope.xs)
    grid = grid[grid > 0]
    return all(curve_eval(curve, x) <= curve_eval(envelope, x) + tol for x in grid)


@dataclass(frozen=True)
class BoundaryDistribution:
    tilde_p: np.ndarray
    weight: float


def boundary_distribution(p, gamma) -> BoundaryDistribution:
    """Split p = (1 - w) tilde_p + w gamma with w as large as possible."""
    p = prob_vector(p)
    g = np.asarray(gamma, dtype=float)
    if np.abs(p - g).max() <= fix_tolerance():
        raise ValueError("input is Gibbs; projection undefined")
    if is_zero_temperature(g):
        w = float(p[0])
    else:
        w = float(np.min(p / g))
    tilde = (p - w * g) / (1 - w)
    tilde[np.abs(tilde) <= EPS_NORM] = 0.0
    return BoundaryDistribution(tilde, w)


def enhanced_necessary(p, q, r, gamma) -> bool:
    """Thermomajorization test strengthened by the boundary projections of p and q.

    Whatever part of the inputs is Gibbs must come out Gibbs, so the
    remaining part r_bar of the output has to be reachable from the
    boundary distributions.  A negative r_bar fails the condition.
    """
    g = np.asarray(gamma, dtype=float)
    bp = boundary_distribution(p, g)
    bq = boundary_distribution(q, g)
    scale = (1 - bp.weight) * (1 - bq.weight)
    r = np.asarray(r, dtype=float)
    r_bar = (r - (1 - scale) * g) / scale
    if np.any(r_bar < -EPS_NORM) or abs(r_bar.sum() - 1) > 1e-9:
        return False
    r_bar = np.clip(r_bar, 0.0, None)
    return (thermo_majorizes(p, r, g) and thermo_majorizes(q, r, g)
            and thermo_majorizes(bp.tilde_p, r_bar, g) and thermo_majorizes(bq.tilde_p, r_bar, g))


def simplex_grid(d: int, step: float):
    """Barycentric lattice points of the probability simplex."""
    n = int(round(1 / step))
    for combo in itertools.product(range(n + 1), repeat=d - 1):
        if sum(combo) <= n:
            yield np.array(list(combo) + [n - sum(combo)], dtype=float) / n
