"""Vertex enumeration for small polyhedra ``{x : A x = b, x_S >= 0}``.

Vertices are found as basic feasible solutions: parametrize the affine
hull as ``x0 + N y`` and, for every choice of ``dim`` sign-constrained
coordinates, pin them to zero and solve.  Exhaustive, so only meant for
the low dimensions that show up here (a few million candidate supports at
most).  An exact ``Fraction`` variant covers the golden low-dimensional
cases.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
from scipy.linalg import null_space

from . import rational

DEDUPE_TOL = 1e-7


@dataclass(frozen=True)
class Vertex:
    """A vertex together with its basic-feasible-solution certificate."""

    x: np.ndarray
    active: tuple[int, ...]  # sign-constrained coordinates sitting at zero
    rank: int  # rank of equalities plus active bounds; equals len(x) for a vertex


def affine_hull(a_eq, b_eq, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Particular solution and orthonormal null-space basis of ``A x = b``."""
    a = np.asarray(a_eq, dtype=float)
    b = np.asarray(b_eq, dtype=float)
    x0, *_ = np.linalg.lstsq(a, b, rcond=None)
    if np.abs(a @ x0 - b).max(initial=0.0) > tol * max(1.0, np.abs(b).max(initial=0.0)):
        raise ValueError("equality system is inconsistent")
    return x0, null_space(a)


def _certificate(a, x, nonneg, tol):
    active = tuple(int(i) for i in nonneg if abs(x[i]) <= tol)
    rows = [a] + ([np.eye(x.size)[list(active)]] if active else [])
    rk = int(np.linalg.matrix_rank(np.vstack(rows), tol=1e-9))
    return active, rk


def enumerate_vertices(a_eq, b_eq, nonneg=None, tol: float = 1e-9,
                       dedupe: float = DEDUPE_TOL, chunk: int = 200_000) -> list[Vertex]:
    """All vertices of ``{A x = b, x_i >= 0 for i in nonneg}`` in floating point.

    ``nonneg`` defaults to every coordinate.  The polyhedron need not be
    bounded; only its vertices are returned (see :func:`extreme_rays`).
    """
    a = np.asarray(a_eq, dtype=float)
    n = a.shape[1]
    nonneg = np.arange(n) if nonneg is None else np.asarray(sorted(nonneg), dtype=int)
    x0, basis = affine_hull(a, b_eq)
    k = basis.shape[1]
    candidates = []
    if k == 0:
        if np.all(x0[nonneg] >= -tol):
            candidates.append(x0)
    elif nonneg.size >= k:
        combos = itertools.combinations(range(nonneg.size), k)
        total = comb(nonneg.size, k)
        done = 0
        while done < total:
            take = min(chunk, total - done)
            flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, take)),
                               dtype=np.int64, count=take * k)
            done += take
            sel = nonneg[flat.reshape(take, k)]
            mats = basis[sel]  # (take, k, k)
            rhs = -x0[sel]
            dets = np.linalg.det(mats)
            ok = np.abs(dets) > 1e-12
            if not ok.any():
                continue
            ys = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
            xs = x0 + ys @ basis.T
            feasible = np.all(xs[:, nonneg] >= -tol, axis=1)
            candidates.extend(xs[feasible])
    out: dict[bytes, Vertex] = {}
    for x in candidates:
        x = np.where(np.abs(x) <= tol, 0.0, x)
        key = np.round(x / dedupe).astype(np.int64).tobytes()
        if key in out:
            continue
        active, rk = _certificate(a, x, nonneg, tol)
        out[key] = Vertex(x=x, active=active, rank=rk)
    return list(out.values())


def enumerate_vertices_exact(a_eq, b_eq, nonneg=None) -> list[list[Fraction]]:
    """Exact vertex enumeration over rationals; practical for a handful of free dimensions."""
    a = rational.frac_matrix(a_eq)
    n = len(a[0])
    nonneg = list(range(n)) if nonneg is None else sorted(nonneg)
    sol = rational.solve_affine(a, b_eq)
    if sol is None:
        raise ValueError("equality system is inconsistent")
    x0, basis = sol
    k = len(basis)
    seen: list[list[Fraction]] = []

    def point(y):
        return [x0[i] + sum(y[c] * basis[c][i] for c in range(k)) for i in range(n)]

    if k == 0:
        if all(x0[i] >= 0 for i in nonneg):
            seen.append(x0)
        return seen
    for sel in itertools.combinations(nonneg, k):
        m = [[basis[c][i] for c in range(k)] for i in sel]
        y = rational.solve_square(m, [-x0[i] for i in sel])
        if y is None:
            continue
        x = point(y)
        if all(x[i] >= 0 for i in nonneg) and x not in seen:
            seen.append(x)
    return seen


def extreme_rays(a_eq, nonneg, tol: float = 1e-9) -> list[np.ndarray]:
    """Extreme rays of the recession cone ``{A x = 0, x_S >= 0}``.

    Assumes the cone is pointed; rays are normalized so the constrained
    coordinates sum to one, which turns them into vertices of a slice.
    """
    a = np.asarray(a_eq, dtype=float)
    n = a.shape[1]
    nonneg = sorted(nonneg)
    lineality = null_space(np.vstack([a, np.eye(n)[nonneg]])) if nonneg else null_space(a)
    if lineality.shape[1]:
        raise ValueError("recession cone contains a line")
    slice_row = np.zeros(n)
    slice_row[nonneg] = 1.0
    a_sl = np.vstack([a, slice_row])
    b_sl = np.zeros(a_sl.shape[0])
    b_sl[-1] = 1.0
    try:
        verts = enumerate_vertices(a_sl, b_sl, nonneg, tol=tol)
    except ValueError:
        return []
    return [v.x for v in verts]
