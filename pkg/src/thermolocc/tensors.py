"""Stochastic rank-3 tensors: thermal, bithermal, tristochastic and bicooling.

``t[i, j, k]`` is the probability of output ``i`` given inputs ``j`` (first
slot) and ``k`` (second slot).  A tensor is thermal in the first slot when
every layer ``t[:, :, k]`` is Gibbs-preserving, and in the second slot when
every layer ``t[:, j, :]`` is.
"""
from __future__ import annotations

import functools
import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import polytope, rational
from .core import EPS_NORM, INF, EnergySpectrum, is_zero_temperature, parse_beta
from .gibbs_maps import extremal_cooling_matrices, is_gibbs_preserving

SLOTS = ("first", "second")
TANGENT_TARGET = 67


def stochastic_tensor(t, tol: float = EPS_NORM) -> np.ndarray:
    arr = np.array(t, dtype=float)
    if arr.ndim != 3 or len(set(arr.shape)) != 1:
        raise ValueError(f"expected a d x d x d tensor, got shape {arr.shape}")
    if np.any(arr < -tol):
        raise ValueError("tensor has negative entries")
    arr[arr < 0] = 0.0
    if np.any(np.abs(arr.sum(axis=0) - 1.0) > tol * arr.shape[0]):
        raise ValueError("hypercolumns do not sum to 1")
    return arr


def apply_tensor(t, p, q) -> np.ndarray:
    """r_i = sum_jk t[i, j, k] p_j q_k."""
    return np.einsum("ijk,j,k->i", np.asarray(t, dtype=float), np.asarray(p, dtype=float),
                     np.asarray(q, dtype=float))


def layers(t, slot: str) -> list[np.ndarray]:
    """Matrices a thermal condition in ``slot`` is imposed on."""
    arr = np.asarray(t)
    if slot == "first":
        return [arr[:, :, k] for k in range(arr.shape[2])]
    if slot == "second":
        return [arr[:, j, :] for j in range(arr.shape[1])]
    raise ValueError(f"slot must be one of {SLOTS}, got {slot!r}")


def is_thermal(t, gamma, slot: str = "first", tol: float | None = None) -> bool:
    arr = np.asarray(t, dtype=float)
    if arr.shape != (len(gamma),) * 3:
        raise ValueError("dimension mismatch")
    return all(is_gibbs_preserving(layer, gamma, tol) for layer in layers(arr, slot))


def is_bithermal(t, gamma, tol: float | None = None) -> bool:
    return is_thermal(t, gamma, "first", tol) and is_thermal(t, gamma, "second", tol)


def is_tristochastic(t, tol: float | None = None) -> bool:
    d = np.asarray(t).shape[0]
    return is_bithermal(t, np.full(d, 1.0 / d), tol)


def constant_layer_tensor(m, slot: str = "first") -> np.ndarray:
    """Tensor whose every layer in ``slot`` equals ``m``."""
    m = np.asarray(m, dtype=float)
    d = m.shape[0]
    if slot == "first":
        return np.repeat(m[:, :, None], d, axis=2)
    return np.repeat(m[:, None, :], d, axis=1)


def permutation_tensor(d: int = 3) -> np.ndarray:
    """Tristochastic 0/1 tensor with t[i, j, k] = 1 iff k = j + i (mod d)."""
    t = np.zeros((d, d, d))
    for i, j in itertools.product(range(d), repeat=2):
        t[i, j, (j + i) % d] = 1.0
    return t


def convolution_tensor(d: int) -> np.ndarray:
    """t[i, j, k] = 1 iff i = j + k (mod d)."""
    t = np.zeros((d, d, d))
    for j, k in itertools.product(range(d), repeat=2):
        t[(j + k) % d, j, k] = 1.0
    return t


def strange_tensor() -> np.ndarray:
    """A d=3 tristochastic vertex that is not a permutation tensor."""
    h = 0.5
    return np.array([
        [[0, h, h], [h, h, 0], [h, 0, h]],
        [[h, h, 0], [0, h, h], [h, 0, h]],
        [[h, 0, h], [h, 0, h], [0, 1, 0]],
    ])


# -- d = 2 extremal bithermal tensors ---------------------------------------

def bithermal_pair(g):
    """The two d=2 extremal bithermal tensors as a function of g = gamma_1/gamma_0.

    Works on any number type (floats, ``Fraction``); returns object arrays
    for exact inputs.
    """
    one = g * 0 + 1
    t1 = [[[one - g, one], [one, 0 * one]],
          [[g, 0 * one], [0 * one, one]]]
    h = g * (one - g)
    t2 = [[[one - h, one - g], [one - g, one]],
          [[h, g], [g, 0 * one]]]
    dtype = float if isinstance(g, float) else object
    return np.array(t1, dtype=dtype), np.array(t2, dtype=dtype)


def extremal_bithermal_d2(gamma) -> tuple[np.ndarray, np.ndarray]:
    g_vec = np.asarray(gamma, dtype=float)
    if g_vec.size != 2:
        raise ValueError("explicit extremal bithermal tensors are given for d=2 only")
    return bithermal_pair(float(g_vec[1] / g_vec[0]))


def swap_output(s, t):
    """sum_l s[i, l] t[l, j, k]: a map applied after the tensor."""
    return _contract(s, t, "output")


def swap_first(t, s):
    """sum_l t[i, l, k] s[l, j]: a map applied to the first input beforehand."""
    return _contract(s, t, "first")


def swap_second(t, s):
    """sum_l t[i, j, l] s[l, k]: a map applied to the second input beforehand."""
    return _contract(s, t, "second")


def _contract(s, t, where):
    # plain loops so Fraction entries stay exact
    s = np.asarray(s, dtype=object)
    t = np.asarray(t, dtype=object)
    d = t.shape[0]
    out = np.empty_like(t)
    for i, j, k in itertools.product(range(d), repeat=3):
        if where == "output":
            out[i, j, k] = sum(s[i, l] * t[l, j, k] for l in range(d))
        elif where == "first":
            out[i, j, k] = sum(t[i, l, k] * s[l, j] for l in range(d))
        else:
            out[i, j, k] = sum(t[i, j, l] * s[l, k] for l in range(d))
    return out


# -- recursive family and bicooling ------------------------------------------

def extremal_family(spectrum, beta) -> np.ndarray:
    """Symmetric extremal bithermal tensor built level by level from the ground up.

    For m = min(j, k): if j != k the output is sharp at m; if j == k == m
    the hypercolumn keeps 1 - sum_{i>m} g_{i,m} at m and sends g_{i,m} to
    each higher level i, where g_{i,m} = gamma_i / gamma_m.
    """
    spec = EnergySpectrum.of(spectrum)
    beta = parse_beta(beta)
    e = spec.as_array()
    d = e.size
    if beta == INF:
        ratio = np.zeros((d, d))
    else:
        ratio = np.exp(-beta * (e[:, None] - e[None, :]))  # ratio[i, m] = g_{i,m}
    for m in range(d - 1):
        total = ratio[m + 1:, m].sum()
        if total > 1 + EPS_NORM:
            raise ValueError(
                f"temperature too high for this spectrum: sum_(i>{m}) g_(i,{m}) = {total:.6g} > 1"
            )
    t = np.zeros((d, d, d))
    for j, k in itertools.product(range(d), repeat=2):
        m = min(j, k)
        if j != k:
            t[m, j, k] = 1.0
        else:
            t[m + 1:, j, k] = ratio[m + 1:, m]
            t[m, j, k] = 1.0 - ratio[m + 1:, m].sum()
    return t


def bicooling_extremals(d: int) -> list[np.ndarray]:
    """All 0/1 stochastic tensors supported on i <= min(j, k)."""
    if d < 1:
        raise ValueError("dimension must be positive")
    if d > 4:
        raise ValueError("dimension too large for exhaustive enumeration (max 4)")
    cols = list(itertools.product(range(d), repeat=2))
    out = []
    for rows in itertools.product(*[range(min(j, k) + 1) for j, k in cols]):
        t = np.zeros((d, d, d))
        for (j, k), i in zip(cols, rows):
            t[i, j, k] = 1.0
        out.append(t)
    return out


# -- polytope enumeration -----------------------------------------------------

def _flat(i, j, k, d):
    return (i * d + j) * d + k


def gibbs_matrix_system(gamma):
    """Equalities (A, b) on the d*d entries (row-major) of a Gibbs-preserving matrix."""
    g = list(gamma)
    d = len(g)
    rows, rhs = [], []
    for j in range(d):
        row = [0] * (d * d)
        for i in range(d):
            row[i * d + j] = 1
        rows.append(row)
        rhs.append(1)
    for i in range(d):
        row = [0] * (d * d)
        for j in range(d):
            row[i * d + j] = g[j]
        rows.append(row)
        rhs.append(g[i])
    return rows, rhs


def gibbs_matrix_vertices(gamma) -> list[np.ndarray]:
    """Extremal Gibbs-preserving matrices by basic-feasible-solution enumeration."""
    g = np.asarray(gamma, dtype=float)
    d = g.size
    if is_zero_temperature(g):
        return extremal_cooling_matrices(d)
    rows, rhs = gibbs_matrix_system(g)
    return [v.x.reshape(d, d) for v in polytope.enumerate_vertices(rows, rhs)]


def enumerate_thermal_vertices(gamma, slot: str = "first") -> list[np.ndarray]:
    """Tensors whose layers in ``slot`` are all extremal Gibbs-preserving matrices."""
    d = len(gamma)
    if d > 3:
        raise ValueError("thermal vertex enumeration is limited to d <= 3")
    if slot not in SLOTS:
        raise ValueError(f"slot must be one of {SLOTS}")
    mats = gibbs_matrix_vertices(gamma)
    out = []
    for combo in itertools.product(mats, repeat=d):
        t = np.stack(combo, axis=2) if slot == "first" else np.stack(combo, axis=1)
        out.append(t)
    return out


def bithermal_system(gamma):
    """(A, b, free) describing bithermal tensors over the d**3 flattened entries.

    At zero temperature the Gibbs equalities degenerate into the bicooling
    support restriction; ``free`` lists the entries allowed to be nonzero.
    """
    g = list(gamma)
    d = len(g)
    zero_t = is_zero_temperature(np.asarray(gamma, dtype=float))
    n = d ** 3
    rows, rhs = [], []
    for j, k in itertools.product(range(d), repeat=2):
        row = [0] * n
        for i in range(d):
            row[_flat(i, j, k, d)] = 1
        rows.append(row)
        rhs.append(1)
    free = list(range(n))
    if zero_t:
        free = [_flat(i, j, k, d) for i, j, k in itertools.product(range(d), repeat=3) if i <= min(j, k)]
        banned = sorted(set(range(n)) - set(free))
        for idx in banned:
            row = [0] * n
            row[idx] = 1
            rows.append(row)
            rhs.append(0)
        return rows, rhs, free
    for i, k in itertools.product(range(d), repeat=2):
        row = [0] * n
        for j in range(d):
            row[_flat(i, j, k, d)] = g[j]
        rows.append(row)
        rhs.append(g[i])
    for i, j in itertools.product(range(d), repeat=2):
        row = [0] * n
        for k in range(d):
            row[_flat(i, j, k, d)] = g[k]
        rows.append(row)
        rhs.append(g[i])
    return rows, rhs, free


def enumerate_bithermal_vertices(gamma, exact: bool = False) -> list[np.ndarray]:
    """Vertices of the bithermal polytope for d <= 3.

    With ``exact=True`` the entries of ``gamma`` are taken as exact
    rationals (pass ``Fraction`` values for golden results) and the
    returned tensors are object arrays of ``Fraction``.
    """
    d = len(gamma)
    if d > 3:
        raise ValueError("bithermal vertex enumeration is limited to d <= 3")
    if exact:
        g = [rational.frac(v) for v in gamma]
        total = sum(g)
        g = [v / total for v in g]
        rows, rhs, _ = bithermal_system(g)
        verts = polytope.enumerate_vertices_exact(rows, rhs)
        return [np.array(v, dtype=object).reshape(d, d, d) for v in verts]
    key = tuple(float(v) for v in gamma)
    return [t.copy() for t in _bithermal_vertices_float(key)]


@functools.lru_cache(maxsize=16)
def _bithermal_vertices_float(gamma: tuple[float, ...]) -> tuple[np.ndarray, ...]:
    # the d=3 search visits ~2e6 supports, so repeated calls are cached
    d = len(gamma)
    rows, rhs, _ = bithermal_system(gamma)
    return tuple(v.x.reshape(d, d, d) for v in polytope.enumerate_vertices(rows, rhs))


def same_up_to_relabeling(a, b, tol: float = 1e-9) -> bool:
    """Equality up to relabeling each index by a permutation and swapping the two inputs.

    Relabelings are applied independently to output and both inputs, which
    preserves the tristochastic polytope.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = a.shape[0]
    perms = list(itertools.permutations(range(d)))
    for swap in (False, True):
        bb = b.transpose(0, 2, 1) if swap else b
        for pi in perms:
            for pj in perms:
                for pk in perms:
                    if np.allclose(a, bb[np.ix_(pi, pj, pk)], atol=tol):
                        return True
    return False


# -- high-temperature tangent directions -------------------------------------

@dataclass
class TangentResult:
    """First-order directions around a tristochastic base tensor.

    ``directions`` are the vertices of the (affine) set of admissible
    first-order terms; ``rays`` are extreme rays of its recession cone,
    i.e. directions along which first-order terms can be scaled freely.
    """

    directions: list[np.ndarray]
    rays: list[np.ndarray]
    certificates: list[tuple[tuple[int, ...], int]]
    report: dict = field(default_factory=dict)


def signature(a, tol: float = 1e-9) -> str:
    """Sign pattern of a flattened tensor, one of '+', '-', '0' per entry."""
    flat = np.asarray(a, dtype=float).reshape(-1)
    return "".join("+" if v > tol else "-" if v < -tol else "0" for v in flat)


def tangent_system(base, spectrum):
    """Equalities and sign-constrained entries for first-order terms at ``base``."""
    base = np.asarray(base, dtype=float)
    d = base.shape[0]
    e = EnergySpectrum.of(spectrum).as_array()
    if e.size != d:
        raise ValueError("spectrum dimension does not match the tensor")
    n = d ** 3
    rows, rhs = [], []
    for j, k in itertools.product(range(d), repeat=2):
        row = np.zeros(n)
        for i in range(d):
            row[_flat(i, j, k, d)] = 1
        rows.append(row)
        rhs.append(0.0)
    for i, k in itertools.product(range(d), repeat=2):
        row = np.zeros(n)
        for j in range(d):
            row[_flat(i, j, k, d)] = 1
        rows.append(row)
        rhs.append(float(base[i, :, k] @ e - e[i]))
    for i, j in itertools.product(range(d), repeat=2):
        row = np.zeros(n)
        for k in range(d):
            row[_flat(i, j, k, d)] = 1
        rows.append(row)
        rhs.append(float(base[i, j, :] @ e - e[i]))
    nonneg = [int(x) for x in np.flatnonzero(np.abs(base.reshape(-1)) <= 1e-12)]
    return np.array(rows), np.array(rhs), nonneg


def tangent_directions(base, spectrum, target: int | None = TANGENT_TARGET) -> TangentResult:
    """Extremal first-order corrections ``A`` with ``base + beta*A`` bithermal to O(beta).

    The admissible ``A`` form a polyhedron cut out by marginal equalities
    and by ``A >= 0`` wherever ``base`` vanishes.  Its vertices saturate the
    largest sets of sign constraints and are the returned directions.  The
    report compares the count against ``target`` and lists the sign
    signatures of every direction.
    """
    base = np.asarray(base, dtype=float)
    d = base.shape[0]
    if d > 3:
        raise ValueError("tangent enumeration is limited to d <= 3")
    if not is_tristochastic(base):
        raise ValueError("base tensor must be tristochastic")
    rows, rhs, nonneg = tangent_system(base, spectrum)
    verts = polytope.enumerate_vertices(rows, rhs, nonneg)
    verts.sort(key=lambda v: signature(v.x))
    try:
        rays = polytope.extreme_rays(rows, nonneg)
    except ValueError:
        rays = []
    directions = [v.x.reshape(d, d, d) for v in verts]
    saturation = Counter(len(v.active) for v in verts)
    report = {
        "found": len(directions),
        "target": target,
        "matches_target": target is None or len(directions) == target,
        "convention": "vertices of the first-order polyhedron (equalities + sign constraints where the base vanishes)",
        "dimension": int(len(rows[0]) - np.linalg.matrix_rank(rows)),
        "sign_constraints": len(nonneg),
        "saturation_histogram": {str(k): saturation[k] for k in sorted(saturation)},
        "recession_rays": len(rays),
        "signatures": [signature(v.x) for v in verts],
    }
    return TangentResult(directions, [r.reshape(d, d, d) for r in rays],
                         [(v.active, v.rank) for v in verts], report)


def first_order_term(t_of_beta, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference derivative at beta = 0 of a tensor-valued function."""
    return (np.asarray(t_of_beta(h)) - np.asarray(t_of_beta(-h))) / (2 * h)


# -- serialization -------------------------------------------------------------

def tensor_to_json(t) -> dict:
    arr = np.asarray(t, dtype=float)
    return {"d": int(arr.shape[0]), "entries": arr.tolist()}


def tensor_from_json(obj) -> np.ndarray:
    if isinstance(obj, str):
        obj = json.loads(obj)
    arr = np.array(obj["entries"], dtype=float)
    d = int(obj["d"])
    if arr.shape != (d, d, d):
        raise ValueError(f"entries have shape {arr.shape}, expected {(d, d, d)}")
    return stochastic_tensor(arr)


def format_layers(t, digits: int = 4) -> str:
    """Side-by-side layers (t[0,j,k] | t[1,j,k] | ...), rows j and columns k."""
    arr = np.asarray(t)
    d = arr.shape[0]

    def cell(v):
        if isinstance(v, Fraction):
            return str(v)
        return f"{float(v):.{digits}g}"

    blocks = [[[cell(arr[i, j, k]) for k in range(d)] for j in range(d)] for i in range(d)]
    width = max(len(c) for b in blocks for r in b for c in r)
    lines = []
    for j in range(d):
        parts = [" ".join(c.rjust(width) for c in blocks[i][j]) for i in range(d)]
        lines.append(" | ".join(parts))
    return "\n".join(lines)

