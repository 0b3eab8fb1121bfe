"""Small exact-arithmetic kernels over ``fractions.Fraction``.

Only meant for the low-dimensional golden checks (a few dozen unknowns):
row reduction, null spaces and a phase-one simplex for feasibility.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def frac(x) -> Fraction:
    """Exact conversion; floats keep their full binary value."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


def frac_matrix(rows) -> list[list[Fraction]]:
    return [[frac(v) for v in row] for row in rows]


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    n_cols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        lead = m[r][c]
        m[r] = [v / lead for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def solve_affine(a_rows, b) -> tuple[list[Fraction], list[list[Fraction]]] | None:
    """Particular solution and null-space basis of ``A x = b``; None if inconsistent."""
    n = len(a_rows[0])
    aug = [list(r) + [frac(v)] for r, v in zip(a_rows, b)]
    red, pivots = rref(aug)
    if n in pivots:
        return None
    x0 = [Fraction(0)] * n
    for row, c in zip(red, pivots):
        x0[c] = row[n]
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, c in zip(red, pivots):
            v[c] = -row[f]
        basis.append(v)
    return x0, basis


def solve_square(a_rows, b) -> list[Fraction] | None:
    """Unique solution of a square system, or None when singular."""
    n = len(a_rows)
    aug = [list(r) + [frac(v)] for r, v in zip(a_rows, b)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return [row[n] for row in red]


def feasible_point(a_rows, b) -> list[Fraction] | None:
    """Some ``x >= 0`` with ``A x = b`` via phase-one simplex (Bland's rule), or None."""
    a = frac_matrix(a_rows)
    b = [frac(v) for v in b]
    m = len(a)
    n = len(a[0]) if m else 0
    for i in range(m):
        if b[i] < 0:
            a[i] = [-v for v in a[i]]
            b[i] = -b[i]
    # tableau columns: n originals, m artificials, rhs
    tab = [a[i] + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    width = n + m
    cost = [Fraction(0)] * n + [Fraction(1)] * m
    while True:
        # reduced costs for the phase-one objective
        reduced = []
        for j in range(width):
            rc = cost[j] - sum(cost[basis[i]] * tab[i][j] for i in range(m))
            reduced.append(rc)
        entering = next((j for j in range(width) if reduced[j] < 0), None)
        if entering is None:
            break
        best = None
        for i in range(m):
            if tab[i][entering] > 0:
                ratio = tab[i][width] / tab[i][entering]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # unbounded cannot happen for a phase-one objective bounded below
            break
        _, row = best
        lead = tab[row][entering]
        tab[row] = [v / lead for v in tab[row]]
        for i in range(m):
            if i != row and tab[i][entering] != 0:
                f = tab[i][entering]
                tab[i] = [x - f * y for x, y in zip(tab[i], tab[row])]
        basis[row] = entering
    x = [Fraction(0)] * width
    for i, j in enumerate(basis):
        x[j] = tab[i][width]
    if any(x[n + i] != 0 for i in range(m)):
        return None
    return x[:n]
