"""Thermal approximants of two-bit logic gates.

Basis index is 2 * a + b for bits (a, b); matrices are column-stochastic.
"""
from __future__ import annotations

import numpy as np


def _check_g(name: str, g: float) -> float:
    g = float(g)
    if not 0.0 <= g <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {g}")
    return g


def thermal_cnot(g_b: float) -> np.ndarray:
    """A controls, B is the target; the flip is replaced by B's thermal swap."""
    g_b = _check_g("g_b", g_b)
    m = np.eye(4)
    m[2:, 2:] = [[1.0 - g_b, 1.0], [g_b, 0.0]]
    return m


def thermal_cnot_ba(g_a: float) -> np.ndarray:
    """B controls, A is the target."""
    g_a = _check_g("g_a", g_a)
    m = np.zeros((4, 4))
    m[0, 0] = m[2, 2] = 1.0
    m[1, 1] = 1.0 - g_a
    m[1, 3] = 1.0
    m[3, 1] = g_a
    return m


def thermal_swap_gate(g_a: float, g_b: float, order: str = "A") -> np.ndarray:
    """Three alternating thermal CNOTs; ``order='A'`` starts and ends with A controlling."""
    ab, ba = thermal_cnot(g_b), thermal_cnot_ba(g_a)
    if order == "A":
        return ab @ ba @ ab
    if order == "B":
        return ba @ ab @ ba
    raise ValueError("order must be 'A' or 'B'")


def classical_cnot() -> np.ndarray:
    return thermal_cnot(1.0)


def classical_swap() -> np.ndarray:
    m = np.zeros((4, 4))
    for a in range(2):
        for b in range(2):
            m[2 * b + a, 2 * a + b] = 1.0
    return m


def tv_distance(m1, m2) -> float:
    """Half the entrywise l1 distance."""
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    if m1.shape != m2.shape:
        raise ValueError(f"shape mismatch: {m1.shape} vs {m2.shape}")
    return float(0.5 * np.abs(m1 - m2).sum())
