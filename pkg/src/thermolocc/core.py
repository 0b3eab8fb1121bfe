"""Energy spectra, Gibbs weights and the (thermo)majorization engine.

Population vectors and Gibbs weights are plain 1-d numpy arrays indexed in
ascending energy order.  Zero temperature is represented by ``INF`` and is
handled as the low-temperature limit rather than by exponentiating huge
numbers.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

INF = math.inf

EPS_NORM = 1e-12
EPS_GEOM = 1e-9
EPS_FIX = 1e-9

TOLERANCE_ENV = "THERMOLOCC_TOLERANCE"


def fix_tolerance() -> float:
    """Tolerance for fixed-point checks, overridable through the environment."""
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None or raw == "":
        return EPS_FIX
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{TOLERANCE_ENV} must be positive, got {raw!r}")
    return value


def parse_beta(value) -> float:
    """Accept a non-negative number or the string ``"inf"``."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "+inf"):
            return INF
        value = float(text)
    beta = float(value)
    if math.isnan(beta) or beta < 0:
        raise ValueError(f"inverse temperature must be >= 0 or 'inf', got {value!r}")
    return beta


@dataclass(frozen=True)
class EnergySpectrum:
    """Sorted energy levels of a finite-dimensional Hamiltonian."""

    energies: tuple[float, ...]

    def __post_init__(self):
        values = tuple(sorted(float(e) for e in self.energies))
        if len(values) < 2:
            raise ValueError("an energy spectrum needs at least two levels")
        if not all(math.isfinite(e) for e in values):
            raise ValueError("energies must be finite")
        object.__setattr__(self, "energies", values)

    @classmethod
    def of(cls, values: "Sequence[float] | EnergySpectrum") -> "EnergySpectrum":
        if isinstance(values, EnergySpectrum):
            return values
        return cls(tuple(values))

    @property
    def dim(self) -> int:
        return len(self.energies)

    def __len__(self) -> int:
        return len(self.energies)

    def as_array(self) -> np.ndarray:
        return np.array(self.energies, dtype=float)

    def is_degenerate(self, rtol: float = 1e-12) -> bool:
        e = self.as_array()
        scale = max(1.0, float(np.abs(e).max()))
        return bool(np.any(np.diff(e) <= rtol * scale))


def prob_vector(p, tol: float = EPS_NORM) -> np.ndarray:
    """Validate a population vector, clamping tiny negative entries to zero."""
    arr = np.asarray(p, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValueError("empty probability vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("probability vector has non-finite entries")
    if np.any(arr < -tol):
        raise ValueError(f"probability vector has negative entries: {arr.tolist()}")
    arr = np.where(arr < 0, 0.0, arr)
    if abs(arr.sum() - 1.0) > tol * max(1, arr.size):
        raise ValueError(f"probabilities sum to {float(arr.sum())!r}, not 1")
    return arr


def gibbs_weights(spectrum, beta) -> np.ndarray:
    """Thermal populations exp(-beta E_i)/Z.

    ``beta == INF`` gives the ground-state point mass and requires a
    non-degenerate ground level.
    """
    spec = EnergySpectrum.of(spectrum)
    beta = parse_beta(beta)
    e = spec.as_array()
    d = e.size
    if beta == 0:
        return np.full(d, 1.0 / d)
    if beta == INF:
        if np.isclose(e[1], e[0], rtol=0, atol=1e-12 * max(1.0, abs(e[0]))):
            raise ValueError("degenerate ground state: zero-temperature Gibbs state is not a point mass")
        out = np.zeros(d)
        out[0] = 1.0
        return out
    w = np.exp(-beta * (e - e[0]))
    return w / w.sum()


def is_zero_temperature(gamma) -> bool:
    """True when ``gamma`` is the ground-state point mass of the zero-temperature limit."""
    g = np.asarray(gamma, dtype=float)
    zero = g == 0.0
    if not zero.any():
        return False
    if zero.sum() == g.size - 1 and g[0] > 0:
        return True
    raise ValueError(
        "Gibbs weights underflow to zero on some excited levels; "
        "use beta='inf' for the zero-temperature limit"
    )


def _check_pair(p, gamma):
    p = prob_vector(p)
    gamma = prob_vector(gamma)
    if p.shape != gamma.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {gamma.shape}")
    return p, gamma


def beta_order(p, gamma) -> tuple[int, ...]:
    """Permutation sorting p_i/gamma_i non-increasingly, ties by ascending index.

    At zero temperature the excited levels carrying population have
    unbounded ratio; among them the higher energy comes first, which is the
    ordering approached as beta grows.
    """
    p, gamma = _check_pair(p, gamma)
    d = p.size
    if is_zero_temperature(gamma):
        head = [i for i in range(d - 1, 0, -1) if p[i] > 0]
        rest = [0] + [i for i in range(1, d) if p[i] <= 0]
        rest.sort(key=lambda i: (-(p[i] / gamma[i]) if gamma[i] > 0 else 0.0, i))
        return tuple(head + rest)
    ratios = p / gamma
    return tuple(sorted(range(d), key=lambda i: (-ratios[i], i)))


@dataclass(frozen=True)
class MajorizationCurve:
    """Piecewise-linear concave curve stored by its elbows, starting at (0, 0)."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
            raise ValueError("curve needs matching 1-d elbow coordinates")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def elbows(self) -> list[tuple[float, float]]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    def __call__(self, x: float) -> float:
        return curve_eval(self, x)

    def is_concave(self, tol: float = EPS_GEOM) -> bool:
        dx = np.diff(self.xs)
        dy = np.diff(self.ys)
        if np.any(dx < -tol) or np.any(dy < -tol):
            return False
        flat = dx <= tol
        # a vertical rise is only allowed at x = 0 (zero-temperature curves)
        started = np.cumsum(~flat) > 0
        if np.any(flat & started & (dy > tol)):
            return False
        slopes = dy[~flat] / dx[~flat]
        return bool(np.all(np.diff(slopes) <= tol * max(1.0, float(np.abs(slopes).max(initial=0)))))


def thermo_curve(p, gamma) -> MajorizationCurve:
    """Thermomajorization curve of ``p`` relative to ``gamma``."""
    p, gamma = _check_pair(p, gamma)
    order = list(beta_order(p, gamma))
    xs = np.concatenate([[0.0], np.cumsum(gamma[order])])
    ys = np.concatenate([[0.0], np.cumsum(p[order])])
    # pin the endpoint against rounding drift
    xs[-1] = 1.0
    ys[-1] = 1.0
    return MajorizationCurve(xs, ys)


def lorenz_curve(p) -> MajorizationCurve:
    """Majorization curve: thermo curve against the flat distribution."""
    p = prob_vector(p)
    return thermo_curve(p, np.full(p.size, 1.0 / p.size))


def curve_eval(curve: MajorizationCurve, x: float) -> float:
    """Evaluate a curve at ``x`` in [0, 1] by linear interpolation between elbows."""
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    xs, ys = curve.xs, curve.ys
    i = int(np.searchsorted(xs, x, side="left"))
    if i >= xs.size:
        return float(ys[-1])
    if xs[i] == x:
        # top of any vertical run at x
        j = int(np.searchsorted(xs, x, side="right")) - 1
        return float(ys[j])
    x0, y0 = xs[i - 1], ys[i - 1]
    x1, y1 = xs[i], ys[i]
    return float(y0 + (y1 - y0) * (x - x0) / (x1 - x0))


def curve_dominates(upper: MajorizationCurve, lower: MajorizationCurve, tol: float = EPS_GEOM) -> bool:
    """Pointwise ``upper >= lower`` checked on the union of elbow abscissae."""
    grid = np.union1d(upper.xs, lower.xs)
    grid = grid[(grid > 0) & (grid <= 1)]
    return all(curve_eval(upper, x) >= curve_eval(lower, x) - tol for x in grid)


def majorizes(p, q, tol: float = EPS_GEOM) -> bool:
    """Partial sums of sorted-descending ``p`` dominate those of ``q``."""
    p = np.sort(prob_vector(p))[::-1]
    q = np.sort(prob_vector(q))[::-1]
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    return bool(np.all(np.cumsum(p) >= np.cumsum(q) - tol))


def ut_majorizes(p, q, tol: float = EPS_GEOM) -> bool:
    """Zero-temperature ordering: a cooling map can send ``p`` to ``q``.

    Indices are energy-ordered (0 = ground) and never re-sorted.  Cooling
    only moves population downwards, so ``p`` dominates ``q`` when every
    upper tail sum of ``p`` is at least the corresponding tail of ``q``.
    """
    p = prob_vector(p)
    q = prob_vector(q)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    tail_p = np.cumsum(p[::-1])
    tail_q = np.cumsum(q[::-1])
    return bool(np.all(tail_p >= tail_q - tol))


def thermo_majorizes(p, q, gamma, tol: float = EPS_GEOM) -> bool:
    """Whether the thermomajorization curve of ``p`` lies above that of ``q``."""
    p, gamma = _check_pair(p, gamma)
    q = prob_vector(q)
    if q.shape != p.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    if is_zero_temperature(gamma):
        return ut_majorizes(p, q, tol)
    return curve_dominates(thermo_curve(p, gamma), thermo_curve(q, gamma), tol)


def random_distribution(rng: np.random.Generator, d: int, alpha: float = 1.0) -> np.ndarray:
    """Dirichlet sample; the flat-prior default covers the simplex uniformly."""
    return rng.dirichlet(np.full(d, alpha))


def sharp(d: int, index: int) -> np.ndarray:
    out = np.zeros(d)
    out[index] = 1.0
    return out
