"""CHSH values under thermal restrictions and modes of coherence.

Expectations on the maximally entangled state use
<Psi|A (x) B|Psi> = Tr(A B^T) / D, so no D^2 x D^2 matrix is ever built.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import EnergySpectrum

MAX_DIM = 4096
ENERGY_RTOL = 1e-9
SQRT2 = math.sqrt(2.0)

_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_X = np.array([[0.0, 1.0], [1.0, 0.0]])
# qubit settings; B's pair is ordered so the +,+,-,+ combination reaches 2 sqrt 2
QUBIT_SETTINGS = {
    ("A", 0): _Z,
    ("A", 1): _X,
    ("B", 0): (_Z - _X) / SQRT2,
    ("B", 1): (_Z + _X) / SQRT2,
}


@dataclass(frozen=True)
class Block:
    energy: float
    indices: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class DegeneracyProfile:
    blocks: tuple[Block, ...]
    total: int

    @property
    def d_deg(self) -> int:
        return sum(b.dim for b in self.blocks if b.dim >= 2)

    @property
    def d_ndeg(self) -> int:
        return sum(1 for b in self.blocks if b.dim == 1)

    def to_json(self) -> dict:
        return {
            "D_deg": self.d_deg,
            "D_ndeg": self.d_ndeg,
            "blocks": [{"energy": b.energy, "dim": b.dim, "indices": list(b.indices)} for b in self.blocks],
        }


def degeneracy_profile(spectrum, n: int, rtol: float = ENERGY_RTOL) -> DegeneracyProfile:
    """Group the d**n summed energies of n copies into degenerate blocks."""
    e = EnergySpectrum.of(spectrum).as_array()
    d = e.size
    if n < 1:
        raise ValueError("number of copies must be at least 1")
    total = d ** n
    if total > MAX_DIM:
        raise ValueError(f"d**n = {total} exceeds the cap of {MAX_DIM}")
    sums = np.zeros(1)
    for _ in range(n):
        sums = (sums[:, None] + e[None, :]).reshape(-1)
    spread = float(sums.max() - sums.min()) or 1.0
    tol = rtol * spread
    order = np.argsort(sums, kind="stable")
    blocks: list[list[int]] = []
    for idx in order:
        if blocks and abs(sums[idx] - sums[blocks[-1][0]]) <= tol:
            blocks[-1].append(int(idx))
        else:
            blocks.append([int(idx)])
    return DegeneracyProfile(
        tuple(Block(float(sums[b[0]]), tuple(sorted(b))) for b in blocks), total)


def ltocc_chsh_bound(profile: DegeneracyProfile) -> float:
    return 2.0 * (profile.d_ndeg + SQRT2 * profile.d_deg) / profile.total


def build_observables(profile: DegeneracyProfile, setting: int, party: str) -> np.ndarray:
    """Block-diagonal +-1 observable: identity off the degenerate blocks, qubit settings on pairs."""
    if (party, setting) not in QUBIT_SETTINGS:
        raise ValueError("party must be 'A' or 'B' and setting 0 or 1")
    qubit = QUBIT_SETTINGS[(party, setting)]
    obs = np.zeros((profile.total, profile.total))
    for block in profile.blocks:
        idx = block.indices
        if block.dim == 1:
            obs[idx[0], idx[0]] = 1.0
            continue
        for a, b in zip(idx[0::2], idx[1::2]):
            obs[np.ix_([a, b], [a, b])] = qubit
        if block.dim % 2:
            obs[idx[-1], idx[-1]] = 1.0  # unpaired level keeps outcome +1
    return obs


def _check_hermitian(m, name):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square")
    if np.abs(m - m.conj().T).max() > 1e-9:
        raise ValueError(f"{name} is not Hermitian")
    return m


def entangled_expectation(a, b) -> complex:
    a = np.asarray(a)
    return complex(np.trace(a @ np.asarray(b).T) / a.shape[0])


def chsh_value(a0, a1, b0, b1, dim_local: int | None = None) -> float:
    """|<A0B0> + <A0B1> - <A1B0> + <A1B1>| on the maximally entangled state."""
    mats = [_check_hermitian(m, n) for m, n in zip((a0, a1, b0, b1), ("a0", "a1", "b0", "b1"))]
    dim = mats[0].shape[0]
    if dim_local is not None and dim_local != dim:
        raise ValueError("dimension mismatch")
    a0, a1, b0, b1 = mats
    val = (entangled_expectation(a0, b0) + entangled_expectation(a0, b1)
           - entangled_expectation(a1, b0) + entangled_expectation(a1, b1))
    return abs(val)


@dataclass(frozen=True)
class ChshReport:
    bound: float
    attained: float
    profile: DegeneracyProfile

    def to_json(self) -> dict:
        out = {"bound": self.bound, "attained": self.attained}
        out.update(self.profile.to_json())
        return out


def attain(spectrum, n: int) -> ChshReport:
    """Bound and the value reached by the constructed observables."""
    prof = degeneracy_profile(spectrum, n)
    obs = [build_observables(prof, s, p) for p in ("A", "B") for s in (0, 1)]
    return ChshReport(ltocc_chsh_bound(prof), chsh_value(*obs), prof)


# -- modes of coherence --------------------------------------------------------

@dataclass
class ModeDecomposition:
    components: dict[tuple[float, float], np.ndarray] = field(default_factory=dict)

    def total(self) -> np.ndarray:
        return sum(self.components.values())

    def joint(self) -> dict[float, np.ndarray]:
        """Components regrouped by omega_A + omega_B."""
        out: dict[float, np.ndarray] = {}
        for (wa, wb), m in self.components.items():
            key = _round_freq(wa + wb)
            out[key] = out.get(key, 0) + m
        return out


def _round_freq(w: float) -> float:
    return round(float(w), 9) + 0.0


def mode_labels(spec_a, spec_b) -> np.ndarray:
    """(D, D, 2) array of (omega_A, omega_B) for every matrix entry, basis index i*d_B + j."""
    ea = EnergySpectrum.of(spec_a).as_array()
    eb = EnergySpectrum.of(spec_b).as_array()
    d_a, d_b = ea.size, eb.size
    la = np.repeat(ea, d_b)
    lb = np.tile(eb, d_a)
    return np.stack([la[:, None] - la[None, :], lb[:, None] - lb[None, :]], axis=-1)


def mode_decompose(rho, spec_a, spec_b) -> ModeDecomposition:
    rho = np.asarray(rho, dtype=complex)
    labels = mode_labels(spec_a, spec_b)
    if rho.shape != labels.shape[:2]:
        raise ValueError(f"matrix shape {rho.shape} does not match d_A*d_B = {labels.shape[0]}")
    out = ModeDecomposition()
    keys = {(_round_freq(a), _round_freq(b)) for a, b in labels.reshape(-1, 2)}
    for key in sorted(keys):
        mask = (np.abs(labels[..., 0] - key[0]) <= 1e-9) & (np.abs(labels[..., 1] - key[1]) <= 1e-9)
        out.components[key] = np.where(mask, rho, 0)
    return out


def channel_action(channel: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """Tabulate a linear map on its matrix units: action[r, c] = channel(|r><c|)."""
    action = np.zeros((dim, dim, dim, dim), dtype=complex)
    for r, c in itertools.product(range(dim), repeat=2):
        unit = np.zeros((dim, dim), dtype=complex)
        unit[r, c] = 1.0
        action[r, c] = channel(unit)
    return action


def mode_preservation_check(action, spec_a, spec_b, tol: float = 1e-9) -> bool:
    """Whether every matrix unit is mapped into its own mode."""
    labels = mode_labels(spec_a, spec_b)
    dim = labels.shape[0]
    action = np.asarray(action)
    if action.shape != (dim, dim, dim, dim):
        raise ValueError("channel action must give the image of every matrix unit")
    for r, c in itertools.product(range(dim), repeat=2):
        img = action[r, c]
        off = np.abs(labels - labels[r, c]).max(axis=-1) > 1e-9
        if np.abs(img[off]).max(initial=0.0) > tol:
            return False
    return True


def incoherent_round_channel(d_a: int, d_b: int, bank, post=None, phases=None):
    """A measures its energy, B responds; returns the channel as a callable.

    ``bank[c]`` is B's Gibbs-preserving matrix given outcome c, applied to
    B's populations after dephasing; ``phases[c]`` optionally replaces it
    by an energy-diagonal unitary that keeps B's coherences.
    """
    def channel(rho):
        rho = np.asarray(rho, dtype=complex).reshape(d_a, d_b, d_a, d_b)
        out = np.zeros_like(rho)
        for c in range(d_a):
            block = rho[c, :, c, :]
            if phases is not None:
                u = np.diag(np.exp(1j * np.asarray(phases[c], dtype=float)))
                new = u @ block @ u.conj().T
            else:
                new = np.diag(np.asarray(bank[c]) @ np.diag(block))
            if post is None:
                out[c, :, c, :] += new
            else:
                for i in range(d_a):
                    out[i, :, i, :] += post[i, c] * new
        return out.reshape(d_a * d_b, d_a * d_b)

    return channel


def hadamard_channel(d_a: int, d_b: int):
    """Conjugation by a Hadamard on A's first two levels; mixes modes."""
    h = np.eye(d_a, dtype=complex)
    h[:2, :2] = np.array([[1, 1], [1, -1]]) / SQRT2
    u = np.kron(h, np.eye(d_b))

    def channel(rho):
        return u @ rho @ u.conj().T

    return channel
