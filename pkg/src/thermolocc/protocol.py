"""Simulation of LTOCC protocols on energy-incoherent bipartite states.

A round has one party measure its energy; the other party applies a
Gibbs-preserving map chosen from a bank keyed by the measurement history,
and the measurer may post-process with a map chosen by the earlier
retained history.  Retained outcomes become explicit extra axes of the
joint array ``r[i, j, m_1, ..., m_a]`` and are traced out at the end.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import linprog

from .core import EPS_NORM, EnergySpectrum, fix_tolerance, gibbs_weights, parse_beta
from .gibbs_maps import is_gibbs_preserving
from .tensors import is_thermal

PARTIES = ("A", "B")


@dataclass(frozen=True)
class BipartiteSetup:
    spec_a: EnergySpectrum
    spec_b: EnergySpectrum
    beta_a: float
    beta_b: float

    def __post_init__(self):
        object.__setattr__(self, "spec_a", EnergySpectrum.of(self.spec_a))
        object.__setattr__(self, "spec_b", EnergySpectrum.of(self.spec_b))
        object.__setattr__(self, "beta_a", parse_beta(self.beta_a))
        object.__setattr__(self, "beta_b", parse_beta(self.beta_b))

    @property
    def d_a(self) -> int:
        return self.spec_a.dim

    @property
    def d_b(self) -> int:
        return self.spec_b.dim

    @property
    def gamma_a(self) -> np.ndarray:
        return gibbs_weights(self.spec_a, self.beta_a)

    @property
    def gamma_b(self) -> np.ndarray:
        return gibbs_weights(self.spec_b, self.beta_b)

    @property
    def gamma_joint(self) -> np.ndarray:
        return np.outer(self.gamma_a, self.gamma_b)

    def dim(self, party: str) -> int:
        return self.d_a if party == "A" else self.d_b

    def gamma(self, party: str) -> np.ndarray:
        return self.gamma_a if party == "A" else self.gamma_b


def other(party: str) -> str:
    return "B" if party == "A" else "A"


def common_temperature(setup: BipartiteSetup) -> tuple[float, np.ndarray, np.ndarray]:
    """Rescale both spectra to a single inverse temperature sqrt(beta_A beta_B).

    The product of local Gibbs states is then the Gibbs state of the summed
    rescaled Hamiltonian.
    """
    ba, bb = setup.beta_a, setup.beta_b
    if not (0 < ba < math.inf and 0 < bb < math.inf):
        raise ValueError("rescaling needs finite, positive inverse temperatures")
    beta = math.sqrt(ba * bb)
    return beta, setup.spec_a.as_array() * (ba / beta), setup.spec_b.as_array() * (bb / beta)


def _as_key(key) -> tuple[int, ...]:
    if isinstance(key, tuple):
        return tuple(int(k) for k in key)
    if isinstance(key, (int, np.integer)):
        return (int(key),)
    if isinstance(key, str):
        text = key.strip().strip("[]()")
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    return tuple(int(k) for k in key)


@dataclass(frozen=True, eq=False)
class Round:
    """One measurement-and-response round.

    ``bank`` maps (retained history + current outcome) to the matrix the
    non-measuring party applies; ``post`` is the measurer's own map, either
    a single matrix or a mapping keyed by the retained history alone.
    """

    measurer: str
    bank: Mapping
    post: object = None
    retain: bool = False

    def __post_init__(self):
        if self.measurer not in PARTIES:
            raise ValueError(f"measurer must be 'A' or 'B', got {self.measurer!r}")
        bank = {_as_key(k): np.asarray(v, dtype=float) for k, v in self.bank.items()}
        object.__setattr__(self, "bank", bank)
        if self.post is not None and isinstance(self.post, Mapping):
            post = {_as_key(k): np.asarray(v, dtype=float) for k, v in self.post.items()}
            object.__setattr__(self, "post", post)
        elif self.post is not None:
            object.__setattr__(self, "post", np.asarray(self.post, dtype=float))

    def post_for(self, history: tuple[int, ...]) -> np.ndarray | None:
        if self.post is None:
            return None
        if isinstance(self.post, dict):
            return self.post[history]
        return self.post


@dataclass(frozen=True, eq=False)
class Protocol:
    """Ordered rounds, or a finite mixture of sub-protocols (shared randomness)."""

    setup: BipartiteSetup
    rounds: tuple[Round, ...] = ()
    mixture: tuple[tuple[float, "Protocol"], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "rounds", tuple(self.rounds))
        if self.mixture is not None:
            mix = tuple((float(w), sub) for w, sub in self.mixture)
            object.__setattr__(self, "mixture", mix)
        self.validate()

    @property
    def is_memoryless(self) -> bool:
        if self.mixture:
            return all(sub.is_memoryless for _, sub in self.mixture)
        return not any(r.retain for r in self.rounds)

    def memory_dims(self) -> list[int]:
        """Sizes of the retained registers after the last round."""
        return [self.setup.dim(r.measurer) for r in self.rounds if r.retain]

    def validate(self) -> None:
        """Check bank completeness and thermality; raises ValueError on the first problem."""
        tol = fix_tolerance()
        if self.mixture:
            if self.rounds:
                raise ValueError("a protocol is either a round list or a mixture, not both")
            weights = [w for w, _ in self.mixture]
            if any(w < 0 for w in weights) or abs(sum(weights) - 1) > EPS_NORM * len(weights):
                raise ValueError(f"mixture weights must be non-negative and sum to 1, got {weights}")
            for _, sub in self.mixture:
                if sub.setup != self.setup:
                    raise ValueError("sub-protocols must share the parent setup")
            return
        retained: list[int] = []
        for n, rnd in enumerate(self.rounds):
            meas, act = rnd.measurer, other(rnd.measurer)
            d_m, d_o = self.setup.dim(meas), self.setup.dim(act)
            g_m, g_o = self.setup.gamma(meas), self.setup.gamma(act)
            prev = list(itertools.product(*[range(d) for d in retained]))
            for hist in prev:
                for c in range(d_m):
                    key = hist + (c,)
                    if key not in rnd.bank:
                        raise ValueError(f"round {n}: bank is missing history {key}")
                    m = rnd.bank[key]
                    if m.shape != (d_o, d_o):
                        raise ValueError(f"round {n}: bank matrix {key} has shape {m.shape}")
                    if not is_gibbs_preserving(m, g_o, tol):
                        raise ValueError(f"round {n}: bank matrix {key} is not thermal for party {act}")
                if isinstance(rnd.post, dict) and hist not in rnd.post:
                    raise ValueError(f"round {n}: post-processing is missing history {hist}")
                post = rnd.post_for(hist)
                if post is not None:
                    if post.shape != (d_m, d_m):
                        raise ValueError(f"round {n}: post matrix has shape {post.shape}")
                    if not is_gibbs_preserving(post, g_m, tol):
                        raise ValueError(f"round {n}: post-processing is not thermal for party {meas}")
            if rnd.retain:
                retained.append(d_m)


def joint_distribution(r, d_a: int | None = None, d_b: int | None = None, tol: float = EPS_NORM) -> np.ndarray:
    arr = np.array(r, dtype=float)
    if arr.ndim == 1 and d_a and d_b:
        arr = arr.reshape(d_a, d_b)
    if arr.ndim != 2:
        raise ValueError("joint distribution must be a d_A x d_B array")
    if np.any(arr < -tol):
        raise ValueError("joint distribution has negative entries")
    arr[arr < 0] = 0.0
    if abs(arr.sum() - 1) > tol * arr.size:
        raise ValueError(f"joint distribution sums to {float(arr.sum())!r}")
    return arr


def _run_rounds(proto: Protocol, r: np.ndarray) -> np.ndarray:
    state = r.copy()
    retained = 0
    for rnd in proto.rounds:
        meas = rnd.measurer
        d_m = proto.setup.dim(meas)
        # axis layout: (A, B, m_1..m_retained); add the current outcome as a new last axis
        m_axis = 0 if meas == "A" else 1
        o_axis = 1 - m_axis
        shape = state.shape
        expanded = np.zeros(shape + (d_m,))
        for c in range(d_m):
            idx = [slice(None)] * len(shape) + [c]
            idx[m_axis] = c
            src = [slice(None)] * len(shape)
            src[m_axis] = c
            expanded[tuple(idx)] = state[tuple(src)]
        out = np.zeros_like(expanded)
        hist_dims = shape[2:]
        for hist in itertools.product(*[range(d) for d in hist_dims]):
            post = rnd.post_for(hist)
            for c in range(d_m):
                sl = (slice(None), slice(None)) + hist + (c,)
                block = expanded[sl]  # (d_A, d_B)
                bank = rnd.bank[hist + (c,)]
                block = bank @ block if o_axis == 0 else block @ bank.T
                if post is not None:
                    block = post @ block if m_axis == 0 else block @ post.T
                out[sl] = block
        state = out if rnd.retain else out.sum(axis=-1)
        retained += int(rnd.retain)
    return state


def run_protocol(proto: Protocol, r, keep_memory: bool = False) -> np.ndarray:
    """Joint output distribution; ``keep_memory`` returns the memory axes too."""
    r = joint_distribution(r)
    if r.shape != (proto.setup.d_a, proto.setup.d_b):
        raise ValueError(f"input shape {r.shape} does not match the setup")
    if proto.mixture:
        if keep_memory:
            raise ValueError("memory axes are not aligned across mixture components")
        return sum(w * run_protocol(sub, r) for w, sub in proto.mixture)
    state = _run_rounds(proto, r)
    if keep_memory:
        return state
    while state.ndim > 2:
        state = state.sum(axis=-1)
    return state


def round_matrix(setup: BipartiteSetup, rnd: Round) -> np.ndarray:
    """Transition matrix of a memoryless round on vec index i * d_B + j."""
    d_a, d_b = setup.d_a, setup.d_b
    n = d_a * d_b
    m = np.zeros((n, n))
    for k, l in itertools.product(range(d_a), range(d_b)):
        e = np.zeros((d_a, d_b))
        e[k, l] = 1.0
        proto = Protocol(setup, (Round(rnd.measurer, rnd.bank, rnd.post, False),))
        m[:, k * d_b + l] = _run_rounds(proto, e).reshape(-1)
    return m


def compose_matrix(proto: Protocol) -> np.ndarray:
    """Overall transition matrix of a memoryless protocol (later rounds on the left)."""
    if not proto.is_memoryless:
        raise ValueError("compose_matrix needs a protocol that retains no memory")
    n = proto.setup.d_a * proto.setup.d_b
    if proto.mixture:
        return sum(w * compose_matrix(sub) for w, sub in proto.mixture)
    total = np.eye(n)
    for rnd in proto.rounds:
        total = round_matrix(proto.setup, rnd) @ total
    return total


def one_round(setup: BipartiteSetup, measurer: str, tensor, post=None) -> Protocol:
    """Single memoryless round whose bank is read off a thermal tensor.

    ``tensor[j, c, l]`` is the responder's output j given the measured
    outcome c and its own input l, so bank[c] = tensor[:, c, :].
    """
    t = np.asarray(tensor, dtype=float)
    d_m = setup.dim(measurer)
    bank = {(c,): t[:, c, :] for c in range(d_m)}
    return Protocol(setup, (Round(measurer, bank, post),))


def parallel_ltocc(t_a, t_b, r, gamma_a=None, gamma_b=None) -> np.ndarray:
    """r'_ij = sum_kl t_a[i, k, l] t_b[j, k, l] r_kl.

    ``t_a`` must be thermal in its first input (A's own system) and ``t_b``
    in its second (B's own system); checked when the Gibbs weights are given.
    """
    t_a = np.asarray(t_a, dtype=float)
    t_b = np.asarray(t_b, dtype=float)
    if gamma_a is not None and not is_thermal(t_a, gamma_a, "first"):
        raise ValueError("t_a is not thermal for party A")
    if gamma_b is not None and not is_thermal(t_b, gamma_b, "second"):
        raise ValueError("t_b is not thermal for party B")
    return np.einsum("ikl,jkl,kl->ij", t_a, t_b, np.asarray(r, dtype=float))


def parallel_as_protocol(setup: BipartiteSetup, t_a, t_b) -> Protocol:
    """Two-round memory protocol reproducing :func:`parallel_ltocc`.

    A measures and keeps its outcome; then B measures, A applies
    t_a[:, :, l] given B's outcome l and B applies t_b[:, k, :] given the
    stored outcome k.
    """
    t_a = np.asarray(t_a, dtype=float)
    t_b = np.asarray(t_b, dtype=float)
    d_a, d_b = setup.d_a, setup.d_b
    first = Round("A", {(k,): np.eye(d_b) for k in range(d_a)}, None, retain=True)
    bank = {(k, l): t_a[:, :, l] for k in range(d_a) for l in range(d_b)}
    post = {(k,): t_b[:, k, :] for k in range(d_a)}
    second = Round("B", bank, post, retain=False)
    return Protocol(setup, (first, second))


def correlate_sharp(t_b, p, l0: int | None = None) -> np.ndarray:
    """Maximally correlated output diag(p) from B holding the sharp state at ``l0``.

    Requires t_b[:, :, l0] to be the identity, so B copies A's outcome.
    """
    t_b = np.asarray(t_b, dtype=float)
    d = t_b.shape[0]
    p = np.asarray(p, dtype=float)
    ident = [l for l in range(d) if np.allclose(t_b[:, :, l], np.eye(d), atol=1e-12)]
    if l0 is None:
        if not ident:
            raise ValueError("tensor has no identity layer")
        l0 = ident[-1]
    elif l0 not in ident:
        raise ValueError(f"layer {l0} of the tensor is not the identity")
    r = np.outer(p, np.eye(d)[l0])
    t_a = np.repeat(np.eye(d)[:, :, None], d, axis=2)
    return parallel_ltocc(t_a, t_b, r)


def _entropy(p) -> float:
    p = np.asarray(p, dtype=float).reshape(-1)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def shannon_entropy(p) -> float:
    return _entropy(p)


def mutual_information(r) -> float:
    """I(A:B) in nats."""
    r = np.asarray(r, dtype=float)
    val = _entropy(r.sum(axis=1)) + _entropy(r.sum(axis=0)) - _entropy(r)
    return max(val, 0.0)


def conditional_entropy(r, given: str) -> float:
    """H(B|A) when ``given == 'A'``, H(A|B) when ``given == 'B'``; nats."""
    r = np.asarray(r, dtype=float)
    if given == "A":
        val = _entropy(r) - _entropy(r.sum(axis=1))
    elif given == "B":
        val = _entropy(r) - _entropy(r.sum(axis=0))
    else:
        raise ValueError("given must be 'A' or 'B'")
    return max(val, 0.0)


def one_round_decomposition(m, setup: BipartiteSetup, measurer: str = "A"):
    """Write a transition matrix as a single round (Lambda on the measurer, tensor on the other).

    Returns ``(Lambda, T)`` or None.  The measurer's map is forced by the
    marginal of ``m``; the responder's tensor is then an LP feasibility
    problem.  Only A-measures rounds without shared randomness are searched
    when ``measurer == 'A'`` (and symmetrically for B).
    """
    m = np.asarray(m, dtype=float)
    d_a, d_b = setup.d_a, setup.d_b
    m4 = m.reshape(d_a, d_b, d_a, d_b)  # [i, j, k, l]
    if measurer == "B":
        m4 = m4.transpose(1, 0, 3, 2)
        d_a, d_b = d_b, d_a
    g_m, g_o = setup.gamma(measurer), setup.gamma(other(measurer))
    lam_all = m4.sum(axis=1)  # [i, k, l]
    lam = lam_all[:, :, 0]
    if not np.allclose(lam_all, lam[:, :, None], atol=1e-9) or not is_gibbs_preserving(lam, g_m):
        return None
    # unknowns t[j, k, l] (responder output j, outcome k, own input l)
    n = d_b * d_a * d_b

    def var(j, k, l):
        return (j * d_a + k) * d_b + l

    rows, rhs = [], []
    for i, j, k, l in itertools.product(range(d_a), range(d_b), range(d_a), range(d_b)):
        row = np.zeros(n)
        row[var(j, k, l)] = lam[i, k]
        rows.append(row)
        rhs.append(m4[i, j, k, l])
    for k, l in itertools.product(range(d_a), range(d_b)):
        row = np.zeros(n)
        for j in range(d_b):
            row[var(j, k, l)] = 1
        rows.append(row)
        rhs.append(1.0)
    for j, k in itertools.product(range(d_b), range(d_a)):
        row = np.zeros(n)
        for l in range(d_b):
            row[var(j, k, l)] = g_o[l]
        rows.append(row)
        rhs.append(g_o[j])
    res = linprog(np.zeros(n), A_eq=np.array(rows), b_eq=np.array(rhs), bounds=(0, None), method="highs")
    if res.status != 0:
        return None
    t = res.x.reshape(d_b, d_a, d_b)
    return lam, t


# -- JSON ---------------------------------------------------------------------

def _beta_json(beta: float):
    return "inf" if beta == math.inf else beta


def protocol_to_json(proto: Protocol) -> dict:
    s = proto.setup
    out = {
        "setup": {"energies_a": list(s.spec_a.energies), "energies_b": list(s.spec_b.energies),
                  "beta_a": _beta_json(s.beta_a), "beta_b": _beta_json(s.beta_b)},
        "rounds": [],
        "mixture": None,
    }
    for rnd in proto.rounds:
        post = rnd.post
        if isinstance(post, dict):
            post = {",".join(map(str, k)): v.tolist() for k, v in post.items()}
        elif post is not None:
            post = post.tolist()
        out["rounds"].append({
            "measurer": rnd.measurer,
            "bank": {",".join(map(str, k)): v.tolist() for k, v in rnd.bank.items()},
            "post": post,
            "retain": rnd.retain,
        })
    if proto.mixture:
        out["mixture"] = [{"weight": w, "protocol": protocol_to_json(sub)} for w, sub in proto.mixture]
    return out


def protocol_from_json(obj) -> Protocol:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        s = obj["setup"]
        setup = BipartiteSetup(s["energies_a"], s["energies_b"], s["beta_a"], s["beta_b"])
        rounds = [Round(r["measurer"], r["bank"], r.get("post"), bool(r.get("retain", False)))
                  for r in obj.get("rounds", [])]
    except KeyError as exc:
        raise ValueError(f"protocol JSON is missing field {exc}") from None
    mixture = None
    if obj.get("mixture"):
        mixture = [(m["weight"], protocol_from_json({"setup": s, **m["protocol"]})) for m in obj["mixture"]]
    return Protocol(setup, rounds, mixture)


@dataclass
class InvariantReport:
    gibbs_preserved: bool
    max_gibbs_error: float
    memoryless: bool
    rounds: int
    registers: list[int] = field(default_factory=list)


def invariant_report(proto: Protocol) -> InvariantReport:
    """Gibbs-preservation and memory bookkeeping for a validated protocol."""
    g = proto.setup.gamma_joint
    out = run_protocol(proto, g)
    err = float(np.abs(out - g).max())
    n_rounds = len(proto.rounds) if not proto.mixture else max(len(sub.rounds) for _, sub in proto.mixture)
    regs = proto.memory_dims() if not proto.mixture else []
    return InvariantReport(err <= fix_tolerance(), err, proto.is_memoryless, n_rounds, regs)
