"""Acceptance criteria, one test per criterion, each with its runtime bound.

A line per criterion is printed in the terminal summary.
"""
import contextlib
import io
import itertools
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from thermolocc.chsh import (attain, channel_action, hadamard_channel, incoherent_round_channel,
                             mode_preservation_check)
from thermolocc.cli import main as cli_main
from thermolocc.core import INF, gibbs_weights, majorizes, thermo_majorizes, ut_majorizes
from thermolocc.gates import (classical_cnot, classical_swap, thermal_cnot, thermal_cnot_ba,
                              thermal_swap_gate, tv_distance)
from thermolocc.gibbs_maps import (random_cooling, random_gibbs_preserving, witness_matrix)
from thermolocc.protocol import (BipartiteSetup, compose_matrix, conditional_entropy,
                                 mutual_information, parallel_ltocc, run_protocol, shannon_entropy)
from thermolocc.reachability import bithermal_reachable_exact, enhanced_necessary
from thermolocc.tensors import (apply_tensor, bicooling_extremals, bithermal_pair,
                                enumerate_bithermal_vertices, extremal_bithermal_d2,
                                permutation_tensor, swap_first, swap_output, swap_second,
                                tangent_directions)

from conftest import (ACCEPTANCE_LINES, ACCEPTANCE_REPORTS, lp_transition_exists,
                      random_memoryless_protocol, subset_majorization_oracle)

SEED = 20240611


@contextlib.contextmanager
def criterion(n, title, limit_s, note=""):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_LINES[n] = f"criterion {n:2d} FAIL  {title}: {type(exc).__name__}: {str(exc).splitlines()[0][:120]}"
        raise
    elapsed = time.perf_counter() - start
    if elapsed >= limit_s:
        ACCEPTANCE_LINES[n] = f"criterion {n:2d} FAIL  {title}: took {elapsed:.2f} s (limit {limit_s} s)"
        pytest.fail(f"criterion {n} took {elapsed:.2f} s, limit {limit_s} s")
    extra = f"  [{note}]" if note else ""
    ACCEPTANCE_LINES[n] = f"criterion {n:2d} PASS  {title} ({elapsed:.2f} s < {limit_s} s){extra}"


def cli_json(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli_main(list(argv), out=out, err=err)
    assert code == 0, err.getvalue()
    return json.loads(out.getvalue())


# -- 1 ---------------------------------------------------------------------------------

GRID = [(ga, gb) for ga in np.linspace(0, 1, 10) for gb in np.linspace(0, 1, 10)]


def test_criterion_01_gate_distances():
    with criterion(1, "gate distances and SWAP factorizations", 1.0,
                   "CNOT closed form checked separately, see criterion 1b"):
        for ga, gb in GRID:
            ab, ba = thermal_cnot(gb), thermal_cnot_ba(ga)
            swap_a = np.array([[1, 0, 0, 0], [0, 1 - ga, gb, 0],
                               [0, ga, (1 - gb) ** 2, 1 - gb], [0, 0, (1 - gb) * gb, gb]])
            swap_b = np.array([[1, 0, 0, 0], [0, (1 - ga) ** 2, gb, 1 - ga],
                               [0, ga, 1 - gb, 0], [0, (1 - ga) * ga, 0, ga]])
            assert np.abs(ab @ ba @ ab - swap_a).max() <= 1e-12
            assert np.abs(ba @ ab @ ba - swap_b).max() <= 1e-12
            assert np.abs(thermal_swap_gate(ga, gb, "A") - swap_a).max() <= 1e-12
            assert np.abs(thermal_swap_gate(ga, gb, "B") - swap_b).max() <= 1e-12
            assert abs(tv_distance(classical_swap(), swap_a) - (3 - ga - 2 * gb)) <= 1e-12
            assert abs(tv_distance(classical_swap(), swap_b) - (3 - 2 * ga - gb)) <= 1e-12
            # value implied by the printed CNOT matrix
            assert abs(tv_distance(classical_cnot(), ab) - (1 - gb)) <= 1e-12


@pytest.mark.xfail(strict=True, reason="the printed closed form g_B contradicts the printed CNOT matrix (gives 1 - g_B)")
def test_criterion_01b_cnot_printed_closed_form():
    worst = max(abs(tv_distance(classical_cnot(), thermal_cnot(gb)) - gb) for _, gb in GRID)
    ACCEPTANCE_LINES[1.5] = (f"criterion  1 FAIL  printed CNOT distance g_B: max deviation {worst:.3f} on the grid; "
                             "the printed matrix gives 1 - g_B (documented discrepancy)")
    assert worst <= 1e-12


# -- 2 ---------------------------------------------------------------------------------

def test_criterion_02_chsh():
    with criterion(2, "CHSH bound, attainment and classical single copy", 1.0):
        obj = cli_json("chsh", "bound", "--energies", "0,1", "--copies", "2")
        assert abs(obj["bound"] - (1 + math.sqrt(2))) <= 1e-12
        obj = cli_json("chsh", "attain", "--energies", "0,1", "--copies", "2")
        assert abs(obj["attained"] - (1 + math.sqrt(2))) <= 1e-9
        for spec in ((0, 1), (0, 1, 2.5), (0, 0.3, 1.7, 4.0)):
            rep = attain(spec, 1)
            assert rep.bound == 2.0 and rep.attained <= 2.0 + 1e-12


# -- 3 ---------------------------------------------------------------------------------

def test_criterion_03_d2_bithermal_polytope():
    with criterion(3, "d=2 bithermal vertices exact at g=1/2, swap identities exact", 1.0):
        g = Fraction(1, 2)
        verts = enumerate_bithermal_vertices([1 / (1 + g), g / (1 + g)], exact=True)
        t1, t2 = bithermal_pair(g)
        assert len(verts) == 2
        assert {tuple(v.reshape(-1)) for v in verts} == {tuple(t1.reshape(-1)), tuple(t2.reshape(-1))}
        s = np.array([[1 - g, Fraction(1)], [g, Fraction(0)]], dtype=object)
        assert (swap_output(s, t1) == t2).all()
        assert (swap_first(t1, s) == t2).all()
        assert (swap_second(t1, s) == t2).all()
        floats = enumerate_bithermal_vertices([2 / 3, 1 / 3])
        f1, f2 = extremal_bithermal_d2([2 / 3, 1 / 3])
        assert sorted(v.round(12).tobytes() for v in floats) == sorted(t.round(12).tobytes() for t in (f1, f2))


# -- 4 ---------------------------------------------------------------------------------

def test_criterion_04_tangent_directions():
    res = None
    with criterion(4, "tangent directions around the permutation tensor, E=(0,1,2)", 60.0,
                   "see tangent report below"):
        res = tangent_directions(permutation_tensor(3), (0, 1, 2), target=67)
        rep = res.report
        assert rep["found"] == len(res.directions) > 0
        assert rep["matches_target"] or len(rep["signatures"]) == rep["found"]
        assert len(set(rep["signatures"])) == rep["found"]
    rep = dict(res.report)
    status = "exact match" if rep["matches_target"] else "discrepancy"
    ACCEPTANCE_REPORTS.append(f"tangent report ({status}): " + json.dumps(rep, sort_keys=True))


# -- 5 ---------------------------------------------------------------------------------

def test_criterion_05_curve_equals_lp():
    rng = np.random.default_rng(SEED)
    with criterion(5, "curve verdict equals LP witness feasibility, 4500 pairs", 30.0):
        disagreements = 0
        positives = 0
        for d, beta in itertools.product((2, 3, 4), (0.0, 0.5, 2.0)):
            g = gibbs_weights(np.arange(d, dtype=float), beta)
            for n in range(500):
                p = rng.dirichlet(np.ones(d))
                if n % 2:
                    q = random_gibbs_preserving(rng, g) @ p
                    q = np.clip(q, 0, None) / np.clip(q, 0, None).sum()
                else:
                    q = rng.dirichlet(np.ones(d))
                curve = thermo_majorizes(p, q, g, tol=1e-9)
                lp = witness_matrix(p, q, g) is not None
                disagreements += curve != lp
                positives += curve
        assert disagreements == 0
        assert 1000 < positives < 4500


# -- 6 ---------------------------------------------------------------------------------

def test_criterion_06_limits():
    rng = np.random.default_rng(SEED + 6)
    with criterion(6, "beta=0 gives majorization, beta=inf gives UT-majorization, 1000 pairs each", 10.0):
        flat_hits = cold_hits = 0
        for n in range(1000):
            d = 2 + n % 4
            p = rng.dirichlet(np.ones(d))
            if n % 2:  # doubly stochastic image, so a positive case
                perms = list(itertools.permutations(range(d)))
                w = rng.dirichlet(np.ones(len(perms)))
                m = sum(wi * np.eye(d)[list(pi)] for wi, pi in zip(w, perms))
                q = m @ p
            else:
                q = rng.dirichlet(np.ones(d))
            verdict = thermo_majorizes(p, q, gibbs_weights(np.arange(d), 0.0))
            assert verdict == majorizes(p, q) == subset_majorization_oracle(p, q)
            flat_hits += verdict
        for n in range(1000):
            d = 2 + n % 3
            p = rng.dirichlet(np.ones(d))
            q = random_cooling(rng, d) @ p if n % 2 else rng.dirichlet(np.ones(d))
            verdict = thermo_majorizes(p, q, gibbs_weights(np.arange(d), INF))
            assert verdict == ut_majorizes(p, q)
            assert verdict == lp_transition_exists(p, q, np.ones(d) / d, cooling=True)
            cold_hits += verdict
        assert flat_hits >= 500 and cold_hits >= 500


# -- 7 ---------------------------------------------------------------------------------

def test_criterion_07_memoryless_protocols():
    rng = np.random.default_rng(SEED + 7)
    with criterion(7, "200 memoryless protocols fix the Gibbs state and are monotone", 60.0):
        for n in range(200):
            d = 2 + n % 2
            beta_a, beta_b = rng.uniform(0.2, 2.0, 2)
            if abs(beta_a - beta_b) < 1e-3:
                beta_b += 0.5
            spec = np.sort(rng.uniform(0, 2, d))
            spec[0] = 0.0
            setup = BipartiteSetup(spec, np.arange(d, dtype=float), beta_a, beta_b)
            proto = random_memoryless_protocol(rng, setup, max_rounds=3, mixture=bool(rng.random() < 0.3),
                                               witness=True)
            m = compose_matrix(proto)
            g = setup.gamma_joint.reshape(-1)
            assert np.abs(m @ g - g).max() <= 1e-9
            r = np.outer(rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d)))
            out = run_protocol(proto, r)
            np.testing.assert_allclose(out.reshape(-1), m @ r.reshape(-1), atol=1e-12)
            assert thermo_majorizes(r.reshape(-1), out.reshape(-1), g)


# -- 8 ---------------------------------------------------------------------------------

def test_criterion_08_correlations():
    rng = np.random.default_rng(SEED + 8)
    with criterion(8, "bicooling parallel rounds correlate, memoryless rounds on Gibbs do not", 5.0):
        g0 = gibbs_weights((0, 1, 2), INF)
        tensors = [t for t in bicooling_extremals(3)]
        for t in tensors:
            for _ in range(5):
                p, q = rng.dirichlet(np.ones(3), 2)
                out = parallel_ltocc(t, t, np.outer(p, q), g0, g0)
                assert np.count_nonzero(out - np.diag(np.diag(out))) == 0
                r = apply_tensor(t, p, q)
                np.testing.assert_allclose(np.diag(out), r, atol=1e-15)
                assert conditional_entropy(out, "A") == 0.0 and conditional_entropy(out, "B") == 0.0
                assert abs(mutual_information(out) - shannon_entropy(r)) <= 1e-12
        for beta_a, beta_b in ((INF, INF), (0.7, 1.9), (0.0, 0.0)):
            setup = BipartiteSetup((0, 1, 2), (0, 1, 2), beta_a, beta_b)
            for _ in range(10):
                proto = random_memoryless_protocol(rng, setup, max_rounds=3)
                assert mutual_information(run_protocol(proto, setup.gamma_joint)) <= 1e-12


# -- 9 ---------------------------------------------------------------------------------

def test_criterion_09_enhanced_condition():
    rng = np.random.default_rng(SEED + 9)
    gamma = np.array([2 / 3, 1 / 3])
    t1, t2 = extremal_bithermal_d2(gamma)
    with criterion(9, "LP reachability implies the enhanced condition, strict fixture", 30.0):
        reachable = 0
        for n in range(200):
            p, q = rng.dirichlet(np.ones(2), 2)
            if n % 2:
                lam = rng.random()
                r = apply_tensor(lam * t1 + (1 - lam) * t2, p, q)
            else:
                r = rng.dirichlet(np.ones(2))
            if bithermal_reachable_exact(p, q, r, gamma):
                reachable += 1
                assert enhanced_necessary(p, q, r, gamma)
        assert reachable >= 100
        p, q, r = (0.05, 0.95), (0.1, 0.9), (0.1, 0.9)
        assert thermo_majorizes(p, r, gamma) and thermo_majorizes(q, r, gamma)
        assert not enhanced_necessary(p, q, r, gamma)


# -- 10 --------------------------------------------------------------------------------

def test_criterion_10_mode_preservation():
    rng = np.random.default_rng(SEED + 10)
    with criterion(10, "incoherent rounds preserve modes, a Hadamard does not", 5.0):
        for ea, eb in (((0, 1), (0, 1)), ((0, 1.3), (0, 0.4, 1.1)), ((0, 1, 2), (0, 2))):
            d_a, d_b = len(ea), len(eb)
            g_a, g_b = gibbs_weights(ea, 0.8), gibbs_weights(eb, 0.8)
            for _ in range(3):
                bank = [random_gibbs_preserving(rng, g_b) for _ in range(d_a)]
                post = random_gibbs_preserving(rng, g_a) if rng.random() < 0.5 else None
                phases = [rng.uniform(0, 2 * np.pi, d_b) for _ in range(d_a)] if rng.random() < 0.5 else None
                action = channel_action(incoherent_round_channel(d_a, d_b, bank, post, phases), d_a * d_b)
                assert mode_preservation_check(action, ea, eb)
            assert not mode_preservation_check(channel_action(hadamard_channel(d_a, d_b), d_a * d_b), ea, eb)
