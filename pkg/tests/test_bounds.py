import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from exclusion_bounds.bounds import (
    BOUND_NAMES,
    CATALOG,
    INFO_BOUNDS,
    covering_families,
    eur_multi_lower,
    evaluate_bound,
    full_report,
    info_omega_term,
    memory_terms,
    mutual_information,
    omega_term,
    pair_families,
    resolve_bounds,
    ropt_family,
    ry_parts,
    state_independent,
)
from exclusion_bounds.errors import InapplicableBoundError, UnknownBoundError
from exclusion_bounds.measurements import MeasurementBasis, MeasurementEnsemble
from exclusion_bounds.quantum import (
    DensityMatrix,
    bell_state,
    maximally_mixed,
    random_state,
    with_trivial_memory,
)
from exclusion_bounds.scenarios import qubit_family, qutrit_theta_family, qutrit_three_measurements
from helpers import random_ensemble

# frozen from the Bloch-grid capital search and hand evaluation of the
# two-outcome A vectors at a = 0.75
THM1_QUBIT_075 = 1.51983909991


def loop_chain_max(c, order, d):
    """Reference chain coefficient maximised over the last index, by explicit loops."""
    best = 0.0
    for last in range(d):
        total = 0.0
        for mids in itertools.product(range(d), repeat=len(order) - 2):
            idx = list(mids) + [last]
            head = max(c[order[0], order[1], i0, idx[0]] for i0 in range(d))
            prod = head
            for k in range(1, len(order) - 1):
                prod *= c[order[k], order[k + 1], idx[k - 1], idx[k]]
            total += prod
        best = max(best, total)
    return best


# -- left-hand sides ---------------------------------------------------------------

def test_bell_mub_information():
    e = qubit_family(0.5)
    rep = full_report(bell_state(2), e)
    assert_allclose(rep.lhs_info_sum, 2.0, atol=1e-12)
    assert_allclose(rep.lhs_entropy_sum, 0.0, atol=1e-12)
    assert_allclose(rep.bounds["thm1"], 2.0, atol=1e-12)
    assert rep.ok()


def test_memory_term_sign():
    # the quantum-memory form subtracts H(A|B); adding it would give 0 < 2 here
    e = qubit_family(0.5)
    rho = bell_state(2)
    mem = memory_terms(rho)
    assert_allclose(mem.h_a_given_b, -1.0, atol=1e-12)
    assert_allclose(evaluate_bound("r_CP", rho, e), 2.0, atol=1e-12)
    assert state_independent("r_CP", e) + mem.h_a_given_b < full_report(rho, e).lhs_info_sum - 1


def test_mutual_information_product_state_is_zero():
    rho = random_state(2, "mixed", seed=1).tensor(random_state(3, "mixed", seed=2))
    e = qubit_family(0.7)
    for b in e:
        assert_allclose(mutual_information(rho, b), 0.0, atol=1e-12)


def test_trivial_memory_accepts_single_system():
    e = qubit_family(0.6)
    rho_a = random_state(2, "mixed", seed=5)
    r1 = full_report(rho_a, e)
    r2 = full_report(with_trivial_memory(rho_a), e)
    assert_allclose(r1.lhs_info_sum, 0.0, atol=1e-12)
    assert r1.bounds == pytest.approx(r2.bounds)


# -- two-measurement bounds ---------------------------------------------------------

@pytest.mark.parametrize("a", [0.5, 0.6, 0.75, 0.9, 1.0])
def test_qubit_overlap_bounds_coincide(a):
    e = qubit_family(a)
    target = math.log2(4 * a)
    for name in ("r_H", "r_G", "r_CP"):
        assert_allclose(state_independent(name, e), target, atol=1e-12)
    assert_allclose(state_independent("MU", e), -math.log2(a), atol=1e-12)


def test_thm1_qubit_frozen():
    e = qubit_family(0.75)
    assert_allclose(state_independent("thm1", e), THM1_QUBIT_075, atol=1e-9)
    assert state_independent("r_H", e) - state_independent("thm1", e) > 0.01


def test_qutrit_theta_overlap_ordering():
    for theta in np.linspace(0, np.pi / 2, 7):
        e = qutrit_theta_family(theta)
        h, g, cp = (state_independent(n, e) for n in ("r_H", "r_G", "r_CP"))
        assert cp <= g + 1e-9 and g <= h + 1e-9


def test_identical_bases_trivial():
    z = MeasurementBasis.computational(3)
    e = MeasurementEnsemble([z, z])
    for name in ("r_H", "r_G", "r_CP", "thm1", "r_x", "U1", "U2"):
        assert_allclose(state_independent(name, e), 2 * math.log2(3), atol=1e-9)


# -- multi-measurement bounds --------------------------------------------------------

def test_u1_matches_loops():
    e = random_ensemble(3, 3, 41)
    c = e.overlaps
    ref = min(math.log2(loop_chain_max(c, p, 3)) for p in itertools.permutations(range(3)))
    assert_allclose(state_independent("U1", e), 3 * math.log2(3) + ref, atol=1e-12)


def test_three_chain_and_ry():
    e = qutrit_three_measurements(0.3)
    ry, chains = ry_parts(e)
    assert len({p[-1] for p in chains}) == len(chains)
    assert state_independent("r_y", e) <= state_independent("lemma2", e) + 1e-9
    assert state_independent("r_y", e) <= state_independent("U2", e) + 1e-9


def test_families():
    assert [n for n, _ in pair_families(3)] == ["cyclic-pairs", "star-pairs"]
    names = [n for n, _ in covering_families(5)]
    assert "cyclic-pairs" in names and "all-3-subsets" in names
    # for N = 4 the cyclic 3-windows are all 3-subsets and appear once
    assert "all-3-subsets" not in [n for n, _ in covering_families(4)]
    assert any(len(f) == 1 and len(f[0]) == 4 for _, f in covering_families(4))
    e = qutrit_three_measurements(0.5)
    assert ropt_family(e)[1] in {n for n, _ in covering_families(3)}
    assert state_independent("r_opt", e) <= state_independent("U3", e) + 1e-9


def test_ascending_eur_is_unsound():
    # every measurement is deterministic on |1> at a = 0, so sum H(M|B) = 0
    e = qutrit_three_measurements(0.0)
    rho = with_trivial_memory(DensityMatrix.from_vector([0, 1, 0]))
    rep = full_report(rho, e)
    assert_allclose(rep.lhs_entropy_sum, 0.0, atol=1e-12)
    assert -omega_term(e, "ascending") - memory_terms(rho).weighted(3) > 0.5
    assert eur_multi_lower(rho, e) <= 1e-9


def test_auto_ordering_certificate():
    for a in (0.0, 0.3, 0.7):
        e = qutrit_three_measurements(a)
        term, used = info_omega_term(e)
        if used == "ascending":
            assert 3 * math.log2(3) + term >= 2 * math.log2(3)
        assert term <= info_omega_term(e, "descending")[0] + 1e-12


# -- catalog -------------------------------------------------------------------------

def test_catalog_kinds():
    assert set(INFO_BOUNDS) <= set(BOUND_NAMES)
    assert CATALOG["eur_multi"].kind == "eur"
    assert CATALOG["MU"].kind == "entropy"


def test_unknown_and_inapplicable():
    with pytest.raises(UnknownBoundError):
        resolve_bounds(["r_zz"])
    with pytest.raises(InapplicableBoundError):
        resolve_bounds(["lemma2"], qubit_family(0.5))
    with pytest.raises(InapplicableBoundError):
        resolve_bounds(["thm1"], qutrit_three_measurements(0.5))
    with pytest.raises(InapplicableBoundError):
        state_independent("classical_pair", qubit_family(0.6))


def test_report_serialises():
    rep = full_report(random_state(9, "mixed", seed=1, dims=(3, 3)), qutrit_three_measurements(0.5))
    doc = rep.to_dict()
    assert doc["N"] == 3 and doc["violations"] == {}
    assert set(doc["bounds"]) == set(doc["slack"])
    assert "r_x" in doc["heuristic"]
    assert "r_opt_family" in doc["details"]


# -- randomised soundness --------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["pure", "mixed"]), st.floats(0.5, 1.0))
def test_qubit_soundness(seed, kind, a):
    rep = full_report(random_state(4, kind, seed=seed, dims=(2, 2)), qubit_family(a))
    assert rep.ok(1e-7), rep.violations(1e-7)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["pure", "mixed"]), st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]))
def test_qutrit_three_soundness(seed, kind, a):
    rep = full_report(random_state(9, kind, seed=seed, dims=(3, 3)), qutrit_three_measurements(a))
    assert rep.ok(1e-7), rep.violations(1e-7)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_random_pair_soundness(seed):
    e = random_ensemble(3, 2, seed)
    rho = random_state(9, "pure", seed=seed, dims=(3, 3))
    assert full_report(rho, e).ok(1e-7)


def test_maximally_mixed_has_no_information():
    rep = full_report(maximally_mixed(9, (3, 3)), qutrit_three_measurements(0.4))
    assert_allclose(rep.lhs_info_sum, 0.0, atol=1e-12)
    assert_allclose(rep.lhs_entropy_sum, 3 * math.log2(3), atol=1e-12)
