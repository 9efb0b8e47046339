import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from exclusion_bounds.errors import DimensionError, InvalidStateError
from exclusion_bounds.quantum import (
    DensityMatrix,
    bell_state,
    conditional_entropy,
    dephase_in_basis,
    entropy_of_spectrum,
    maximally_mixed,
    outcome_distribution,
    partial_trace,
    random_state,
    von_neumann_entropy,
    with_trivial_memory,
)
from exclusion_bounds.measurements import MeasurementBasis


def _loop_partial_trace(m, da, db, keep):
    # reference: explicit index loops
    if keep == 0:
        out = np.zeros((da, da), complex)
        for i in range(da):
            for j in range(da):
                out[i, j] = sum(m[i * db + k, j * db + k] for k in range(db))
    else:
        out = np.zeros((db, db), complex)
        for i in range(db):
            for j in range(db):
                out[i, j] = sum(m[k * db + i, k * db + j] for k in range(da))
    return out


def test_rejects_non_hermitian():
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]), (2,))


def test_rejects_bad_trace_and_negative_eigenvalue():
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.eye(2), (2,))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.diag([1.2, -0.2]), (2,))


def test_rejects_dims_mismatch():
    with pytest.raises(DimensionError):
        DensityMatrix(np.eye(4) / 4, (2, 3))


def test_from_vector_requires_unit_norm():
    with pytest.raises(InvalidStateError):
        DensityMatrix.from_vector([1.0, 1.0])


def test_tiny_negative_eigenvalue_is_clamped():
    m = np.diag([1.0 + 5e-10, -5e-10])
    rho = DensityMatrix(m, (2,))
    assert rho.eigenvalues.min() == 0.0


def test_entropy_values():
    assert_allclose(von_neumann_entropy(maximally_mixed(4)), 2.0, atol=1e-12)
    assert_allclose(von_neumann_entropy(bell_state(3)), 0.0, atol=1e-12)
    assert_allclose(entropy_of_spectrum([0.5, 0.25, 0.25, 0.0]), 1.5, atol=1e-12)


@pytest.mark.parametrize("da,db", [(2, 2), (2, 3), (3, 2), (3, 3)])
@pytest.mark.parametrize("keep", [0, 1])
def test_partial_trace_matches_loops(da, db, keep):
    rho = random_state(da * db, "mixed", seed=[da, db, keep], dims=(da, db))
    got = partial_trace(rho, keep).matrix
    assert_allclose(got, _loop_partial_trace(rho.matrix, da, db, keep), atol=1e-12)


def test_bell_state_marginals_and_conditional_entropy():
    for d in (2, 3):
        rho = bell_state(d)
        assert_allclose(partial_trace(rho, 0).matrix, np.eye(d) / d, atol=1e-12)
        assert_allclose(conditional_entropy(rho), -np.log2(d), atol=1e-12)


def test_dephasing_removes_coherence():
    rho = bell_state(2)
    out = dephase_in_basis(rho, MeasurementBasis.computational(2))
    expected = np.zeros((4, 4))
    expected[0, 0] = expected[3, 3] = 0.5
    assert_allclose(out.matrix, expected, atol=1e-12)


def test_outcome_distribution_hadamard():
    plus = DensityMatrix.from_vector(np.array([1, 1]) / np.sqrt(2))
    h = MeasurementBasis.from_vectors([[1, 1], [1, -1]] / np.sqrt(2))
    assert_allclose(outcome_distribution(plus, h), [1.0, 0.0], atol=1e-12)


def test_trivial_memory_has_zero_memory_entropy():
    rho = with_trivial_memory(maximally_mixed(3))
    assert rho.dims == (3, 1)
    assert_allclose(conditional_entropy(rho), np.log2(3), atol=1e-12)


def test_random_state_is_seeded():
    a = random_state(4, "mixed", seed=7)
    b = random_state(4, "mixed", seed=7)
    assert_allclose(a.matrix, b.matrix)
    c = random_state(4, "pure", seed=[1, 2])
    assert_allclose(np.trace(c.matrix @ c.matrix).real, 1.0, atol=1e-12)
    with pytest.raises(ValueError):
        random_state(2, "thermal", seed=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([(2, 2), (2, 3), (3, 3)]))
def test_entropy_properties(seed, dims):
    rho = random_state(dims[0] * dims[1], "mixed", seed=seed, dims=dims)
    h = von_neumann_entropy(rho)
    assert -1e-12 <= h <= np.log2(rho.dim) + 1e-12
    ha = von_neumann_entropy(partial_trace(rho, 0))
    hb = von_neumann_entropy(partial_trace(rho, 1))
    # subadditivity and Araki-Lieb
    assert h <= ha + hb + 1e-9
    assert h >= abs(ha - hb) - 1e-9
    assert conditional_entropy(rho) >= -np.log2(dims[0]) - 1e-9
