"""Small dense quantum states: entropies, partial traces and measurement channels.

Everything here works on explicit complex matrices of total dimension up to
~16. Entropies are in bits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidStateError
from .tolerances import EPS_EIG, TAU_HERM, TAU_NORM, TAU_PSD


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix with declared tensor factor dimensions.

    ``dims`` lists the factor dimensions, e.g. ``(dA, dB)``; their product must
    equal the matrix size. A single-factor state has ``dims == (d,)``.
    """

    matrix: np.ndarray
    dims: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {m.shape}")
        dims = tuple(int(x) for x in (self.dims if self.dims is not None else (m.shape[0],)))
        if any(x < 1 for x in dims) or int(np.prod(dims)) != m.shape[0]:
            raise DimensionError(f"factor dims {dims} do not multiply to {m.shape[0]}")
        if np.max(np.abs(m - m.conj().T)) > TAU_HERM:
            raise InvalidStateError("matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > TAU_NORM:
            raise InvalidStateError(f"trace {np.trace(m).real!r} differs from 1")
        m = 0.5 * (m + m.conj().T)
        evals, evecs = np.linalg.eigh(m)
        if evals[0] < -TAU_PSD:
            raise InvalidStateError(f"negative eigenvalue {evals[0]:.3e}")
        object.__setattr__(self, "matrix", _readonly(m))
        object.__setattr__(self, "dims", dims)
        ev = np.clip(evals, 0.0, 1.0)
        ev.setflags(write=False)
        evecs.setflags(write=False)
        object.__setattr__(self, "_eig", (ev, evecs))

    @classmethod
    def from_vector(cls, psi, dims=None) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > TAU_NORM:
            raise InvalidStateError(f"state vector has norm {norm!r}")
        return cls(np.outer(psi, psi.conj()), dims if dims is not None else (psi.size,))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues clamped to [0, 1], ascending."""
        return self._eig[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eig[1]

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.matrix, other.matrix), self.dims + other.dims)


def as_state(rho, dims=None) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    rho = np.asarray(rho, dtype=complex)
    return DensityMatrix(rho, dims if dims is not None else (rho.shape[0],))


def entropy_of_spectrum(probs) -> float:
    """Shannon entropy in bits; entries below ``EPS_EIG`` count as zero."""
    p = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
    p = p[p > EPS_EIG]
    return float(-np.sum(p * np.log2(p))) + 0.0


def von_neumann_entropy(rho) -> float:
    """-Tr(rho log2 rho) from the clamped spectrum."""
    return entropy_of_spectrum(as_state(rho).eigenvalues)


def partial_trace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    """Reduced state on the single factor ``keep``."""
    rho = as_state(rho)
    dims = rho.dims
    if len(dims) < 2:
        raise DimensionError("partial trace needs at least two declared factors")
    if not 0 <= keep < len(dims):
        raise DimensionError(f"factor index {keep} out of range for dims {dims}")
    n = len(dims)
    t = rho.matrix.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for i in range(n):
        if i != keep:
            col[i] = row[i]
    spec = "".join(row) + "".join(col) + "->" + row[keep] + col[keep]
    red = np.einsum(spec, t)
    return DensityMatrix(0.5 * (red + red.conj().T), (dims[keep],))


def _basis_matrix(basis) -> np.ndarray:
    """Columns are the basis vectors."""
    vectors = getattr(basis, "matrix", basis)
    return np.asarray(vectors, dtype=complex)


def dephase_in_basis(rho_ab: DensityMatrix, basis) -> DensityMatrix:
    """Apply the measurement channel of ``basis`` to factor A of ``rho_ab``.

    Returns sum_i |u_i><u_i| (x) Tr_A(rho_AB |u_i><u_i|), the classical-quantum
    state of outcome register and memory.
    """
    rho_ab = as_state(rho_ab)
    if len(rho_ab.dims) != 2:
        raise DimensionError("dephasing expects a bipartite state (dA, dB)")
    da, db = rho_ab.dims
    u = _basis_matrix(basis)
    if u.shape != (da, da):
        raise DimensionError(f"basis of dimension {u.shape[0]} on factor of dimension {da}")
    t = rho_ab.matrix.reshape(da, db, da, db)
    # conditional (unnormalised) memory states: <u_i| rho |u_i> on A
    cond = np.einsum("ai,abcd,ci->ibd", u.conj(), t, u)
    proj = np.einsum("ai,bi->iab", u, u.conj())
    out = np.einsum("iac,ibd->abcd", proj, cond).reshape(da * db, da * db)
    return DensityMatrix(0.5 * (out + out.conj().T), (da, db))


def conditional_entropy(rho_ab: DensityMatrix) -> float:
    """H(A|B) = H(rho_AB) - H(rho_B)."""
    rho_ab = as_state(rho_ab)
    if len(rho_ab.dims) != 2:
        raise DimensionError("conditional entropy needs two declared factors")
    return von_neumann_entropy(rho_ab) - von_neumann_entropy(partial_trace(rho_ab, 1))


def outcome_distribution(rho, basis) -> np.ndarray:
    """Probabilities <u_j|rho|u_j> of measuring ``rho`` in ``basis``."""
    rho = as_state(rho)
    u = _basis_matrix(basis)
    if u.shape[0] != rho.dim:
        raise DimensionError(f"basis of dimension {u.shape[0]} for state of dimension {rho.dim}")
    p = np.einsum("ai,ab,bi->i", u.conj(), rho.matrix, u).real
    return np.clip(p, 0.0, None)


def random_state(d: int, kind: str = "mixed", seed=None, dims: Sequence[int] | None = None) -> DensityMatrix:
    """Sample a random state of total dimension ``d``.

    ``kind="pure"`` gives a Haar-random projector, ``kind="mixed"`` a sample of
    the Hilbert-Schmidt ensemble (G G^dagger / Tr for square Ginibre G).
    ``seed`` may be an int, a sequence of ints or a ``numpy.random.Generator``.
    """
    if d < 1:
        raise DimensionError("dimension must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    dims = tuple(dims) if dims is not None else (d,)
    if kind == "pure":
        psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        psi /= np.linalg.norm(psi)
        return DensityMatrix(np.outer(psi, psi.conj()), dims)
    if kind == "mixed":
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        m = g @ g.conj().T
        return DensityMatrix(m / np.trace(m).real, dims)
    raise ValueError(f"unknown state kind {kind!r}")


def bell_state(d: int = 2) -> DensityMatrix:
    """Maximally entangled state sum_i |ii>/sqrt(d) on d x d."""
    psi = np.zeros(d * d, dtype=complex)
    psi[[i * d + i for i in range(d)]] = 1 / np.sqrt(d)
    return DensityMatrix.from_vector(psi, (d, d))


def maximally_mixed(d: int, dims=None) -> DensityMatrix:
    return DensityMatrix(np.eye(d) / d, dims if dims is not None else (d,))


def with_trivial_memory(rho_a) -> DensityMatrix:
    """Embed a single-system state as rho_A (x) 1 with d_B = 1."""
    rho_a = as_state(rho_a)
    return DensityMatrix(rho_a.matrix, (rho_a.dim, 1))
