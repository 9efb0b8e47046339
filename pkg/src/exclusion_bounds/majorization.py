"""Majorization bounds for tensor products of outcome distributions.

For an ensemble of N bases on C^d, every state gives a joint vector
``q = p^1 (x) ... (x) p^N`` of length d^N. The vector ``omega`` built from the
capitals ``Omega_k`` (state-maximised sum of the k largest entries of q)
majorizes q for every state. Two routes are provided:

* ``omega_exact_pair`` -- N = 2, from the largest singular values of the
  submatrices of the basis-change unitary.
* ``omega_oracle`` / ``omega_from_oracle`` -- any N, multistart projected
  gradient ascent over pure states. This is a lower estimate of a maximum,
  so the assembled bound is validated against sampled states and inflated on
  any observed violation.
"""
from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionError
from .measurements import MeasurementEnsemble, chain_kernel, cyclic_orders
from .quantum import as_state, random_state
from .tolerances import EPS_LOG, TAU_MAJ, TAU_NUM

log = logging.getLogger(__name__)

EXACT = "exact-submatrix"
ORACLE = "stochastic-oracle"

DEFAULT_RESTARTS = 64
DEFAULT_ITERATIONS = 500
DEFAULT_VALIDATION_SAMPLES = 500
ROUNDING_SLACK = 1e-12  # partial-sum excess attributed to floating point


class OracleWarning(UserWarning):
    """An oracle-estimated capital had to be enlarged after a dominance violation."""


@dataclass(frozen=True)
class MajorizationBound:
    """Capitals ``Omega_k`` (k = 1..d^N) and the bound vector ``omega``.

    ``certificates[k-1]`` holds ``(achieved value, best pure state or None)``
    for each capital; ``inflation`` records how much each capital was raised
    by dominance validation (all zero for the exact route).
    """

    capitals: np.ndarray
    method: str
    certificates: tuple = ()
    inflation: np.ndarray = field(default=None)

    @property
    def omega(self) -> np.ndarray:
        return np.diff(np.concatenate([[0.0], self.capitals]))

    @property
    def heuristic(self) -> bool:
        return self.method == ORACLE

    def __len__(self):
        return self.capitals.size

    def scaled(self, factor: float) -> "MajorizationBound":
        """Copy with every capital below 1 multiplied by ``factor`` (fault injection)."""
        caps = self.capitals.copy()
        caps[:-1] = caps[:-1] * factor
        return MajorizationBound(caps, self.method, self.certificates, self.inflation)


def _finalize_capitals(caps: np.ndarray) -> np.ndarray:
    caps = np.minimum(np.asarray(caps, dtype=float), 1.0)
    caps = np.maximum.accumulate(caps)
    caps[-1] = 1.0
    return caps


# -- joint distributions -------------------------------------------------------

def tensor_distribution(rho, ensemble: MeasurementEnsemble) -> np.ndarray:
    """Joint product distribution ``q[i_1, ..., i_N]`` flattened in C order."""
    rho = as_state(rho)
    if rho.dim != ensemble.dim:
        raise DimensionError(f"state of dimension {rho.dim} for a d={ensemble.dim} ensemble")
    q = np.ones(1)
    for b in ensemble:
        p = np.einsum("ai,ab,bi->i", b.matrix.conj(), rho.matrix, b.matrix).real
        q = np.multiply.outer(q, np.clip(p, 0.0, None)).ravel()
    return q


def sorted_partial_sums(q: np.ndarray) -> np.ndarray:
    return np.cumsum(np.sort(q)[::-1])


def dominance_violation(bound: MajorizationBound, ensemble: MeasurementEnsemble, states) -> float:
    """Largest ``sum of k largest q - Omega_k`` over ``states`` and k (<= 0 when dominated)."""
    worst = -np.inf
    for rho in states:
        worst = max(worst, float(np.max(sorted_partial_sums(tensor_distribution(rho, ensemble)) - bound.capitals)))
    return worst


# -- exact route for two measurements -----------------------------------------

def _pair_unitary(source) -> np.ndarray:
    if isinstance(source, MeasurementEnsemble):
        if source.n != 2:
            raise DimensionError(f"exact majorization bound needs N = 2, got N = {source.n}; use the oracle")
        return source[0].matrix.conj().T @ source[1].matrix
    u = np.asarray(source, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError("expected a square basis-change matrix")
    return u


def submatrix_norms(u: np.ndarray) -> np.ndarray:
    """``s[k-1]`` = largest spectral norm over submatrices with rows + cols = k + 1."""
    d = u.shape[0]
    s = np.zeros(2 * d - 1)
    subsets = [c for r in range(1, d + 1) for c in itertools.combinations(range(d), r)]
    for rows in subsets:
        block = u[list(rows)]
        for cols in subsets:
            k = len(rows) + len(cols) - 1
            if s[k - 1] >= 1.0:
                continue
            s[k - 1] = max(s[k - 1], np.linalg.norm(block[:, list(cols)], 2))
    return np.minimum(s, 1.0)


def omega_exact_pair(source) -> MajorizationBound:
    """Majorization bound for two bases.

    ``source`` is a two-basis ensemble or the matrix ``U[i, j] = <u1_i|u2_j>``.
    ``Omega_k = ((1 + s_k) / 2)^2`` where ``s_k`` is the largest singular value
    over submatrices of U whose row and column counts add to k + 1.
    """
    u = _pair_unitary(source)
    d = u.shape[0]
    s = submatrix_norms(u)
    caps = np.ones(d * d)
    caps[: s.size] = ((1.0 + s) / 2.0) ** 2
    caps = _finalize_capitals(caps)
    certs = tuple((float(c), None) for c in caps)
    return MajorizationBound(caps, EXACT, certs, np.zeros(d * d))


# -- stochastic oracle ------------------------------------------------------------

def _restart_states(ensemble: MeasurementEnsemble, restarts: int, seed: int) -> np.ndarray:
    d = ensemble.dim
    rows = []
    for r in range(restarts):
        rng = np.random.default_rng([int(seed), r])
        z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        rows.append(z / np.linalg.norm(z))
    # basis vectors are cheap, often optimal, starting points
    for b in ensemble:
        rows.extend(b.matrix.T)
    return np.array(rows, dtype=complex)


def _ascend(ensemble: MeasurementEnsemble, ks: np.ndarray, psi0: np.ndarray, iterations: int, step: float):
    """Batched gradient ascent of the top-k mass for every k in ``ks``.

    Returns (best value per k, best state per k).
    """
    n, d = ensemble.n, ensemble.dim
    mats = [b.matrix for b in ensemble]
    K, R = ks.size, psi0.shape[0]
    psi = np.broadcast_to(psi0, (K, R, d)).copy()
    kcol = ks[:, None, None]
    best_val = np.full(K, -np.inf)
    best_psi = np.zeros((K, d), dtype=complex)
    ar = np.arange(d ** n)
    for it in range(iterations + 1):
        amps = [psi @ u.conj() for u in mats]
        probs = [np.abs(a) ** 2 for a in amps]
        q = probs[0]
        for p in probs[1:]:
            q = (q[..., :, None] * p[..., None, :]).reshape(K, R, -1)
        order = np.argsort(-q, axis=-1, kind="stable")
        ranks = np.empty_like(order)
        np.put_along_axis(ranks, order, np.broadcast_to(ar, order.shape), axis=-1)
        mask = (ranks < kcol).astype(float)
        vals = np.sum(q * mask, axis=-1)
        arg = np.argmax(vals, axis=1)
        top = vals[np.arange(K), arg]
        better = top > best_val
        best_val = np.where(better, top, best_val)
        best_psi[better] = psi[np.arange(K), arg][better]
        if it == iterations:
            break
        m = mask.reshape((K, R) + (d,) * n)
        grad = np.zeros_like(psi)
        for a in range(n):
            w = m
            for b in range(n):
                if b != a:
                    shape = [K, R] + [1] * n
                    shape[2 + b] = d
                    w = w * probs[b].reshape(shape)
            axes = tuple(2 + b for b in range(n) if b != a)
            w = w.sum(axis=axes)
            grad += (w * amps[a]) @ mats[a].T
        psi = psi + step * grad
        psi /= np.linalg.norm(psi, axis=-1, keepdims=True)
    return best_val, best_psi


def omega_oracle(
    ensemble: MeasurementEnsemble,
    k: int,
    restarts: int = DEFAULT_RESTARTS,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
) -> float:
    """Best found value of max over pure states of the sum of the k largest
    entries of the joint distribution. A lower estimate of ``Omega_k``."""
    total = ensemble.dim ** ensemble.n
    if not 1 <= k <= total:
        raise ValueError(f"k must lie in [1, {total}], got {k}")
    if k == total:
        return 1.0
    psi0 = _restart_states(ensemble, restarts, seed)
    val, _ = _ascend(ensemble, np.array([k]), psi0, iterations, step=0.5)
    return float(min(val[0], 1.0))


def omega_from_oracle(
    ensemble: MeasurementEnsemble,
    restarts: int = DEFAULT_RESTARTS,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    validation_samples: int = DEFAULT_VALIDATION_SAMPLES,
    chunk: int = 4,
) -> MajorizationBound:
    """Assemble a majorization bound for any N from oracle estimates.

    Capitals are made monotone and capped at 1, then checked against
    ``validation_samples`` random pure and Hilbert-Schmidt mixed states; any
    capital exceeded by a sample is raised to the observed value plus
    ``TAU_MAJ`` and an ``OracleWarning`` is emitted.
    """
    d, n = ensemble.dim, ensemble.n
    total = d ** n
    psi0 = _restart_states(ensemble, restarts, seed)
    caps = np.ones(total)
    certs = [(1.0, None)] * total
    k = 1
    while k < total:
        ks = np.arange(k, min(k + chunk, total))
        vals, states = _ascend(ensemble, ks, psi0, iterations, step=0.5)
        for kk, v, s in zip(ks, vals, states):
            caps[kk - 1] = min(v, 1.0)
            certs[kk - 1] = (float(v), s.copy())
        if np.max(vals) >= 1.0 - 1e-13:
            break
        k += chunk
    # capitals past the first one that reached 1 were never computed and stay 1
    caps = _finalize_capitals(caps)
    inflation = np.zeros(total)
    if validation_samples:
        rng = np.random.default_rng([int(seed), 0x5EED])
        worst = np.full(total, -np.inf)
        for t in range(validation_samples):
            rho = random_state(d, "pure" if t % 2 == 0 else "mixed", rng)
            worst = np.maximum(worst, sorted_partial_sums(tensor_distribution(rho, ensemble)))
        excess = worst - caps
        if np.any(excess > ROUNDING_SLACK):
            bump = np.where(excess > ROUNDING_SLACK, excess + TAU_MAJ, 0.0)
            inflation = bump
            warnings.warn(
                f"oracle capitals enlarged after dominance violation (max {excess.max():.3e}) for {ensemble!r}",
                OracleWarning,
                stacklevel=2,
            )
            caps = _finalize_capitals(caps + bump)
    return MajorizationBound(caps, ORACLE, tuple(certs), inflation)


@lru_cache(maxsize=256)
def _omega_cached(ensemble, restarts, iterations, seed, validation_samples):
    if ensemble.n == 2:
        return omega_exact_pair(ensemble)
    return omega_from_oracle(ensemble, restarts, iterations, seed, validation_samples)


def omega_for_ensemble(
    ensemble: MeasurementEnsemble,
    restarts: int = DEFAULT_RESTARTS,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    validation_samples: int = DEFAULT_VALIDATION_SAMPLES,
) -> MajorizationBound:
    """Exact bound for N = 2, validated oracle bound otherwise (cached per ensemble)."""
    return _omega_cached(ensemble, restarts, iterations, seed, validation_samples)


# -- the A and B vectors --------------------------------------------------------

def build_A_vectors(ensemble: MeasurementEnsemble, sort: bool = True) -> np.ndarray:
    """Row ``i`` (a flattened multi-index) is the d^N vector over ``j`` of

        prod over cyclic shifts s of K_s[j_first(s), i_last(s)]

    where ``K_s`` is the chain kernel of the shift. For N = 2 the row for
    ``(i1, i2)`` is ``c(u1_j1, u2_i2) c(u2_j2, u1_i1)``. Rows are sorted
    descending unless ``sort`` is false.
    """
    n, d = ensemble.n, ensemble.dim
    a = np.ones((1,) * (2 * n))
    for order in cyclic_orders(n):
        k = chain_kernel(ensemble, order)
        first, last = order[0], order[-1]
        shape = [1] * (2 * n)
        shape[last] = d
        shape[n + first] = d
        a = a * k.T.reshape(shape)
    a = np.broadcast_to(a, (d,) * (2 * n)).reshape(d ** n, d ** n)
    if sort:
        a = -np.sort(-a, axis=1)
    return np.ascontiguousarray(a)


def B_vector(bound: MajorizationBound, A: np.ndarray, ordering: str = "descending") -> np.ndarray:
    """Entries ``log2(omega . A_i)`` (floored at ``EPS_LOG``), sorted per ``ordering``."""
    if A.shape[1] != len(bound):
        raise DimensionError(f"A rows of length {A.shape[1]} for a bound of length {len(bound)}")
    rows = -np.sort(-A, axis=1)
    b = np.log2(np.maximum(rows @ bound.omega, EPS_LOG))
    if ordering == "descending":
        return np.sort(b)[::-1]
    if ordering == "ascending":
        return np.sort(b)
    raise ValueError(f"ordering must be 'ascending' or 'descending', got {ordering!r}")


def omega_dot_B(bound: MajorizationBound, A: np.ndarray, ordering: str = "descending") -> float:
    """Inner product of ``omega`` with the sorted B vector."""
    return float(bound.omega @ B_vector(bound, A, ordering))


def check_bound_invariants(bound: MajorizationBound) -> None:
    caps = bound.capitals
    if np.any(np.diff(caps) < -TAU_NUM):
        raise ValueError("capitals must be nondecreasing")
    if abs(caps[-1] - 1.0) > TAU_NUM:
        raise ValueError("last capital must be 1")
    if np.any(bound.omega < -TAU_NUM):
        raise ValueError("omega entries must be nonnegative")
