"""Left-hand sides and every named bound for a (state, ensemble) pair.

Bounds come in three kinds:

* ``info``    -- upper bounds on sum_m I(M_m:B)
* ``eur``     -- lower bounds on sum_m H(M_m|B)
* ``entropy`` -- lower bounds on sum_m H(M_m) for the A-marginal alone

Every bound function takes ``(state, ensemble)``. Passing ``state=None``
returns the state-independent part: trivial memory and H(A) set to zero,
which is how the comparison sweeps drop the common memory terms.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionError, InapplicableBoundError, UnknownBoundError
from .majorization import (
    MajorizationBound,
    _omega_cached,
    build_A_vectors,
    omega_dot_B,
    omega_for_ensemble,
)
from .measurements import (
    MeasurementBasis,
    MeasurementEnsemble,
    chain_coefficients,
    cyclic_orders,
)
from .quantum import (
    DensityMatrix,
    as_state,
    dephase_in_basis,
    entropy_of_spectrum,
    outcome_distribution,
    partial_trace,
    von_neumann_entropy,
    with_trivial_memory,
)
from .tolerances import TAU_VERIFY, TIE_DECIMALS


# -- states and memory terms ---------------------------------------------------

def bipartite(state, ensemble: MeasurementEnsemble | None = None) -> DensityMatrix:
    """Coerce ``state`` to a (dA, dB) state; single-system states get d_B = 1."""
    state = as_state(state)
    if len(state.dims) == 1:
        state = with_trivial_memory(state)
    if len(state.dims) != 2:
        raise DimensionError(f"expected a bipartite state, got factor dims {state.dims}")
    if ensemble is not None and state.dims[0] != ensemble.dim:
        raise DimensionError(f"measured factor has dimension {state.dims[0]}, ensemble acts on {ensemble.dim}")
    return state


@dataclass(frozen=True)
class MemoryTerms:
    h_a: float = 0.0
    h_b: float = 0.0
    h_ab: float = 0.0

    @property
    def h_a_given_b(self) -> float:
        return self.h_ab - self.h_b

    def weighted(self, n: int) -> float:
        """N H(B) - (N-1) H(A)."""
        return n * self.h_b - (n - 1) * self.h_a

    def as_dict(self, n: int) -> dict:
        return {
            "H(A)": self.h_a,
            "H(B)": self.h_b,
            "H(AB)": self.h_ab,
            "H(A|B)": self.h_a_given_b,
            "NH(B)-(N-1)H(A)": self.weighted(n),
        }


def memory_terms(state) -> MemoryTerms:
    if state is None:
        return MemoryTerms()
    state = bipartite(state)
    return MemoryTerms(
        von_neumann_entropy(partial_trace(state, 0)),
        von_neumann_entropy(partial_trace(state, 1)),
        von_neumann_entropy(state),
    )


def mutual_information(rho_ab, basis: MeasurementBasis) -> float:
    """I(M:B) = H(M) - H(M|B) for measuring ``basis`` on factor A."""
    rho_ab = bipartite(rho_ab)
    h_m = entropy_of_spectrum(outcome_distribution(partial_trace(rho_ab, 0), basis))
    return h_m - conditional_measurement_entropy(rho_ab, basis)


def conditional_measurement_entropy(rho_ab, basis: MeasurementBasis) -> float:
    """H(M|B) = H(rho_MB) - H(rho_B)."""
    rho_ab = bipartite(rho_ab)
    return von_neumann_entropy(dephase_in_basis(rho_ab, basis)) - von_neumann_entropy(partial_trace(rho_ab, 1))


def _require(ensemble: MeasurementEnsemble, name: str, n=None, n_max=None):
    if n is not None and ensemble.n != n:
        raise InapplicableBoundError(f"{name} needs N = {n} measurements, got N = {ensemble.n}")
    if n_max is not None and ensemble.n > n_max:
        raise InapplicableBoundError(f"{name} enumerates permutations and is limited to N <= {n_max}")


# -- two-measurement bounds from overlaps alone --------------------------------

def _pair_overlap(ensemble) -> np.ndarray:
    return ensemble.overlap(0, 1)


def bound_mu(ensemble: MeasurementEnsemble) -> float:
    """-log2 c_max: lower bound on H(M1) + H(M2)."""
    _require(ensemble, "MU", n=2)
    return -math.log2(_pair_overlap(ensemble).max())


def bound_hall(ensemble: MeasurementEnsemble) -> float:
    """log2(d^2 c_max)."""
    _require(ensemble, "r_H", n=2)
    d = ensemble.dim
    return math.log2(d * d * _pair_overlap(ensemble).max())


def bound_grudka(ensemble: MeasurementEnsemble) -> float:
    """log2(d * sum of the d largest overlaps)."""
    _require(ensemble, "r_G", n=2)
    d = ensemble.dim
    c = np.round(_pair_overlap(ensemble).ravel(), TIE_DECIMALS)
    largest = np.sort(c)[::-1][:d]
    return math.log2(d * largest.sum())


def bound_coles_piani(ensemble: MeasurementEnsemble) -> float:
    """min over both directions of log2(d * sum_i max_j c_ij)."""
    _require(ensemble, "r_CP", n=2)
    d = ensemble.dim
    c = _pair_overlap(ensemble)
    return min(math.log2(d * c.max(axis=1).sum()), math.log2(d * c.max(axis=0).sum()))


# -- majorization bounds ---------------------------------------------------------

@lru_cache(maxsize=256)
def _a_vectors(ensemble):
    return build_A_vectors(ensemble)


def omega_term(ensemble: MeasurementEnsemble, ordering: str, omega: MajorizationBound | None = None) -> float:
    """``omega . B`` divided by N, for an explicit ordering."""
    omega = omega if omega is not None else omega_for_ensemble(ensemble)
    return omega_dot_B(omega, _a_vectors(ensemble), ordering) / ensemble.n


def info_omega_term(ensemble: MeasurementEnsemble, ordering: str = "auto", omega=None) -> tuple:
    """Majorization term used by the information upper bounds.

    With ``ordering="auto"`` the ascending pairing is used when
    ``log2 d^N + term >= (N-1) log2 d``: then the full bound is at least
    N H(B), which already dominates sum_m I(M_m:B), so the pairing is safe.
    Otherwise the descending pairing (valid for every state by majorization)
    is used. Returns ``(term, ordering used)``.
    """
    if ordering != "auto":
        return omega_term(ensemble, ordering, omega), ordering
    n, d = ensemble.n, ensemble.dim
    asc = omega_term(ensemble, "ascending", omega)
    if n * math.log2(d) + asc >= (n - 1) * math.log2(d):
        return asc, "ascending"
    return omega_term(ensemble, "descending", omega), "descending"


def eur_hybrid_pair(state, ensemble: MeasurementEnsemble, omega=None) -> float:
    """-(1/2) omega.B + H(A) - 2H(B): lower bound on H(M1|B) + H(M2|B)."""
    _require(ensemble, "eur_hybrid", n=2)
    mem = memory_terms(state)
    return -omega_term(ensemble, "descending", omega) + mem.h_a - 2 * mem.h_b


def bound_pair_majorization(state, ensemble: MeasurementEnsemble, omega=None, ordering="auto") -> float:
    """log2 d^2 + (1/2) omega.B + 2H(B) - H(A)."""
    _require(ensemble, "thm1", n=2)
    term, _ = info_omega_term(ensemble, ordering, omega)
    return 2 * math.log2(ensemble.dim) + term + memory_terms(state).weighted(2)


def eur_multi_lower(state, ensemble: MeasurementEnsemble, omega=None) -> float:
    """-(1/N) omega.B + (N-1)H(A) - NH(B): lower bound on sum_m H(M_m|B)."""
    n = ensemble.n
    return -omega_term(ensemble, "descending", omega) - memory_terms(state).weighted(n)


def bound_rx(state, ensemble: MeasurementEnsemble, omega=None, ordering="auto") -> float:
    """log2 d^N + (1/N) omega.B + NH(B) - (N-1)H(A)."""
    n = ensemble.n
    term, _ = info_omega_term(ensemble, ordering, omega)
    return n * math.log2(ensemble.dim) + term + memory_terms(state).weighted(n)


# -- permutation / chain bounds ------------------------------------------------

MAX_PERMUTATION_N = 6


@lru_cache(maxsize=4096)
def _chain_log_max(ensemble, order) -> float:
    return math.log2(chain_coefficients(ensemble, order).max())


@lru_cache(maxsize=4096)
def _chain_log_sum(ensemble, order, power=1.0) -> float:
    return math.log2(np.sum(chain_coefficients(ensemble, order) ** power))


@lru_cache(maxsize=1024)
def _tuple_term(ensemble, members: frozenset) -> float:
    """min over orderings of the members of log2 max_last chain coefficient."""
    return min(_chain_log_max(ensemble, p) for p in itertools.permutations(sorted(members)))


def bound_chain_max(state, ensemble: MeasurementEnsemble) -> float:
    _require(ensemble, "U1", n_max=MAX_PERMUTATION_N)
    n, d = ensemble.n, ensemble.dim
    best = min(_chain_log_max(ensemble, p) for p in itertools.permutations(range(n)))
    return n * math.log2(d) + memory_terms(state).weighted(n) + best


def bound_chain_sum(state, ensemble: MeasurementEnsemble) -> float:
    _require(ensemble, "U2", n_max=MAX_PERMUTATION_N)
    n, d = ensemble.n, ensemble.dim
    best = min(_chain_log_sum(ensemble, p) for p in itertools.permutations(range(n)))
    return (n - 1) * math.log2(d) + memory_terms(state).weighted(n) + best


def _unique_families(families):
    seen, out = set(), []
    for name, fam in families:
        key = frozenset(fam)
        if key and key not in seen:
            seen.add(key)
            out.append((name, sorted(fam, key=lambda t: sorted(t))))
    return out


def pair_families(n: int) -> list:
    """Pair covers used for U3: cyclic, star and all pairs (duplicates removed)."""
    cyc = {frozenset((m, (m + 1) % n)) for m in range(n)}
    star = {frozenset((0, m)) for m in range(1, n)}
    every = {frozenset(p) for p in itertools.combinations(range(n), 2)}
    return _unique_families([("cyclic-pairs", cyc), ("star-pairs", star), ("all-pairs", every)])


def covering_families(n: int) -> list:
    """Tuple families searched by r_opt, for tuple sizes L = 2..N.

    Pair covers as for U3; for 2 < L < N the cyclic windows of length L and
    all L-subsets; for L = N the single full tuple.
    """
    fams = list(pair_families(n))
    for size in range(3, n + 1):
        windows = {frozenset((s + i) % n for i in range(size)) for s in range(n)}
        subsets = {frozenset(c) for c in itertools.combinations(range(n), size)}
        fams += [(f"cyclic-{size}-windows", windows), (f"all-{size}-subsets", subsets)]
    return _unique_families(fams)


def _family_average(ensemble, family) -> float:
    return sum(_tuple_term(ensemble, frozenset(t)) for t in family) / len(family)


def _u3_parts(ensemble):
    return min((_family_average(ensemble, fam), name) for name, fam in pair_families(ensemble.n))


def bound_pair_cover(state, ensemble: MeasurementEnsemble) -> float:
    _require(ensemble, "U3", n_max=MAX_PERMUTATION_N)
    n, d = ensemble.n, ensemble.dim
    mem = memory_terms(state)
    return n * math.log2(d) + n / 2 * (2 * mem.h_b - mem.h_a) + _u3_parts(ensemble)[0]


@lru_cache(maxsize=256)
def ropt_family(ensemble) -> tuple:
    """(average chain term, family name) of the best covering family."""
    return min((_family_average(ensemble, fam), name) for name, fam in covering_families(ensemble.n))


def bound_ropt(state, ensemble: MeasurementEnsemble) -> float:
    _require(ensemble, "r_opt", n_max=MAX_PERMUTATION_N)
    n, d = ensemble.n, ensemble.dim
    mem = memory_terms(state)
    return n * math.log2(d) + n / 2 * (2 * mem.h_b - mem.h_a) + ropt_family(ensemble)[0]


def bound_three_chain(state, ensemble: MeasurementEnsemble) -> float:
    """-2H(A|B) + sum over the three cyclic chains of log2 sum_i b_i^(1/3)."""
    _require(ensemble, "lemma2", n=3)
    mem = memory_terms(state)
    return -2 * mem.h_a_given_b + sum(_chain_log_sum(ensemble, o, 1 / 3) for o in cyclic_orders(3))


@lru_cache(maxsize=256)
def ry_parts(ensemble) -> tuple:
    """State-independent part of r_y and the chains that achieve it.

    For a set S of chains with pairwise distinct final measurements, each
    weighted 1/|S|, concavity of log gives
    ``(N - |S|) log2 d + sum_{chain in S} log2 sum_i b_i^(1/|S|)``.
    The minimum is taken over |S| and over the chains (any ordering of all N
    measurements) for each final measurement.
    """
    n, d = ensemble.n, ensemble.dim
    perms = list(itertools.permutations(range(n)))
    best = (math.inf, ())
    for size in range(1, n + 1):
        per_last = []
        for last in range(n):
            cands = [(_chain_log_sum(ensemble, p, 1 / size), p) for p in perms if p[-1] == last]
            per_last.append(min(cands))
        per_last.sort()
        chosen = per_last[:size]
        value = (n - size) * math.log2(d) + sum(v for v, _ in chosen)
        if value < best[0]:
            best = (value, tuple(p for _, p in chosen))
    return best


def bound_ry(state, ensemble: MeasurementEnsemble) -> float:
    """State-independent r_y part plus the smaller of the two memory terms
    NH(B) - (N-1)H(A) and -(N-1)H(A|B)."""
    _require(ensemble, "r_y", n_max=MAX_PERMUTATION_N)
    n = ensemble.n
    mem = memory_terms(state)
    return ry_parts(ensemble)[0] + min(mem.weighted(n), -(n - 1) * mem.h_a_given_b)


def classical_pair_lower(state, ensemble: MeasurementEnsemble) -> float:
    """Symmetrised state-dependent lower bound on H(M1) + H(M2) for rho_A."""
    _require(ensemble, "classical_pair", n=2)
    if state is None:
        raise InapplicableBoundError("classical_pair is state dependent and needs a state")
    rho_a = partial_trace(bipartite(state, ensemble), 0)
    p1 = outcome_distribution(rho_a, ensemble[0])
    p2 = outcome_distribution(rho_a, ensemble[1])
    c = _pair_overlap(ensemble)

    def directed(p_out, mix):
        keep = p_out > 0
        return float(np.sum(p_out[keep] * np.log2(mix[keep])))

    return von_neumann_entropy(rho_a) - 0.5 * (directed(p2, p1 @ c) + directed(p1, c @ p2))


def clear_caches() -> None:
    """Drop all per-ensemble caches (majorization bounds, A vectors, chain terms)."""
    for f in (_omega_cached, _a_vectors, _chain_log_max, _chain_log_sum, _tuple_term, ropt_family, ry_parts):
        f.cache_clear()


# -- catalog -------------------------------------------------------------------

@dataclass(frozen=True)
class BoundSpec:
    name: str
    kind: str  # info | eur | entropy
    func: object
    n: int | None = None
    n_max: int | None = None
    uses_omega: bool = False
    state_dependent: bool = False

    def applicable(self, ensemble: MeasurementEnsemble) -> bool:
        if self.n is not None and ensemble.n != self.n:
            return False
        return self.n_max is None or ensemble.n <= self.n_max


def _with_memory(si_func):
    """Overlap-only bound minus H(A|B), its quantum-memory form."""

    def f(state, ensemble, **_):
        return si_func(ensemble) - memory_terms(state).h_a_given_b
    return f


CATALOG = {
    s.name: s
    for s in [
        BoundSpec("MU", "entropy", lambda st, e, **_: bound_mu(e), n=2),
        BoundSpec("r_H", "info", _with_memory(bound_hall), n=2),
        BoundSpec("r_G", "info", _with_memory(bound_grudka), n=2),
        BoundSpec("r_CP", "info", _with_memory(bound_coles_piani), n=2),
        BoundSpec("U1", "info", lambda st, e, **_: bound_chain_max(st, e), n_max=MAX_PERMUTATION_N),
        BoundSpec("U2", "info", lambda st, e, **_: bound_chain_sum(st, e), n_max=MAX_PERMUTATION_N),
        BoundSpec("U3", "info", lambda st, e, **_: bound_pair_cover(st, e), n_max=MAX_PERMUTATION_N),
        BoundSpec("thm1", "info", lambda st, e, omega=None, ordering="auto": bound_pair_majorization(st, e, omega, ordering),
                  n=2, uses_omega=True),
        BoundSpec("r_x", "info", lambda st, e, omega=None, ordering="auto": bound_rx(st, e, omega, ordering),
                  uses_omega=True),
        BoundSpec("r_opt", "info", lambda st, e, **_: bound_ropt(st, e), n_max=MAX_PERMUTATION_N),
        BoundSpec("lemma2", "info", lambda st, e, **_: bound_three_chain(st, e), n=3),
        BoundSpec("r_y", "info", lambda st, e, **_: bound_ry(st, e), n_max=MAX_PERMUTATION_N),
        BoundSpec("eur_hybrid", "eur", lambda st, e, omega=None, **_: eur_hybrid_pair(st, e, omega),
                  n=2, uses_omega=True),
        BoundSpec("eur_multi", "eur", lambda st, e, omega=None, **_: eur_multi_lower(st, e, omega),
                  uses_omega=True),
        BoundSpec("classical_pair", "entropy", lambda st, e, **_: classical_pair_lower(st, e),
                  n=2, state_dependent=True),
    ]
}

BOUND_NAMES = tuple(CATALOG)
INFO_BOUNDS = tuple(n for n, s in CATALOG.items() if s.kind == "info")


def resolve_bounds(names, ensemble: MeasurementEnsemble | None = None) -> list:
    """Validate a list of bound names (and applicability to ``ensemble``)."""
    out = []
    for name in names:
        if name not in CATALOG:
            raise UnknownBoundError(f"unknown bound {name!r}; known: {', '.join(BOUND_NAMES)}")
        if ensemble is not None and not CATALOG[name].applicable(ensemble):
            raise InapplicableBoundError(f"bound {name!r} is not applicable to N = {ensemble.n} measurements")
        out.append(name)
    return out


def evaluate_bound(name: str, state, ensemble: MeasurementEnsemble, omega=None, ordering="auto") -> float:
    resolve_bounds([name], ensemble)
    spec = CATALOG[name]
    if spec.uses_omega:
        return float(spec.func(state, ensemble, omega=omega, ordering=ordering))
    return float(spec.func(state, ensemble))


def state_independent(name: str, ensemble: MeasurementEnsemble, **kw) -> float:
    return evaluate_bound(name, None, ensemble, **kw)


# -- full report -------------------------------------------------------------------

@dataclass
class BoundReport:
    """All left-hand sides and bounds for one (state, ensemble) pair.

    ``slack[name]`` is positive when the inequality holds: bound - LHS for
    information bounds and LHS - bound for entropic lower bounds.
    """

    n: int
    dim: int
    info_terms: list
    conditional_entropies: list
    entropies: list
    lhs_info_sum: float
    lhs_entropy_sum: float
    lhs_classical_entropy_sum: float
    bounds: dict
    kinds: dict
    slack: dict
    memory_terms: dict
    heuristic: list = field(default_factory=list)
    orderings: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def violations(self, tol: float = TAU_VERIFY) -> dict:
        return {k: -v for k, v in self.slack.items() if v < -tol}

    def ok(self, tol: float = TAU_VERIFY) -> bool:
        return not self.violations(tol)

    def to_dict(self) -> dict:
        return {
            "N": self.n,
            "d": self.dim,
            "lhs_info_sum": self.lhs_info_sum,
            "lhs_entropy_sum": self.lhs_entropy_sum,
            "lhs_classical_entropy_sum": self.lhs_classical_entropy_sum,
            "mutual_information": self.info_terms,
            "conditional_entropies": self.conditional_entropies,
            "entropies": self.entropies,
            "bounds": self.bounds,
            "kinds": self.kinds,
            "slack": self.slack,
            "memory_terms": self.memory_terms,
            "heuristic": self.heuristic,
            "orderings": self.orderings,
            "details": self.details,
            "violations": self.violations(),
        }


def full_report(state, ensemble: MeasurementEnsemble, bounds=None, omega=None) -> BoundReport:
    """Evaluate every applicable (or every requested) bound for one state."""
    rho = bipartite(state, ensemble)
    names = resolve_bounds(bounds, ensemble) if bounds is not None else [
        n for n, s in CATALOG.items() if s.applicable(ensemble)
    ]
    rho_a = partial_trace(rho, 0)
    info, cond, ent = [], [], []
    for b in ensemble:
        h = entropy_of_spectrum(outcome_distribution(rho_a, b))
        hc = conditional_measurement_entropy(rho, b)
        ent.append(h)
        cond.append(hc)
        info.append(h - hc)
    lhs = {"info": sum(info), "eur": sum(cond), "entropy": sum(ent)}
    mem = memory_terms(rho)
    if any(CATALOG[n].uses_omega for n in names) and omega is None:
        omega = omega_for_ensemble(ensemble)
    values, kinds, slack, orderings, heuristic = {}, {}, {}, {}, []
    for name in names:
        spec = CATALOG[name]
        v = evaluate_bound(name, rho, ensemble, omega=omega)
        values[name] = v
        kinds[name] = spec.kind
        slack[name] = v - lhs["info"] if spec.kind == "info" else lhs[spec.kind] - v
        if spec.uses_omega:
            if spec.kind == "info":
                orderings[name] = info_omega_term(ensemble, "auto", omega)[1]
            else:
                orderings[name] = "descending"
            if omega.heuristic:
                heuristic.append(name)
    details = {}
    if "r_opt" in names:
        details["r_opt_family"] = ropt_family(ensemble)[1]
    if "r_y" in names:
        details["r_y_chains"] = [list(p) for p in ry_parts(ensemble)[1]]
    if "U3" in names:
        details["U3_family"] = _u3_parts(ensemble)[1]
    return BoundReport(
        n=ensemble.n,
        dim=ensemble.dim,
        info_terms=info,
        conditional_entropies=cond,
        entropies=ent,
        lhs_info_sum=lhs["info"],
        lhs_entropy_sum=lhs["eur"],
        lhs_classical_entropy_sum=lhs["entropy"],
        bounds=values,
        kinds=kinds,
        slack=slack,
        memory_terms=mem.as_dict(ensemble.n),
        heuristic=heuristic,
        orderings=orderings,
        details=details,
    )
