"""Randomised verification of every implemented inequality.

Each check records the number of (state, ensemble) trials, the largest
violation seen (negative when every trial holds with room to spare) and
whether that stays within the tolerance.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import CATALOG, full_report
from .majorization import omega_for_ensemble, sorted_partial_sums, tensor_distribution
from .measurements import MeasurementEnsemble
from .quantum import random_state
from .scenarios import qubit_family, qutrit_theta_family, qutrit_three_measurements
from .threads import thread_count
from .tolerances import TAU_MAJ, TAU_VERIFY

QUBIT_A = (0.5, 0.625, 0.75, 0.875, 1.0)
QUTRIT_A = (0.0, 0.25, 0.5, 0.75, 1.0)


def default_ensembles(dim: int) -> list:
    """Labelled ensembles sampled for a local dimension."""
    if dim == 2:
        return [(f"qubit(a={a})", qubit_family(a)) for a in QUBIT_A]
    if dim == 3:
        return [(f"qutrit-three(a={a})", qutrit_three_measurements(a)) for a in QUTRIT_A]
    raise ValueError(f"no shipped ensembles for d = {dim}")


def preset_ensembles(name: str) -> list:
    if name == "qubit":
        return default_ensembles(2)
    if name == "qutrit-three":
        return default_ensembles(3)
    if name == "qutrit-theta":
        return [(f"qutrit-theta(theta={t:.4f})", qutrit_theta_family(t)) for t in np.linspace(0, np.pi / 2, 5)]
    raise KeyError(f"unknown ensemble preset {name!r}")


@dataclass
class Check:
    name: str
    trials: int = 0
    max_violation: float = -np.inf
    tolerance: float = TAU_VERIFY

    @property
    def passed(self) -> bool:
        return self.trials > 0 and self.max_violation <= self.tolerance

    def record(self, violation: float):
        self.trials += 1
        self.max_violation = max(self.max_violation, float(violation))

    def merge(self, other: "Check"):
        self.trials += other.trials
        self.max_violation = max(self.max_violation, other.max_violation)


@dataclass
class VerificationSummary:
    checks: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def lines(self) -> list:
        out = []
        for c in self.checks.values():
            flag = "PASS" if c.passed else "FAIL"
            out.append(f"{flag} {c.name}: trials={c.trials} max_violation={c.max_violation:.3e} tol={c.tolerance:g}")
        return out

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "trials": c.trials, "max_violation": c.max_violation,
                 "tolerance": c.tolerance, "passed": c.passed}
                for c in self.checks.values()
            ],
        }


def _check(checks, name, tol):
    if name not in checks:
        checks[name] = Check(name, tolerance=tol)
    return checks[name]


def _state_trials(label, ensemble, omega, count, seed, offset, tol):
    checks = {}
    d = ensemble.dim
    for t in range(count):
        kind = "pure" if (offset + t) % 2 == 0 else "mixed"
        rho = random_state(d * d, kind, [seed, offset + t], dims=(d, d))
        rep = full_report(rho, ensemble, omega=omega)
        for name, slack in rep.slack.items():
            _check(checks, f"{CATALOG[name].kind}:{name}", tol).record(-slack)
    return checks


def dominance_check(ensemble: MeasurementEnsemble, omega, samples: int, seed) -> float:
    """Largest partial-sum excess of sampled joint distributions over the capitals."""
    worst = -np.inf
    for t in range(samples):
        rho = random_state(ensemble.dim, "pure" if t % 2 == 0 else "mixed", [seed, 0xD0, t])
        excess = sorted_partial_sums(tensor_distribution(rho, ensemble)) - omega.capitals
        worst = max(worst, float(excess.max()))
    return worst


def verify(
    trials: int = 1000,
    seed: int = 0,
    dims=(2, 3),
    ensembles=None,
    dominance_samples: int = 500,
    omega_scale: float | None = None,
    tolerance: float = TAU_VERIFY,
    threads: int | None = None,
) -> VerificationSummary:
    """Sample ``trials`` random bipartite states (alternating pure and
    Hilbert-Schmidt mixed, d_A = d_B) spread evenly over the ensembles, and
    check every applicable bound plus majorization dominance.

    ``ensembles`` is a list of ``(label, MeasurementEnsemble)``; by default
    the shipped families for each dimension in ``dims``. ``omega_scale``
    shrinks every capital below 1 (fault injection for testing the checker).
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if ensembles is None:
        ensembles = [e for d in dims for e in default_ensembles(d)]
    if not ensembles:
        raise ValueError("no ensembles to verify")
    per = [trials // len(ensembles) + (1 if i < trials % len(ensembles) else 0) for i in range(len(ensembles))]
    omegas = []
    for _, ens in ensembles:
        om = omega_for_ensemble(ens)
        omegas.append(om.scaled(omega_scale) if omega_scale is not None else om)

    jobs = []
    offset = 0
    for (label, ens), om, count in zip(ensembles, omegas, per):
        jobs.append((label, ens, om, count, offset))
        offset += count

    def run(job):
        label, ens, om, count, off = job
        return _state_trials(label, ens, om, count, seed, off, tolerance)

    n_threads = threads if threads is not None else thread_count()
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]

    summary = VerificationSummary(seed=seed)
    for part in parts:
        for name, c in part.items():
            _check(summary.checks, name, tolerance).merge(c)
    for i, ((label, ens), om) in enumerate(zip(ensembles, omegas)):
        if dominance_samples:
            c = _check(summary.checks, f"dominance:{label}", TAU_MAJ)
            c.trials += dominance_samples
            c.max_violation = max(c.max_violation, dominance_check(ens, om, dominance_samples, [seed, i]))
    return summary
