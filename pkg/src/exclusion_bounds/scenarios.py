"""Measurement families used in the comparisons, and parameter sweeps over them."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bounds import INFO_BOUNDS, evaluate_bound, full_report, resolve_bounds
from .errors import InapplicableBoundError
from .measurements import MeasurementBasis, MeasurementEnsemble
from .quantum import random_state
from .threads import thread_count


def _check_unit_interval(a, name="a"):
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {a}")


def qubit_family(a: float, phi: float = math.pi / 2) -> MeasurementEnsemble:
    """Computational basis and {(sqrt a, e^{i phi} sqrt(1-a)), (sqrt(1-a), -e^{i phi} sqrt a)}."""
    _check_unit_interval(a)
    e = np.exp(1j * phi)
    second = [[math.sqrt(a), e * math.sqrt(1 - a)], [math.sqrt(1 - a), -e * math.sqrt(a)]]
    return MeasurementEnsemble([
        MeasurementBasis.computational(2, "M1"),
        MeasurementBasis.from_vectors(second, "M2"),
    ])


O3 = np.array([
    [math.sqrt(2), math.sqrt(2), math.sqrt(2)],
    [math.sqrt(3), 0.0, -math.sqrt(3)],
    [1.0, -2.0, 1.0],
]) / math.sqrt(6)


def rotation_m(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


def qutrit_theta_unitary(theta: float) -> np.ndarray:
    m = rotation_m(theta)
    return m @ O3 @ m.conj().T


def qutrit_theta_family(theta: float) -> MeasurementEnsemble:
    """Computational basis and the rows of M(theta) O3 M(theta)^dagger."""
    return MeasurementEnsemble([
        MeasurementBasis.computational(3, "M1"),
        MeasurementBasis.from_vectors(qutrit_theta_unitary(theta), "M2"),
    ])


def qutrit_three_measurements(a: float, phi: float = math.pi / 2) -> MeasurementEnsemble:
    _check_unit_interval(a)
    r = 1 / math.sqrt(2)
    e = np.exp(1j * phi)
    second = [[r, 0, -r], [0, 1, 0], [r, 0, r]]
    third = [[math.sqrt(a), e * math.sqrt(1 - a), 0], [math.sqrt(1 - a), -e * math.sqrt(a), 0], [0, 0, 1]]
    return MeasurementEnsemble([
        MeasurementBasis.computational(3, "M1"),
        MeasurementBasis.from_vectors(second, "M2"),
        MeasurementBasis.from_vectors(third, "M3"),
    ])


# -- scenarios -------------------------------------------------------------------

def grid(start: float, stop: float, count: int) -> list:
    """``count`` equally spaced points including both ends, rounded so that
    decimal steps (0.01, 0.02, ...) land on exact decimal values."""
    pts = np.linspace(start, stop, count)
    return [float(round(x, 12)) for x in pts]


@dataclass
class Scenario:
    """A named ensemble family over a grid of one parameter.

    ``fixed`` holds parameters passed to the generator but not swept.
    """

    name: str
    parameter: str
    values: list
    generator: Callable
    fixed: dict = field(default_factory=dict)

    def ensembles(self):
        for v in self.values:
            yield v, self.generator(**{self.parameter: v}, **self.fixed)

    def with_values(self, values) -> "Scenario":
        return Scenario(self.name, self.parameter, list(values), self.generator, dict(self.fixed))


A_STEP = 0.01
THETA_STEP = math.pi / 200

SCENARIOS = {
    "qubit": Scenario("qubit", "a", grid(0.5, 1.0, 51), qubit_family, {"phi": math.pi / 2}),
    "qutrit-theta": Scenario("qutrit-theta", "theta", grid(0.0, math.pi / 2, 101), qutrit_theta_family),
    "qutrit-three": Scenario("qutrit-three", "a", grid(0.0, 1.0, 51), qutrit_three_measurements,
                             {"phi": math.pi / 2}),
}


def get_scenario(name: str) -> Scenario:
    try:
        s = SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}") from None
    return s.with_values(s.values)


@dataclass(frozen=True)
class Preset:
    scenario: str
    bounds: tuple
    diffs: tuple = ()


PRESETS = {
    "fig1": Preset("qubit", ("r_H", "r_G", "r_CP", "thm1")),
    "fig2": Preset("qubit", ("r_H", "thm1"), (("r_H", "thm1"),)),
    "fig3": Preset("qutrit-theta", ("r_CP", "thm1")),
    "fig4": Preset("qutrit-three", ("U1", "r_x")),
    "fig5": Preset("qutrit-three", ("r_opt", "r_x")),
}


@dataclass
class SweepTable:
    """Rows in grid order. ``columns`` is the output column order."""

    parameter: str
    bounds: list
    diffs: list
    rows: list
    policy: str = "independent"

    @property
    def columns(self) -> list:
        cols = [self.parameter] + list(self.bounds) + [diff_name(a, b) for a, b in self.diffs]
        if self.policy != "independent":
            cols += ["lhs_info_sum", "lhs_entropy_sum"]
        return cols

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]


def diff_name(a: str, b: str) -> str:
    return f"{a}-{b}"


def _row(param, value, ensemble, names, diffs, policy, state, samples, seed):
    row = {param: value}
    if policy == "independent":
        for n in names:
            row[n] = evaluate_bound(n, None, ensemble)
    elif policy == "fixed":
        rep = full_report(state, ensemble, names)
        row.update(rep.bounds)
        row["lhs_info_sum"] = rep.lhs_info_sum
        row["lhs_entropy_sum"] = rep.lhs_entropy_sum
    elif policy == "worst":
        # the sampled state with the smallest slack for the first info bound
        d = ensemble.dim
        key = next((n for n in names if n in INFO_BOUNDS), names[0])
        worst = None
        for t in range(samples):
            rho = random_state(d * d, "pure" if t % 2 == 0 else "mixed", [seed, t], dims=(d, d))
            rep = full_report(rho, ensemble, names)
            if worst is None or rep.slack[key] < worst.slack[key]:
                worst = rep
        row.update(worst.bounds)
        row["lhs_info_sum"] = worst.lhs_info_sum
        row["lhs_entropy_sum"] = worst.lhs_entropy_sum
    else:
        raise ValueError(f"unknown state policy {policy!r}")
    for a, b in diffs:
        row[diff_name(a, b)] = row[a] - row[b]
    return row


def run_sweep(
    scenario: Scenario,
    bounds,
    diffs=(),
    policy: str = "independent",
    state=None,
    samples: int = 64,
    seed: int = 0,
    threads: int | None = None,
) -> SweepTable:
    """Evaluate ``bounds`` at every grid point of ``scenario``.

    ``policy`` is ``independent`` (memory terms dropped), ``fixed`` (use
    ``state``) or ``worst`` (the least favourable of ``samples`` random
    states per point). Output order is grid order regardless of threading.
    """
    names = list(bounds)
    points = list(scenario.ensembles())
    if not points:
        return SweepTable(scenario.parameter, names, list(diffs), [], policy)
    resolve_bounds(names, points[0][1])
    for a, b in diffs:
        resolve_bounds([a, b])
        if a not in names or b not in names:
            raise InapplicableBoundError(f"difference {a}-{b} needs both bounds in the selection")
    if policy == "fixed" and state is None:
        raise ValueError("policy 'fixed' needs a state")

    def work(item):
        i, (value, ens) = item
        return _row(scenario.parameter, value, ens, names, diffs, policy, state, samples, [seed, i])

    n_threads = threads if threads is not None else thread_count()
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as ex:
            rows = list(ex.map(work, enumerate(points)))
    else:
        rows = [work(item) for item in enumerate(points)]
    return SweepTable(scenario.parameter, names, list(diffs), rows, policy)


def run_preset(name: str, **kw) -> SweepTable:
    p = PRESETS[name]
    return run_sweep(get_scenario(p.scenario), p.bounds, p.diffs, **kw)


def compare(scenario: Scenario, bounds) -> dict:
    """Per grid point the smallest information bound and its name.

    Adds ``min_rx_ry`` as a combined column when both are requested.
    Ties within 1e-9 are reported as all tied names joined by ``=``.
    """
    table = run_sweep(scenario, bounds)
    names = list(bounds)
    combined = "r_x" in names and "r_y" in names
    rows, wins = [], {}
    for r in table.rows:
        vals = {n: r[n] for n in names}
        best = min(vals.values())
        tied = [n for n in names if vals[n] - best <= 1e-9]
        winner = "=".join(tied)
        for n in tied:
            wins[n] = wins.get(n, 0) + 1
        out = dict(r)
        if combined:
            out["min_rx_ry"] = min(r["r_x"], r["r_y"])
        out["min"] = best
        out["winner"] = winner
        rows.append(out)
    cols = [table.parameter] + names + (["min_rx_ry"] if combined else []) + ["min", "winner"]
    return {"columns": cols, "rows": rows, "wins": wins}
