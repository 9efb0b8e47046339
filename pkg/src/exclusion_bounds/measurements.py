"""Orthonormal measurement bases, ensembles of them, overlaps and chain coefficients."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionError, OrthonormalityError, SchemaError
from .tolerances import TAU_NORM


def _orthonormality_defect(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """An orthonormal basis; ``matrix[:, j]`` is the j-th basis vector."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        u = np.array(self.matrix, dtype=complex, copy=True)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 1:
            raise DimensionError(f"a basis of C^d needs d vectors of length d, got shape {u.shape}")
        defect = _orthonormality_defect(u)
        if defect > TAU_NORM:
            g = np.abs(u.conj().T @ u - np.eye(u.shape[1]))
            i, j = np.unravel_index(np.argmax(g), g.shape)
            raise OrthonormalityError(
                f"basis {self.label or '?'} is not orthonormal: vectors {i} and {j} "
                f"deviate by {defect:.3e}"
            )
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    @classmethod
    def from_vectors(cls, vectors, label: str = "") -> "MeasurementBasis":
        """Build from a list of basis vectors (rows of the argument)."""
        return cls(np.asarray(vectors, dtype=complex).T, label)

    @classmethod
    def computational(cls, d: int, label: str = "Z") -> "MeasurementBasis":
        return cls(np.eye(d), label)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def vectors(self) -> list:
        return [self.matrix[:, j] for j in range(self.dim)]


class MeasurementEnsemble:
    """An ordered list of N >= 2 bases of the same space.

    Instances are immutable and hashable by content, so derived quantities
    (overlaps, majorization bounds) can be cached per ensemble.
    """

    def __init__(self, bases: Sequence[MeasurementBasis]):
        bases = tuple(bases)
        if len(bases) < 2:
            raise DimensionError("an ensemble needs at least two measurements")
        d = bases[0].dim
        for m, b in enumerate(bases):
            if b.dim != d:
                raise DimensionError(f"basis {m} has dimension {b.dim}, expected {d}")
        self._bases = bases
        self._key = (d, len(bases)) + tuple(b.matrix.tobytes() for b in bases)

    @property
    def bases(self) -> tuple:
        return self._bases

    @property
    def n(self) -> int:
        return len(self._bases)

    @property
    def dim(self) -> int:
        return self._bases[0].dim

    def __len__(self):
        return len(self._bases)

    def __getitem__(self, m):
        return self._bases[m]

    def __iter__(self):
        return iter(self._bases)

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        return isinstance(other, MeasurementEnsemble) and self._key == other._key

    def __repr__(self):
        labels = ", ".join(b.label or str(i) for i, b in enumerate(self._bases))
        return f"MeasurementEnsemble(d={self.dim}, N={self.n}, [{labels}])"

    @cached_property
    def overlaps(self) -> np.ndarray:
        """Array ``c[m, m2, i, j] = |<u^m_i|u^m2_j>|^2``."""
        mats = np.stack([b.matrix for b in self._bases])
        amp = np.einsum("mai,naj->mnij", mats.conj(), mats)
        c = np.abs(amp) ** 2
        c.setflags(write=False)
        return c

    def overlap(self, m: int, m2: int) -> np.ndarray:
        return self.overlaps[m, m2]

    def reordered(self, order: Sequence[int]) -> "MeasurementEnsemble":
        return MeasurementEnsemble([self._bases[m] for m in order])


def overlap_matrix(m1: MeasurementBasis, m2: MeasurementBasis) -> np.ndarray:
    """Doubly stochastic matrix of squared overlaps ``|<u1_i|u2_j>|^2``."""
    if m1.dim != m2.dim:
        raise DimensionError(f"bases of dimensions {m1.dim} and {m2.dim}")
    return np.abs(m1.matrix.conj().T @ m2.matrix) ** 2


def _check_order(ensemble: MeasurementEnsemble, order) -> tuple:
    order = tuple(int(m) for m in order)
    if len(order) < 2 or len(set(order)) != len(order) or any(not 0 <= m < ensemble.n for m in order):
        raise ValueError(f"{order} is not an ordering of distinct measurements of an N={ensemble.n} ensemble")
    return order


def chain_kernel(ensemble: MeasurementEnsemble, order) -> np.ndarray:
    """Matrix ``K[i_first, i_last]``: products of consecutive overlaps along
    ``order``, summed over all intermediate indices."""
    order = _check_order(ensemble, order)
    k = ensemble.overlap(order[0], order[1])
    for a, b in zip(order[1:-1], order[2:]):
        k = k @ ensemble.overlap(a, b)
    return k


def chain_coefficients(ensemble: MeasurementEnsemble, order) -> np.ndarray:
    """Vector over the last index of the chain coefficient for ``order``.

    For each final outcome, sums over the intermediate outcomes the maximum
    over the first outcome of the product of consecutive overlaps.
    """
    order = _check_order(ensemble, order)
    v = ensemble.overlap(order[0], order[1]).max(axis=0)
    for a, b in zip(order[1:-1], order[2:]):
        v = v @ ensemble.overlap(a, b)
    return v


def chain_coefficient(ensemble: MeasurementEnsemble, order, i_last: int) -> float:
    """Chain coefficient of ``order`` for final outcome ``i_last``."""
    v = chain_coefficients(ensemble, order)
    if not 0 <= i_last < v.size:
        raise IndexError(f"outcome index {i_last} out of range")
    return float(v[i_last])


def cyclic_orders(n: int) -> list:
    """The N cyclic shifts of (0, ..., N-1)."""
    return [tuple((s + i) % n for i in range(n)) for s in range(n)]


def all_orders(items) -> list:
    return list(itertools.permutations(items))


# -- file format -------------------------------------------------------------

def _parse_complex(entry, where):
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry)
    if (
        isinstance(entry, (list, tuple))
        and len(entry) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
    ):
        return complex(entry[0], entry[1])
    raise SchemaError(f"expected [re, im], got {entry!r}", where)


def parse_complex_matrix(rows, where: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise SchemaError("expected a non-empty list of rows", where)
    out = []
    width = None
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise SchemaError("expected a list of [re, im] entries", f"{where}[{i}]")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DimensionError(f"{where}[{i}] has length {len(row)}, expected {width}")
        out.append([_parse_complex(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)])
    return np.array(out, dtype=complex)


def ensemble_from_dict(doc) -> MeasurementEnsemble:
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object", "$")
    if "dimension" not in doc:
        raise SchemaError("missing field", "dimension")
    d = doc["dimension"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise SchemaError(f"must be a positive integer, got {d!r}", "dimension")
    raw = doc.get("bases")
    if not isinstance(raw, list) or len(raw) < 2:
        raise SchemaError("expected a list of at least two bases", "bases")
    bases = []
    for m, entry in enumerate(raw):
        where = f"bases[{m}]"
        if not isinstance(entry, dict) or "vectors" not in entry:
            raise SchemaError("expected an object with 'vectors'", where)
        label = entry.get("label", f"M{m + 1}")
        if not isinstance(label, str):
            raise SchemaError("label must be a string", f"{where}.label")
        vecs = parse_complex_matrix(entry["vectors"], f"{where}.vectors")
        if vecs.shape != (d, d):
            raise DimensionError(
                f"{where}: expected {d} vectors of length {d}, got shape {vecs.shape}"
            )
        try:
            bases.append(MeasurementBasis.from_vectors(vecs, label))
        except OrthonormalityError as exc:
            raise OrthonormalityError(f"{where}: {exc}") from None
    return MeasurementEnsemble(bases)


def parse_ensemble(document) -> MeasurementEnsemble:
    """Parse and validate an ensemble from JSON text (or an already-decoded dict)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from None
    return ensemble_from_dict(document)


def complex_to_pairs(a) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(a)]


def ensemble_to_dict(ensemble: MeasurementEnsemble) -> dict:
    return {
        "dimension": ensemble.dim,
        "bases": [
            {"label": b.label, "vectors": complex_to_pairs(b.matrix.T)}
            for b in ensemble
        ],
    }


def serialize_ensemble(ensemble: MeasurementEnsemble) -> str:
    return json.dumps(ensemble_to_dict(ensemble), indent=1)
