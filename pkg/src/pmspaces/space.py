"""Finite perimeter-measure spaces.

A :class:`FiniteSpace` is a finite set of points with strictly positive
masses and a perimeter oracle.  Two oracles are provided:

* :class:`CutPerimeter` -- ``P(E)`` is the total weight of the edges leaving
  ``E``.  The relative perimeter splits each cut edge half/half between its
  endpoints, ``P(E; A) = sum_{x in A} 1/2 sum_y w(x, y) |chi_E(x) - chi_E(y)|``,
  so that ``A -> P(E; A)`` is a genuine measure on points and ``P(E; X)``
  equals ``P(E)``.
* :class:`TablePerimeter` -- an explicit value for each of the ``2**n``
  subsets, for small hand-made oracles.

Subsets are boolean numpy arrays of length ``n``.  When integer bitmasks are
needed, bit ``i`` stands for point ``i``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import numeric as num
from .errors import MalformedOracleError, PositivityError, UnsupportedOperationError

PERIMETER_AXIOMS = ("P.1", "P.2", "P.3", "P.4", "P.5", "P.6", "P.7")
RELATIVE_AXIOMS = ("RP.1", "RP.2", "RP.3", "RP.4", "RP.+", "RP.L")
ALL_AXIOMS = PERIMETER_AXIOMS + RELATIVE_AXIOMS

# What a symmetric cut perimeter satisfies by construction. P.6 depends on
# connectivity and RP.L fails in the discrete topology, so neither is listed.
CUT_AXIOMS = frozenset(
    {"P.1", "P.2", "P.3", "P.4", "P.5", "P.7", "RP.1", "RP.2", "RP.3", "RP.4", "RP.+"}
)
# Every oracle on a finite space with positive masses: L1-convergent masks
# are eventually constant.
FINITE_AXIOMS = frozenset({"P.4", "P.5"})


class CutPerimeter:
    """Symmetric edge-weight perimeter ``P(E) = sum_{x in E, y not in E} w(x, y)``.

    Parameters
    ----------
    n : int
        Number of points.
    edges : iterable of (a, b, w)
        Undirected weighted edges between point indices.  Parallel edges are
        merged by summing their weights; self-loops are rejected.
    exact : bool
        Store weights as Fractions.
    """

    kind = "cut"

    def __init__(self, n: int, edges: Iterable[tuple], exact: bool = False):
        merged: dict[tuple[int, int], object] = {}
        for a, b, w in edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop at point {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) out of range for n={n}")
            w = num.number(w, exact)
            if not exact and not np.isfinite(w):
                raise MalformedOracleError(f"non-finite weight on edge ({a}, {b})")
            if w < 0:
                raise MalformedOracleError(f"negative weight on edge ({a}, {b})")
            key = (min(a, b), max(a, b))
            merged[key] = merged.get(key, num.zero(exact)) + w
        keys = sorted(merged)
        self.n = n
        self.exact = exact
        self.tail = np.asarray([k[0] for k in keys], dtype=np.int64)
        self.head = np.asarray([k[1] for k in keys], dtype=np.int64)
        self.weight = num.as_array([merged[k] for k in keys], exact)
        self.declared_axioms = CUT_AXIOMS

    @property
    def num_edges(self) -> int:
        return len(self.weight)

    def edges(self):
        """Iterate ``(a, b, w)`` with ``a < b``."""
        for a, b, w in zip(self.tail, self.head, self.weight):
            yield int(a), int(b), w

    def total(self, mask: np.ndarray):
        crossing = mask[self.tail] != mask[self.head]
        return num.total(self.weight[crossing])

    def point_variation(self, u: np.ndarray) -> np.ndarray:
        """Per-point density ``1/2 sum_y w(x, y) |u(x) - u(y)|``."""
        jump = self.weight * abs(u[self.tail] - u[self.head])
        out = num.zeros(self.n, self.exact)
        half = Fraction(1, 2) if self.exact else 0.5
        np.add.at(out, self.tail, jump * half)
        np.add.at(out, self.head, jump * half)
        return out

    def relative(self, mask: np.ndarray, window: np.ndarray):
        chi = mask.astype(int)
        if self.exact:
            chi = num.as_array(chi, True)
        return num.total(self.point_variation(chi)[window])

    def weighted_degree(self) -> np.ndarray:
        out = num.zeros(self.n, self.exact)
        np.add.at(out, self.tail, self.weight)
        np.add.at(out, self.head, self.weight)
        return out

    def adjacency(self) -> list[list[tuple[int, object]]]:
        adj: list[list[tuple[int, object]]] = [[] for _ in range(self.n)]
        for a, b, w in self.edges():
            adj[a].append((b, w))
            adj[b].append((a, w))
        return adj

    def scaled(self, factor) -> "CutPerimeter":
        factor = num.number(factor, self.exact)
        return CutPerimeter(self.n, [(a, b, w * factor) for a, b, w in self.edges()], self.exact)


class TablePerimeter:
    """Explicit perimeter table indexed by integer bitmask.

    ``table[k]`` is ``P`` of the set whose members are the set bits of ``k``.
    Values must be finite and non-negative (the interchange format cannot
    express ``+inf``).
    """

    kind = "oracle-table"

    def __init__(self, n: int, table: Sequence, exact: bool = False,
                 declared: Iterable[str] = ()):
        if len(table) != 1 << n:
            raise ValueError(f"table must have 2**{n} entries, got {len(table)}")
        values = num.as_array(table, exact)
        if not exact and not np.all(np.isfinite(values)):
            raise MalformedOracleError("perimeter table has non-finite entries")
        if np.any(values < 0):
            k = int(np.flatnonzero(values < 0)[0])
            raise MalformedOracleError(f"negative perimeter on bitmask {k}")
        self.n = n
        self.exact = exact
        self.table = values
        self.declared_axioms = FINITE_AXIOMS | frozenset(declared)

    def total(self, mask: np.ndarray):
        return self.table[mask_to_int(mask)]

    def relative(self, mask, window):
        raise UnsupportedOperationError("table oracles carry no relative perimeter")


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """A finite measure space ``(X, 2^X, m)`` with a perimeter oracle.

    Every point has strictly positive mass, so the only negligible set is the
    empty set and "equal up to null sets" is plain set equality.
    """

    measure: np.ndarray
    perimeter: CutPerimeter | TablePerimeter
    labels: tuple = field(default=())

    def __post_init__(self):
        n = len(self.measure)
        if n < 1:
            raise ValueError("a space needs at least one point")
        if self.perimeter.n != n:
            raise ValueError(f"oracle is over {self.perimeter.n} points, measure over {n}")
        exact = num.is_exact_array(self.measure)
        if exact != self.perimeter.exact:
            raise ValueError("measure and perimeter must use the same number mode")
        if not exact and not np.all(np.isfinite(self.measure)):
            raise PositivityError("point masses must be finite")
        if not np.all(self.measure > 0):
            bad = int(np.flatnonzero(~(self.measure > 0))[0])
            raise PositivityError(f"point {bad} has non-positive mass")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"x{i}" for i in range(n)))
        elif len(self.labels) != n:
            raise ValueError("one label per point required")

    @classmethod
    def from_cut(cls, measure, edges, labels=(), exact: bool = False) -> "FiniteSpace":
        m = num.as_array(list(measure), exact)
        return cls(m, CutPerimeter(len(m), edges, exact), tuple(labels))

    @property
    def n(self) -> int:
        return len(self.measure)

    @property
    def exact(self) -> bool:
        return self.perimeter.exact

    @property
    def is_cut(self) -> bool:
        return isinstance(self.perimeter, CutPerimeter)

    @property
    def total_measure(self):
        return num.total(self.measure)

    def P(self, mask: np.ndarray):
        return self.perimeter.total(np.asarray(mask, dtype=bool))

    def relative_perimeter(self, mask, window):
        return self.perimeter.relative(np.asarray(mask, dtype=bool), np.asarray(window, dtype=bool))

    def mass(self, mask: np.ndarray):
        return num.total(self.measure[np.asarray(mask, dtype=bool)])

    def ratio(self, mask: np.ndarray):
        return self.P(mask) / self.mass(mask)

    def full(self) -> np.ndarray:
        return np.ones(self.n, dtype=bool)

    def empty(self) -> np.ndarray:
        return np.zeros(self.n, dtype=bool)

    def mask(self, members) -> np.ndarray:
        """Boolean mask from labels or indices (a bool array passes through)."""
        if isinstance(members, np.ndarray) and members.dtype == bool:
            if len(members) != self.n:
                raise ValueError("mask length differs from point count")
            return members.copy()
        out = np.zeros(self.n, dtype=bool)
        lookup = {lab: i for i, lab in enumerate(self.labels)}
        for item in members:
            if item in lookup:
                out[lookup[item]] = True
            elif isinstance(item, (int, np.integer)) and 0 <= item < self.n:
                out[int(item)] = True
            else:
                raise KeyError(f"unknown point {item!r}")
        return out

    def members(self, mask: np.ndarray) -> list:
        return [self.labels[i] for i in np.flatnonzero(mask)]

    def function(self, values) -> np.ndarray:
        """Number array in the space's mode."""
        if len(values) != self.n:
            raise ValueError("function length differs from point count")
        return num.as_array(list(values), self.exact)

    def with_perimeter(self, perimeter) -> "FiniteSpace":
        return FiniteSpace(self.measure, perimeter, self.labels)


def mask_to_int(mask: np.ndarray) -> int:
    k = 0
    for i in np.flatnonzero(mask):
        k |= 1 << int(i)
    return k


def int_to_mask(k: int, n: int) -> np.ndarray:
    return np.asarray([(k >> i) & 1 for i in range(n)], dtype=bool)


# ---------------------------------------------------------------------------
# interchange format


def space_to_dict(space: FiniteSpace, omega: np.ndarray | None = None) -> dict:
    doc: dict = {
        "points": [{"id": lab, "measure": num.encode(m)}
                   for lab, m in zip(space.labels, space.measure)],
        "exact": space.exact,
    }
    if space.is_cut:
        doc["kind"] = "cut"
        doc["edges"] = [{"a": space.labels[a], "b": space.labels[b], "weight": num.encode(w)}
                        for a, b, w in space.perimeter.edges()]
    else:
        doc["kind"] = "oracle-table"
        doc["table"] = [num.encode(v) for v in space.perimeter.table]
        doc["declared_axioms"] = sorted(space.perimeter.declared_axioms - FINITE_AXIOMS)
    if omega is not None:
        doc["omega"] = space.members(omega)
    return doc


def space_from_dict(doc: dict) -> tuple[FiniteSpace, np.ndarray | None]:
    exact = bool(doc.get("exact", False))
    points = doc["points"]
    labels = tuple(p["id"] for p in points)
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate point ids")
    index = {lab: i for i, lab in enumerate(labels)}
    measure = np.asarray([num.decode(p["measure"], exact) for p in points],
                         dtype=object if exact else float)
    kind = doc.get("kind", "cut")
    if kind == "cut":
        edges = [(index[e["a"]], index[e["b"]], num.decode(e["weight"], exact))
                 for e in doc.get("edges", [])]
        oracle = CutPerimeter(len(points), edges, exact)
    elif kind == "oracle-table":
        oracle = TablePerimeter(len(points), [num.decode(v, exact) for v in doc["table"]],
                                exact, doc.get("declared_axioms", ()))
    else:
        raise ValueError(f"unknown space kind {kind!r}")
    space = FiniteSpace(measure, oracle, labels)
    omega = space.mask(doc["omega"]) if "omega" in doc else None
    return space, omega


def save_space(path, space: FiniteSpace, omega=None) -> None:
    text = json.dumps(space_to_dict(space, omega), indent=1)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_space(path) -> tuple[FiniteSpace, np.ndarray | None]:
    return space_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
