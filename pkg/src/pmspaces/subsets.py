"""Vectorized perimeter/measure tables over all subsets of a point list.

Exhaustive checks (axioms, profiles, brute-force Cheeger constants) all need
``P(E)`` and ``m(E)`` for every ``E`` inside some index set.  In exact mode
the values are kept as integer numerators over a common denominator, so that
the whole table is computed with int64 arithmetic and converted to Fractions
only where a decision is made.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import numeric as num
from .errors import SizeError
from .space import CutPerimeter, FiniteSpace


class SubsetTable:
    """``P`` and ``m`` of every subset of ``index``.

    Local code ``c`` (an integer in ``[0, 2**k)``) stands for the subset whose
    members are ``index[i]`` for each set bit ``i`` of ``c``.
    """

    def __init__(self, space: FiniteSpace, index=None, limit: int = 22):
        if index is None:
            index = np.arange(space.n)
        elif isinstance(index, np.ndarray) and index.dtype == bool:
            index = np.flatnonzero(index)
        index = np.asarray(index, dtype=np.int64)
        k = len(index)
        if k > limit:
            raise SizeError(f"exhaustive enumeration over {k} points exceeds the limit {limit}")
        self.space = space
        self.index = index
        self.k = k
        self.exact = space.exact
        self.codes = np.arange(1 << k, dtype=np.int64)
        self._position = {int(p): i for i, p in enumerate(index)}

        if self.exact:
            m_vals, self.m_den = num.scale_to_integers(space.measure[index])
        else:
            m_vals, self.m_den = space.measure[index], 1
        self.meas = self._accumulate(m_vals)

        if isinstance(space.perimeter, CutPerimeter):
            self.perim, self.p_den = self._cut_values(space.perimeter)
        else:
            table = space.perimeter.table
            global_codes = np.zeros(1 << k, dtype=np.int64)
            for i, p in enumerate(index):
                global_codes |= ((self.codes >> i) & 1) << int(p)
            vals = table[global_codes]
            if self.exact:
                self.perim, self.p_den = num.scale_to_integers(vals)
            else:
                self.perim, self.p_den = vals.astype(float), 1

    def _bit(self, i: int) -> np.ndarray:
        return (self.codes >> i) & 1

    def _accumulate(self, vals) -> np.ndarray:
        dtype = vals.dtype if vals.dtype != object else object
        out = np.zeros(1 << self.k, dtype=dtype)
        for i in range(self.k):
            bit = self._bit(i) if dtype != object else self._bit(i).astype(object)
            out = out + bit * vals[i]
        return out

    def _cut_values(self, cut: CutPerimeter):
        if self.exact:
            w, den = num.scale_to_integers(cut.weight)
        else:
            w, den = cut.weight, 1
        out = np.zeros(1 << self.k, dtype=w.dtype)
        big = w.dtype == object
        for a, b, wt in zip(cut.tail, cut.head, w):
            ia = self._position.get(int(a))
            ib = self._position.get(int(b))
            if ia is None and ib is None:
                continue
            if ia is None:
                crossing = self._bit(ib)
            elif ib is None:
                crossing = self._bit(ia)
            else:
                crossing = self._bit(ia) ^ self._bit(ib)
            if big:
                crossing = crossing.astype(object)
            out = out + crossing * wt
        return out, den

    # -- scalar access -------------------------------------------------------

    def P(self, c: int):
        if self.exact:
            return Fraction(int(self.perim[c]), self.p_den)
        return float(self.perim[c])

    def m(self, c: int):
        if self.exact:
            return Fraction(int(self.meas[c]), self.m_den)
        return float(self.meas[c])

    def ratio(self, c: int):
        return self.P(c) / self.m(c)

    def float_perimeters(self) -> np.ndarray:
        return np.asarray(self.perim, dtype=float) / self.p_den

    def float_measures(self) -> np.ndarray:
        return np.asarray(self.meas, dtype=float) / self.m_den

    def float_ratios(self) -> np.ndarray:
        """``P/m`` as floats; ``inf`` at the empty set."""
        with np.errstate(divide="ignore", invalid="ignore"):
            r = self.float_perimeters() / self.float_measures()
        r[0] = np.inf
        return r

    # -- conversions -----------------------------------------------------------

    def mask(self, c: int) -> np.ndarray:
        out = np.zeros(self.space.n, dtype=bool)
        for i in range(self.k):
            if (c >> i) & 1:
                out[self.index[i]] = True
        return out

    def code(self, mask: np.ndarray) -> int:
        c = 0
        for p in np.flatnonzero(mask):
            i = self._position.get(int(p))
            if i is None:
                raise ValueError(f"point {p} lies outside the enumerated index set")
            c |= 1 << i
        return c

    @property
    def full_code(self) -> int:
        return (1 << self.k) - 1

    # -- minimization ----------------------------------------------------------

    def min_ratio(self, candidates: np.ndarray | None = None):
        """Minimum of ``P/m`` over nonempty candidate codes.

        Returns ``(value, codes)`` where ``codes`` lists every candidate that
        attains the minimum -- exactly in exact mode, up to ``TIE_TOL`` in
        float mode.
        """
        r = self.float_ratios()
        if candidates is not None:
            r = np.where(candidates, r, np.inf)
        best = float(np.min(r))
        if not np.isfinite(best):
            raise ValueError("no nonempty candidate set")
        near = np.flatnonzero(r <= best * (1 + 1e-9) + 1e-300)
        if self.exact:
            exact = {int(c): self.ratio(int(c)) for c in near}
            value = min(exact.values())
            return value, sorted(c for c, v in exact.items() if v == value)
        value = best
        ties = np.flatnonzero(r <= best + num.TIE_TOL * (1 + abs(best)))
        return value, [int(c) for c in ties]


def submasks(c: int) -> np.ndarray:
    """All submasks of ``c`` including ``0`` and ``c``, in increasing order."""
    bits = [i for i in range(c.bit_length()) if (c >> i) & 1]
    idx = np.arange(1 << len(bits), dtype=np.int64)
    out = np.zeros_like(idx)
    for j, b in enumerate(bits):
        out |= ((idx >> j) & 1) << b
    return out
