"""Total variation, variation measures and slopes on finite spaces.

The variation of ``u`` is defined from the perimeter alone through the
coarea formula.  On a finite space ``t -> P({u > t})`` is a step function
with jumps only at the values of ``u``, so the integral is a finite sum over
consecutive distinct values; no quadrature is involved.  For cut
perimeters the same number equals the edge sum ``sum w |u(x) - u(y)|``
(each unordered edge once), and the per-point split

    |Du|({x}) = 1/2 sum_y w(x, y) |u(x) - u(y)|

is a measure on points whose total is ``Var(u)``.

Weak p-slopes
-------------
A p-slope of ``u`` is any weak L^p limit of 1-slopes ``|grad u_k|`` along
sequences ``u_k -> u`` with bounded energy.  The constant sequence
``u_k = u`` shows ``|grad u| = |Du|({x}) / m(x)`` is one of them.  Any other
limit ``g`` satisfies ``int_A g dm >= liminf |Du_k|(A) >= |Du|(A)`` for
every ``A`` by lower semicontinuity of the variation measure, so
``g >= |grad u|`` pointwise and the minimal-norm element is the 1-slope
itself, for every ``p``.  :func:`weak_p_slope` therefore returns the 1-slope.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numeric as num
from .errors import AxiomMissingError, DomainError, UnsupportedOperationError
from .space import FiniteSpace


@dataclass(frozen=True, eq=False)
class BVFunction:
    """A function on the points of ``space``, stored in the space's number mode."""

    space: FiniteSpace
    values: np.ndarray

    def __post_init__(self):
        vals = self.values
        if isinstance(vals, BVFunction):
            vals = vals.values
        if len(vals) != self.space.n:
            raise ValueError(f"expected {self.space.n} values, got {len(vals)}")
        arr = num.as_array(list(vals), self.space.exact)
        if not self.space.exact and not np.all(np.isfinite(arr)):
            raise ValueError("function values must be finite")
        object.__setattr__(self, "values", arr)

    @classmethod
    def indicator(cls, space: FiniteSpace, mask) -> "BVFunction":
        return cls(space, space.mask(mask).astype(int))

    def __len__(self):
        return len(self.values)

    def scaled(self, lam) -> "BVFunction":
        return BVFunction(self.space, self.values * num.number(lam, self.space.exact))

    def shifted(self, c) -> "BVFunction":
        return BVFunction(self.space, self.values + num.number(c, self.space.exact))

    def l1(self):
        return num.total(self.space.measure * abs(self.values))


def _as_bv(u, space=None) -> BVFunction:
    if isinstance(u, BVFunction):
        return u
    if space is None:
        raise TypeError("a raw array needs its host space")
    return BVFunction(space, u)


def _levels(values: np.ndarray) -> list:
    return sorted(set(values.tolist()))


@dataclass
class VariationMeasure:
    density: np.ndarray
    total: object

    def __call__(self, A) -> object:
        """``|Du|(A)`` for a boolean window ``A``."""
        return num.total(self.density[np.asarray(A, dtype=bool)])


@dataclass
class Slope:
    one_slope: np.ndarray
    p: float | None = None

    def lp_norm(self, space: FiniteSpace, p: float) -> float:
        s = np.asarray(self.one_slope, dtype=float)
        return float(np.sum(np.asarray(space.measure, dtype=float) * s**p) ** (1.0 / p))


def level_variation(u: BVFunction):
    """``Var(u)`` as the finite sum ``sum_j P({u > t_j}) (t_{j+1} - t_j)``."""
    space, vals = u.space, u.values
    levels = _levels(vals)
    out = num.zero(space.exact)
    for lo, hi in zip(levels, levels[1:]):
        out += space.P(vals > lo) * (hi - lo)
    return out


def edge_variation(u: BVFunction):
    """``Var(u)`` as the edge sum; only for cut perimeters."""
    cut = u.space.perimeter
    if not u.space.is_cut:
        raise UnsupportedOperationError("edge sum needs a cut perimeter")
    return num.total(cut.weight * abs(u.values[cut.tail] - u.values[cut.head]))


def variation(u: BVFunction, check: bool = True):
    """Total variation of ``u`` by the coarea level sum.

    For cut perimeters the result is cross-checked against the edge sum
    (exactly in rational mode, to ``1e-12`` relative in float mode).
    """
    u = _as_bv(u)
    value = level_variation(u)
    if check and u.space.is_cut:
        other = edge_variation(u)
        if not num.close(value, other, scale=abs(float(other))):
            raise AssertionError(f"coarea sum {value} differs from edge sum {other}")
    return value


def variation_measure(u: BVFunction) -> VariationMeasure:
    """Per-point variation ``|Du|({x})`` for cut perimeters."""
    u = _as_bv(u)
    if not u.space.is_cut:
        raise UnsupportedOperationError("table oracles carry no relative perimeter")
    density = u.space.perimeter.point_variation(u.values)
    return VariationMeasure(density, num.total(density))


def level_variation_measure(u: BVFunction) -> np.ndarray:
    """``|Du|({x})`` assembled level by level from ``P({u > t}; {x})``.

    Used to check the generalized coarea formula against
    :func:`variation_measure`.
    """
    u = _as_bv(u)
    if not u.space.is_cut:
        raise UnsupportedOperationError("table oracles carry no relative perimeter")
    cut = u.space.perimeter
    levels = _levels(u.values)
    out = num.zeros(u.space.n, u.space.exact)
    for lo, hi in zip(levels, levels[1:]):
        chi = (u.values > lo).astype(int)
        if u.space.exact:
            chi = num.as_array(chi, True)
        out = out + cut.point_variation(chi) * (hi - lo)
    return out


def _has_symmetry(space: FiniteSpace, report=None) -> bool:
    if "P.7" in space.perimeter.declared_axioms:
        return True
    return report is not None and report.holds("P.7")


def superlevel_family(u: BVFunction):
    """The two-sided level sets ``F^t`` as ``(t_lo, t_hi, mask)`` pieces.

    ``F^t = {u > t}`` for ``t >= 0`` and ``{u < t}`` for ``t < 0``; each piece
    is constant on ``[t_lo, t_hi)``.  Empty pieces are skipped.
    """
    vals = u.values
    zero = num.zero(u.space.exact)
    levels = sorted(set(vals.tolist()) | {zero})
    pieces = []
    for lo, hi in zip(levels, levels[1:]):
        if lo >= 0:
            mask = vals > lo
        else:
            mask = vals < hi
        if mask.any():
            pieces.append((lo, hi, mask))
    return pieces


def symmetric_coarea(u: BVFunction, report=None):
    """``(int m(F^t) dt, int P(F^t) dt)`` over the two-sided level sets.

    The first entry equals ``||u||_1`` and, when ``P`` is symmetric, the
    second equals ``Var(u)``.

    Raises
    ------
    AxiomMissingError
        if symmetry is neither declared by the oracle nor verified in
        ``report``.
    """
    u = _as_bv(u)
    space = u.space
    if not _has_symmetry(space, report):
        raise AxiomMissingError("symmetric coarea needs P(E) = P(X \\ E)")
    mass = num.zero(space.exact)
    var = num.zero(space.exact)
    for lo, hi, mask in superlevel_family(u):
        mass += space.mass(mask) * (hi - lo)
        var += space.P(mask) * (hi - lo)
    return mass, var


def one_slope(u: BVFunction) -> np.ndarray:
    """``|grad u|(x) = |Du|({x}) / m(x)``."""
    u = _as_bv(u)
    return variation_measure(u).density / u.space.measure


def weak_p_slope(u: BVFunction, p: float) -> Slope:
    """Minimal p-slope; equal to the 1-slope on a finite space (see module notes)."""
    if not p > 1:
        raise DomainError(f"p must exceed 1, got {p}")
    return Slope(one_slope(u), p)


def chain_rule_defect(u: BVFunction, phi, dphi) -> float:
    """``sum_x | |D phi(u)|({x}) - phi'(u(x)) |Du|({x}) |``.

    A diagnostic only: the identity it measures needs a locality property
    that graph perimeters lack, so the defect is generally positive.  It
    vanishes for affine ``phi`` and for two-valued ``u`` with affine
    interpolation, and shrinks under grid refinement of smooth ``u``.

    ``phi`` and ``dphi`` are vectorized callables; ``phi`` must be strictly
    increasing on the range of ``u``.
    """
    u = _as_bv(u)
    x = np.asarray(u.values, dtype=float)
    levels = np.unique(x)
    phil = np.asarray(phi(levels), dtype=float)
    if np.any(np.diff(phil) <= 0):
        raise DomainError("phi must be strictly increasing on the range of u")
    d = np.asarray(dphi(x), dtype=float)
    if np.any(d < 0):
        raise DomainError("phi' must be non-negative")
    float_space = u.space
    if u.space.exact:
        from .space import CutPerimeter
        cut = u.space.perimeter
        float_space = FiniteSpace(np.asarray(u.space.measure, dtype=float),
                                  CutPerimeter(cut.n, [(a, b, float(w)) for a, b, w in cut.edges()]),
                                  u.space.labels)
    lhs = variation_measure(BVFunction(float_space, phi(x))).density
    rhs = d * variation_measure(BVFunction(float_space, x)).density
    return float(np.sum(np.abs(lhs - rhs)))


def convexity_check(u: BVFunction, v: BVFunction, lam) -> bool:
    """``Var(lam u + (1 - lam) v) <= lam Var(u) + (1 - lam) Var(v)``."""
    u, v = _as_bv(u), _as_bv(v)
    space = u.space
    lam = num.number(lam, space.exact)
    if not 0 <= lam <= 1:
        raise DomainError("lambda must lie in [0, 1]")
    mix = BVFunction(space, lam * u.values + (1 - lam) * v.values)
    lhs = variation(mix)
    rhs = lam * variation(u) + (1 - lam) * variation(v)
    if space.exact:
        return lhs <= rhs
    return float(lhs) <= float(rhs) + 1e-12 * (1.0 + abs(float(rhs)))


def rayleigh_1(u: BVFunction):
    """``Var(u) / ||u||_1``."""
    u = _as_bv(u)
    return variation(u, check=False) / u.l1()


def p_energy(space: FiniteSpace, u: np.ndarray, p: float) -> float:
    """``sum_x m(x) |grad u|(x)^p`` in floats."""
    s = one_slope(BVFunction(space, u))
    return float(np.sum(np.asarray(space.measure, dtype=float) * np.asarray(s, dtype=float) ** p))


__all__ = [
    "BVFunction", "Slope", "VariationMeasure", "chain_rule_defect", "convexity_check",
    "edge_variation", "level_variation", "level_variation_measure", "one_slope",
    "p_energy", "rayleigh_1", "superlevel_family", "symmetric_coarea", "variation",
    "variation_measure", "weak_p_slope",
]
