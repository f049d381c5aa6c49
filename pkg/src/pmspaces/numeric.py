"""Float / exact-rational number plumbing.

A space is either *float* (numpy ``float64`` arrays) or *exact* (numpy
``object`` arrays holding :class:`fractions.Fraction`).  Most algorithms are
written once against the generic array protocol; the helpers here cover the
few places where the two modes differ.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from numbers import Rational

import numpy as np

# Relative tolerance for float-mode identities that are exact in theory.
IDENTITY_TOL = 1e-12
# Relative tolerance when deciding whether two float ratios tie.
TIE_TOL = 1e-10


def to_fraction(x) -> Fraction:
    """Convert ``x`` to a Fraction, reading floats through their decimal repr.

    ``0.01`` becomes ``1/100`` rather than the binary expansion of the double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return Fraction(x)
    xf = float(x)
    if not np.isfinite(xf):
        raise ValueError(f"cannot represent {x!r} exactly")
    return Fraction(repr(xf))


def as_array(values, exact: bool) -> np.ndarray:
    """Return a 1-d number array in the requested mode."""
    if exact:
        out = np.empty(len(values), dtype=object)
        for i, v in enumerate(values):
            out[i] = to_fraction(v)
        return out
    return np.asarray([_float(v) for v in values], dtype=float)


def _float(x) -> float:
    # "p/q" strings are accepted in both modes
    return float(Fraction(x)) if isinstance(x, str) else float(x)


def is_exact_array(a: np.ndarray) -> bool:
    return a.dtype == object


def zeros(n: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(n, dtype=object)
        out[:] = Fraction(0)
        return out
    return np.zeros(n)


def zero(exact: bool):
    return Fraction(0) if exact else 0.0


def number(x, exact: bool):
    return to_fraction(x) if exact else _float(x)


def total(a: np.ndarray):
    """Sum that stays a Fraction in exact mode (``np.sum`` returns ``0`` on empty)."""
    if a.dtype == object:
        s = Fraction(0)
        for v in a:
            s += v
        return s
    return float(np.sum(a))


def scale_to_integers(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Write an exact array as ``ints / den`` with a common denominator.

    Returns an ``int64`` array when it fits comfortably, otherwise an object
    array of Python ints.
    """
    den = 1
    for v in a:
        den = lcm(den, v.denominator)
    ints = [int(v * den) for v in a]
    bound = sum(abs(i) for i in ints)
    if bound < 2**60:
        return np.asarray(ints, dtype=np.int64), den
    out = np.empty(len(ints), dtype=object)
    out[:] = ints
    return out, den


def close(a, b, scale=1.0, tol: float = IDENTITY_TOL) -> bool:
    """Equality for exact numbers, relative closeness for floats."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= tol * (1.0 + abs(float(scale)))


def leq(a, b, scale=1.0, tol: float = IDENTITY_TOL) -> bool:
    """``a <= b`` exactly, or up to a relative float tolerance."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a <= b
    return float(a) <= float(b) + tol * (1.0 + abs(float(scale)))


def fmt(x) -> str:
    """Decimal string used in serialized outputs."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return repr(float(x))
    return repr(float(x))


def encode(x):
    """JSON encoding of a number: ``"p/q"`` strings for Fractions."""
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


def decode(x, exact: bool):
    if exact:
        return to_fraction(x)
    if isinstance(x, str):
        return float(Fraction(x))
    return float(x)
