"""Prescribed-curvature functional ``J_H(F) = P(F) - sum_{x in F} H(x) m(x)``.

For a cut perimeter the minimization over ``F`` inside a domain ``Omega`` is a
single min-cut.  Node ``x`` of ``Omega`` gets

* an arc ``s -> x`` with capacity ``max(g(x), 0)``, paid when ``x`` is left
  out of ``F``;
* an arc ``x -> t`` with capacity ``b(x) + max(-g(x), 0)``, paid when ``x``
  is kept, where ``b(x)`` is the weight from ``x`` to ``X \\ Omega``;
* both directed arcs of weight ``w`` for every edge inside ``Omega``;

with ``g = H m``.  Then ``J_H(F) = cut(F) - sum_Omega max(g, 0)`` for the
source side ``F``.  ``J_H`` is submodular, so its minimizers form a lattice
and the smallest and largest are read off the residual graph.

Points outside the cut form (table oracles) fall back to enumeration of all
subsets of ``Omega``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import numeric as num
from .errors import TheoremViolationError
from .flow import FlowNetwork
from .space import FiniteSpace
from .subsets import SubsetTable

BRUTE_LIMIT = 20


def flow_tolerance(space: FiniteSpace, omega: np.ndarray, kappa) -> float:
    """Float slack for deciding ``min J = 0``; zero in exact mode."""
    if space.exact:
        return 0.0
    return 1e-9 * (1.0 + abs(float(kappa)) * float(space.mass(omega)))


@dataclass
class JMinimum:
    """Result of minimizing ``J_H`` over subsets of ``omega``."""

    value: object
    minimal: np.ndarray
    maximal: np.ndarray
    method: str = "min-cut"

    @property
    def nontrivial(self) -> bool:
        return bool(self.maximal.any())


def _gain(space, omega, H):
    if np.ndim(H) == 0:
        H = [H] * space.n
    H = num.as_array(list(H), space.exact)
    return H * space.measure, H


def _boundary_weight(space: FiniteSpace, omega: np.ndarray) -> np.ndarray:
    cut = space.perimeter
    b = num.zeros(space.n, space.exact)
    for a, c, w in cut.edges():
        if omega[a] and not omega[c]:
            b[a] += w
        elif omega[c] and not omega[a]:
            b[c] += w
    return b


def _network(space: FiniteSpace, omega: np.ndarray, g: np.ndarray, eps: float):
    idx = np.flatnonzero(omega)
    local = {int(p): i for i, p in enumerate(idx)}
    k = len(idx)
    s, t = k, k + 1
    net = FlowNetwork(k + 2, s, t, eps)
    b = _boundary_weight(space, omega)
    zero = num.zero(space.exact)
    offset = zero
    for i, p in enumerate(idx):
        gp = g[p]
        if gp > 0:
            net.add_arc(s, i, gp)
            offset += gp
        sink_cap = b[p] + (-gp if gp < 0 else zero)
        if sink_cap > 0:
            net.add_arc(i, t, sink_cap)
    for a, c, w in space.perimeter.edges():
        if omega[a] and omega[c] and w > 0:
            net.add_arc(local[a], local[c], w, w)
    return net, idx, offset


def _lift(space, idx, side):
    out = np.zeros(space.n, dtype=bool)
    out[idx] = side[: len(idx)]
    return out


def minimize_J(space: FiniteSpace, omega, H) -> JMinimum:
    """Minimize ``F -> P(F) - sum_F H m`` over ``F`` contained in ``omega``.

    ``H`` is a scalar or a per-point array.  Returns the minimum value and
    the smallest and largest minimizers.
    """
    omega = space.mask(omega)
    g, _ = _gain(space, omega, H)
    if not space.is_cut:
        return _minimize_J_brute(space, omega, g)
    if not omega.any():
        return JMinimum(num.zero(space.exact), space.empty(), space.empty())
    scale = float(num.total(abs(g[omega]))) + float(space.P(omega))
    eps = 0.0 if space.exact else 1e-13 * (1.0 + scale)
    net, idx, offset = _network(space, omega, g, eps)
    value = net.max_flow() - offset
    lo = _lift(space, idx, net.source_side())
    hi = _lift(space, idx, ~net.sink_side())
    return JMinimum(value, lo, hi)


def _minimize_J_brute(space, omega, g) -> JMinimum:
    table = SubsetTable(space, np.flatnonzero(omega), limit=BRUTE_LIMIT)
    gl = g[table.index]
    if space.exact:
        # J = P - G over the common denominator of both tables
        G = table._accumulate(num.as_array(list(gl), True))
        vals = np.asarray([table.P(c) - G[c] for c in table.codes], dtype=object)
        best = min(vals.tolist())
        hits = np.flatnonzero(vals == best)
    else:
        G = table._accumulate(np.asarray(gl, dtype=float))
        vals = table.float_perimeters() - G
        best = float(vals.min())
        tol = 1e-12 * (1.0 + float(np.abs(vals).max()))
        hits = np.flatnonzero(vals <= best + tol)
    sizes = [bin(int(c)).count("1") for c in hits]
    small = int(hits[int(np.argmin(sizes))])
    big = int(hits[int(np.argmax(sizes))])
    inter = int(np.bitwise_and.reduce(hits))
    union = int(np.bitwise_or.reduce(hits))
    lo = inter if inter in set(hits.tolist()) else small
    hi = union if union in set(hits.tolist()) else big
    return JMinimum(best, table.mask(lo), table.mask(hi), method="brute")


def minimize_Jkappa(space: FiniteSpace, omega, kappa) -> JMinimum:
    """Minimize ``J_kappa(F) = P(F) - kappa m(F)`` over ``F`` inside ``omega``."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    return minimize_J(space, omega, num.number(kappa, space.exact))


def is_nontrivial(space, omega, res: JMinimum, kappa) -> bool:
    """Whether ``J_kappa`` has a nonempty minimizer.

    In float mode a nonempty set counts when its ``J`` value is within
    :func:`flow_tolerance` of the minimum.
    """
    if res.nontrivial:
        return True
    if space.exact:
        return False
    tol = flow_tolerance(space, omega, kappa)
    return float(res.value) >= -tol and _near_zero_nonempty(space, omega, kappa, tol)


def _near_zero_nonempty(space, omega, kappa, tol) -> bool:
    # shift kappa up by the tolerance per unit mass; a nonempty minimizer of
    # the shifted problem has J_kappa within tol of zero
    m = float(space.mass(omega))
    shifted = minimize_J(space, omega, float(kappa) + tol / max(m, 1e-300))
    if not shifted.nontrivial:
        return False
    F = shifted.maximal
    return float(space.P(F)) - float(kappa) * float(space.mass(F)) <= tol


# ---------------------------------------------------------------------------
# threshold scan


@dataclass
class ScanRow:
    kappa: object
    min_value: object
    nontrivial: bool
    minimal: np.ndarray
    maximal: np.ndarray


@dataclass
class CurvatureScan:
    rows: list[ScanRow]
    threshold: tuple = field(default=(None, None))

    @property
    def kappa_grid(self):
        return [r.kappa for r in self.rows]

    def flags(self) -> list[bool]:
        return [r.nontrivial for r in self.rows]

    def to_rows(self) -> list[dict]:
        return [{"kappa": num.fmt(r.kappa), "min_value": num.fmt(r.min_value),
                 "nontrivial": int(r.nontrivial), "min_size": int(r.minimal.sum()),
                 "max_size": int(r.maximal.sum())} for r in self.rows]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=["kappa", "min_value", "nontrivial", "min_size", "max_size"],
                               lineterminator="\n")
            w.writeheader()
            w.writerows(self.to_rows())


def kappa_grid(space: FiniteSpace, omega, step=None, points: int = 41, upper=None):
    """Uniform grid on ``[0, upper]`` with ``upper`` defaulting to ``2 P(Omega)/m(Omega)``."""
    omega = space.mask(omega)
    if upper is None:
        upper = 2 * space.ratio(omega)
    if step is None:
        step = num.number(upper, space.exact) / (points - 1)
    step = num.number(step, space.exact)
    k = int(np.ceil(float(upper) / float(step) - 1e-12))
    return [step * i for i in range(k + 1)]


def kappa_threshold_scan(space: FiniteSpace, omega, grid=None, step=None, jobs: int = 1) -> CurvatureScan:
    """Minimize ``J_kappa`` along a grid and bracket the onset of nonempty minimizers.

    ``threshold`` is ``(last kappa without, first kappa with)`` a nonempty
    minimizer.  The flag sequence must switch from False to True exactly
    once; anything else raises :class:`TheoremViolationError`.
    """
    omega = space.mask(omega)
    if grid is None:
        grid = kappa_grid(space, omega, step=step)
    grid = sorted(num.number(k, space.exact) for k in grid)

    def one(kappa):
        res = minimize_Jkappa(space, omega, kappa)
        return ScanRow(kappa, res.value, is_nontrivial(space, omega, res, kappa), res.minimal, res.maximal)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(jobs) as ex:
            rows = list(ex.map(one, grid))
    else:
        rows = [one(k) for k in grid]

    flags = [r.nontrivial for r in rows]
    first = next((i for i, f in enumerate(flags) if f), None)
    if first is not None and not all(flags[first:]):
        bad = next(i for i in range(first, len(flags)) if not flags[i])
        raise TheoremViolationError("nonempty minimizers disappear as kappa grows",
                                    witness={"kappa": num.encode(rows[bad].kappa)})
    for a, b in zip(rows, rows[1:]):
        if b.maximal.any() and not np.all(b.maximal >= a.maximal):
            raise TheoremViolationError("largest minimizer is not monotone in kappa",
                                        witness={"kappa": num.encode(b.kappa)})
    lo = rows[first - 1].kappa if first not in (None, 0) else None
    hi = rows[first].kappa if first is not None else None
    return CurvatureScan(rows, (lo, hi))


# ---------------------------------------------------------------------------
# curvature certificates


@dataclass
class CurvatureCertificate:
    E: np.ndarray
    H: np.ndarray
    verified: bool
    J_E: object = None
    J_min: object = None
    method: str = ""

    def to_dict(self, space: FiniteSpace | None = None) -> dict:
        members = space.members(self.E) if space is not None else np.flatnonzero(self.E).tolist()
        return {"set": members, "verified": self.verified, "J_set": num.encode(self.J_E),
                "J_min": num.encode(self.J_min), "method": self.method}


def J_value(space: FiniteSpace, F, H):
    F = space.mask(F)
    g, _ = _gain(space, F, H)
    return space.P(F) - num.total(g[F])


def pmc_certificate(space: FiniteSpace, omega, E, H) -> CurvatureCertificate:
    """Check that ``H`` is a mean curvature of ``E`` in ``omega``.

    ``verified`` is True when ``E`` attains the minimum of
    ``F -> P(F) - sum_F H m`` over all ``F`` inside ``omega``.
    """
    omega = space.mask(omega)
    E = space.mask(E)
    if np.any(E & ~omega):
        raise ValueError("E must lie inside omega")
    _, Hs = _gain(space, omega, H)
    res = minimize_J(space, omega, Hs)
    JE = J_value(space, E, Hs)
    if space.exact:
        ok = JE == res.value
    else:
        ok = float(JE) <= float(res.value) + flow_tolerance(space, omega, max(abs(float(h)) for h in Hs))
    return CurvatureCertificate(E, Hs, bool(ok), JE, res.value, res.method)


__all__ = [
    "CurvatureCertificate", "CurvatureScan", "JMinimum", "J_value", "ScanRow", "flow_tolerance",
    "is_nontrivial", "kappa_grid", "kappa_threshold_scan", "minimize_J", "minimize_Jkappa",
    "pmc_certificate",
]
