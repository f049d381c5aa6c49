"""First eigenvalues of the 1- and p-energies and the p-torsion function.

All functions vanish outside the domain ``Omega``.  The p-energy uses the
1-slope,

    E_p(u; A) = sum_{x in A} m(x) |grad u|(x)^p,
    |grad u|(x) = 1/(2 m(x)) sum_y w(x, y) |u(x) - u(y)|.

The eigenvalue quotient takes ``A = X`` (the L^p norm of the slope on the
whole space, so exterior neighbours of ``Omega`` count); the torsion energy
takes ``A = Omega``.

Guaranteed constants
--------------------
The continuum estimate ``lambda_{1,p} >= (h_1/p)^p`` rests on a chain rule
for ``|u|^{p-1} u`` that graph perimeters do not satisfy.  What survives is

    |a|a|^{p-1} - b|b|^{p-1}| <= p (|a|^{p-1} + |b|^{p-1}) |a - b|,

which after splitting each edge term between its endpoints gives
``Var(u|u|^{p-1}) <= 2p sum m |u|^{p-1} |grad u|``.  With
``Var >= h_1 ||.||_1`` and Hoelder this yields

    2p E_p(u)^{1/p} >= h_1 (sum m |u|^p)^{1/p},

so ``lambda_{1,p} >= (h_1/(2p))^p``.  For the torsion function ``w`` the
exterior half of each boundary edge is at most the interior half, so
``Var(w) <= 2 sum_Omega m |grad w|``; Hoelder on ``Omega`` and ``J_p(w) <= 0``
then give ``h_1 <= 2 p^{1/p} (m(Omega)/||w||_1)^{(p-1)/p}``, which implies
``h_1 <= 2 p^{1+1/p} (m(Omega)/||w||_1)^{(p-1)/p}``.  Both are asserted; the
versions without the factor 2 are only reported with their margins.

Nonsmooth minimization
----------------------
Absolute values are smoothed as ``sqrt(r^2 + eps^2)`` and ``eps`` is
decreased geometrically, each stage warm-started from the last and solved
with L-BFGS.  The reported values are the unsmoothed objective at the final
iterate.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import numeric as num
from .axioms import AxiomReport
from .bv import BVFunction, superlevel_family, variation
from .cheeger import ClusterTable, brute_force_hN, check_admissible, dinkelbach_h1
from .errors import (AdmissibilityError, CoercivityError, DomainError, TheoremViolationError,
                     UnsupportedOperationError)
from .space import FiniteSpace


@dataclass
class EigenResult:
    value: object
    minimizer: np.ndarray
    mode: str = "symmetric"
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"value": num.encode(self.value), "mode": self.mode,
               "minimizer": [num.encode(v) for v in self.minimizer]}
        out.update({k: (num.encode(v) if isinstance(v, float) or hasattr(v, "denominator") else v)
                    for k, v in self.meta.items()})
        return out


@dataclass
class TorsionResult:
    w: np.ndarray
    energy: float
    l1_mass: float
    bounds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"energy": self.energy, "l1_mass": self.l1_mass, "w": [float(v) for v in self.w]}
        out.update(self.bounds)
        return out


def h1_value(space: FiniteSpace, omega: np.ndarray):
    """``h_1(omega)``: Dinkelbach on cut oracles, enumeration otherwise."""
    if space.is_cut:
        return dinkelbach_h1(space, omega)
    return brute_force_hN(space, omega, 1)


def _symmetric(space: FiniteSpace, report: AxiomReport | None) -> bool:
    if "P.7" in space.perimeter.declared_axioms:
        return True
    return report is not None and report.holds("P.7")


# ---------------------------------------------------------------------------
# p = 1


def lambda_11(space: FiniteSpace, omega, samples: int = 1000, seed: int = 0,
              report: AxiomReport | None = None) -> EigenResult:
    """First 1-eigenvalue ``inf Var(u) / ||u||_1`` over ``u`` supported in ``omega``.

    The value is ``h_1(omega)`` with the indicator of the maximal Cheeger set
    as minimizer.  Without a symmetric perimeter only non-negative
    competitors are admitted (``mode="nonnegative"``), where the plain
    coarea formula gives the same value.  ``samples`` random competitors
    (signed in symmetric mode) are checked against the value.
    """
    omega = space.mask(omega)
    check_admissible(space, omega, 1)
    mode = "symmetric" if _symmetric(space, report) else "nonnegative"
    cert = h1_value(space, omega)
    h1 = cert.value
    C = cert.cluster.chambers[0]
    chi = BVFunction.indicator(space, C)
    q_chi = variation(chi) / chi.l1()
    if not num.close(q_chi, h1, scale=abs(float(h1))):
        raise TheoremViolationError("indicator of the Cheeger set misses h_1", witness=C)
    worst = None
    idx = np.flatnonzero(omega)
    for t in range(samples):
        rng = np.random.default_rng([seed, t])
        vals = np.zeros(space.n)
        lo = -1.0 if mode == "symmetric" else 0.0
        vals[idx] = rng.uniform(lo, 1.0, size=len(idx))
        # sparse supports probe small sets as well
        vals[idx[rng.random(len(idx)) < 0.3]] = 0.0
        if not vals.any():
            continue
        if space.exact:
            vals = [num.to_fraction(round(v, 6)) for v in vals]
        u = BVFunction(space, vals)
        q = variation(u, check=False) / u.l1()
        if worst is None or q < worst:
            worst = q
        if not num.leq(h1, q, scale=abs(float(h1)), tol=1e-10):
            raise TheoremViolationError("Rayleigh quotient below h_1", witness=np.asarray(vals, dtype=float))
    meta = {"samples": samples, "min_sampled_quotient": worst, "cheeger_set": np.flatnonzero(C).tolist()}
    return EigenResult(h1, chi.values, mode, meta)


def eigenfunction_cheeger_check(space: FiniteSpace, omega, u, h1) -> tuple[bool, bool]:
    """``(attains, levels_cheeger)`` for a function supported in ``omega``.

    ``attains``: ``Var(u) / ||u||_1 == h_1``.  ``levels_cheeger``: every
    nonempty two-sided level set ``F^t`` is a 1-Cheeger set.  On a
    symmetric space the two agree.
    """
    omega = space.mask(omega)
    u = u if isinstance(u, BVFunction) else BVFunction(space, u)
    if np.any(np.asarray(u.values[~omega], dtype=float) != 0):
        raise DomainError("u must vanish outside omega")
    scale = abs(float(h1))
    attains = num.close(variation(u, check=False) / u.l1(), h1, scale=scale)
    levels = all(num.close(space.ratio(mask), h1, scale=scale)
                 for _, _, mask in superlevel_family(u))
    return bool(attains), bool(levels)


def lambda_N(space: FiniteSpace, omega, N: int, table: ClusterTable | None = None) -> EigenResult:
    """``Lambda_N``: least ``sum_i h_1(S_i)`` over N disjoint nonempty supports.

    On each fixed support the best quotient is ``h_1`` of that support, so
    the infimum over disjointly supported functions reduces to a support
    assignment, solved by the same subset recursion as the cluster problem.
    The sandwich ``N h_1 <= Lambda_N <= h_N`` is asserted.
    """
    omega = space.mask(omega)
    check_admissible(space, omega, N)
    if table is None or table.N < N:
        table = ClusterTable(space, omega, N)
    full = table.full
    H1 = table.H[1]
    size = 1 << table.table.k
    L = [np.zeros(size)]
    for level in range(1, N + 1):
        prev, cur = L[-1], np.full(size, np.inf)
        for S in range(1, size):
            subs = table._submasks(S)
            cur[S] = np.min(H1[subs] + prev[S ^ subs])
        L.append(cur)

    cache: dict = {}

    def exact_L(level, S):
        if level == 0:
            return num.zero(space.exact)
        if not np.isfinite(L[level][S]):
            return float("inf")
        if not space.exact:
            return float(L[level][S])
        if (level, S) not in cache:
            subs = table._submasks(S)
            vals = H1[subs] + L[level - 1][S ^ subs]
            near = subs[vals <= L[level][S] * (1 + 1e-9) + 1e-12]
            cache[(level, S)] = min(table.exact_H(1, int(T)) + exact_L(level - 1, S ^ int(T)) for T in near)
        return cache[(level, S)]

    value = exact_L(N, full)
    supports, S, level = [], full, N
    while level > 0:
        subs = table._submasks(S)
        vals = H1[subs] + L[level - 1][S ^ subs]
        for T in sorted(int(t) for t in subs[vals <= L[level][S] * (1 + 1e-9) + 1e-12]):
            if table._equal(table.exact_H(1, T) + exact_L(level - 1, S ^ T), exact_L(level, S)):
                supports.append(T)
                S ^= T
                level -= 1
                break
    h1 = table.exact_H(1, full)
    hN = table.exact_H(N, full)
    if not (num.leq(N * h1, value, scale=abs(float(value))) and num.leq(value, hN, scale=abs(float(hN)))):
        raise TheoremViolationError("N h_1 <= Lambda_N <= h_N fails",
                                    witness={"h1": h1, "Lambda": value, "hN": hN})
    meta = {"N": N, "h1": h1, "hN": hN, "supports": [np.flatnonzero(table.table.mask(T)).tolist() for T in supports]}
    return EigenResult(value, np.zeros(0), "support-assignment", meta)


# ---------------------------------------------------------------------------
# smoothed p-energy


class _Energy:
    """p-energy and its gradient in the free variables ``u|_omega``.

    ``inside_only`` restricts the energy sum to points of ``omega``.
    """

    def __init__(self, space: FiniteSpace, omega: np.ndarray, p: float, inside_only: bool = False):
        if not space.is_cut:
            raise UnsupportedOperationError("p-energies need a cut perimeter")
        cut = space.perimeter
        self.p = p
        self.n = space.n
        self.m = np.asarray(space.measure, dtype=float)
        self.idx = np.flatnonzero(omega)
        self.tail = cut.tail
        self.head = cut.head
        self.w = np.asarray(cut.weight, dtype=float)
        keep = omega[self.tail] | omega[self.head]
        self.tail, self.head, self.w = self.tail[keep], self.head[keep], self.w[keep]
        self.m_omega = self.m[self.idx]
        self.counted = omega.astype(float) if inside_only else np.ones(self.n)

    def full(self, x: np.ndarray) -> np.ndarray:
        u = np.zeros(self.n)
        u[self.idx] = x
        return u

    def slope(self, u: np.ndarray, eps: float = 0.0):
        d = u[self.tail] - u[self.head]
        phi = np.sqrt(d * d + eps * eps) if eps > 0 else np.abs(d)
        wp = self.w * phi
        acc = np.bincount(self.tail, wp, self.n) + np.bincount(self.head, wp, self.n)
        return acc / (2 * self.m), d, phi

    def value(self, x: np.ndarray, eps: float = 0.0) -> float:
        s, _, _ = self.slope(self.full(x), eps)
        return float(np.sum(self.counted * self.m * s**self.p))

    def value_grad(self, x: np.ndarray, eps: float):
        u = self.full(x)
        s, d, phi = self.slope(u, eps)
        p = self.p
        E = float(np.sum(self.counted * self.m * s**p))
        sp = self.counted * s ** (p - 1)
        dphi = 0.5 * p * self.w * (sp[self.tail] + sp[self.head])
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(phi > 0, d / phi, 0.0)
        coef = dphi * ratio
        g = np.bincount(self.tail, coef, self.n) - np.bincount(self.head, coef, self.n)
        return E, g[self.idx]

    def lp(self, x: np.ndarray) -> float:
        return float(np.sum(self.m_omega * np.abs(x) ** self.p))


def _schedule(scale: float, final: float = 1e-9):
    eps, out = 1e-1 * scale, []
    while eps > final * scale:
        out.append(eps)
        eps *= 0.1
    out.append(final * scale)
    return out


def rayleigh_p(space: FiniteSpace, u, p: float) -> float:
    """``E_p(u) / sum m |u|^p`` for a function given on all points."""
    u = np.asarray(u, dtype=float)
    m = np.asarray(space.measure, dtype=float)
    cut = space.perimeter
    d = np.abs(u[cut.tail] - u[cut.head]) * np.asarray(cut.weight, dtype=float)
    acc = np.zeros(space.n)
    np.add.at(acc, cut.tail, d)
    np.add.at(acc, cut.head, d)
    s = acc / (2 * m)
    return float(np.sum(m * s**p) / np.sum(m * np.abs(u) ** p))


def _normalize(u: np.ndarray, m: np.ndarray, p: float) -> np.ndarray:
    norm = np.sum(m * np.abs(u) ** p) ** (1.0 / p)
    u = u / norm
    nz = np.flatnonzero(np.abs(u) > 1e-14)
    if len(nz) and u[nz[0]] < 0:
        u = -u
    return u


def lambda_1p(space: FiniteSpace, omega, p: float, seed: int = 0, restarts: int = 16,
              max_iter: int = 100_000, h1=None, stage_iter: int = 3000) -> EigenResult:
    """Upper bound for the first p-eigenvalue by smoothed multi-start descent.

    Starts: the indicator of ``omega``, the indicator of a Cheeger set, then
    random non-negative vectors from ``default_rng([seed, restart])``.  Each
    restart runs a smoothing schedule with at most ``stage_iter`` L-BFGS
    steps per stage and ``max_iter`` in total.  The best value wins, the
    lowest restart index among ties.  The hard lower bound ``(h_1/(2p))^p``
    is asserted; the margin against ``(h_1/p)^p`` is reported.
    """
    if not p > 1:
        raise DomainError(f"p must exceed 1, got {p}")
    omega = space.mask(omega)
    if not omega.any():
        raise AdmissibilityError("empty domain")
    en = _Energy(space, omega, p)
    if h1 is None:
        cert = h1_value(space, omega)
        h1, C = float(cert.value), cert.cluster.chambers[0]
    else:
        C = omega
    h1 = float(h1)
    starts = [np.ones(len(en.idx)), C[en.idx].astype(float)]
    for r in range(max(restarts - 2, 0)):
        rng = np.random.default_rng([seed, r])
        starts.append(rng.uniform(0.0, 1.0, size=len(en.idx)))
    starts = starts[:max(restarts, 1)]

    def objective(x, eps):
        E, gE = en.value_grad(x, eps)
        D = en.lp(x)
        gD = p * en.m_omega * np.abs(x) ** (p - 1) * np.sign(x)
        return E / D, (gE * D - E * gD) / (D * D)

    best, best_x, converged, iters = np.inf, None, True, 0
    for x0 in starts:
        x = x0 / (en.lp(x0) ** (1.0 / p))
        ok, budget = True, max_iter
        for eps in _schedule(float(np.max(np.abs(x))), final=1e-7):
            cap = min(stage_iter, budget)
            if cap <= 0:
                ok = False
                break
            res = minimize(objective, x, args=(eps,), jac=True, method="L-BFGS-B",
                           options={"maxiter": cap, "gtol": 1e-10, "ftol": 1e-13})
            iters += int(res.nit)
            budget -= int(res.nit)
            if budget <= 0:
                ok = False
            nrm = en.lp(res.x)
            if nrm > 0:
                x = res.x / nrm ** (1.0 / p)
        val = en.value(x) / en.lp(x)
        if val < best:
            best, best_x, converged = val, x, ok
    if not converged:
        warnings.warn("p-eigenvalue descent hit the iteration cap", RuntimeWarning)
    u = _normalize(en.full(best_x), en.m, p)
    hard = (h1 / (2 * p)) ** p
    sharp = (h1 / p) ** p
    if best < hard * (1 - 1e-9):
        raise TheoremViolationError("p-eigenvalue below the guaranteed bound",
                                    witness={"value": best, "bound": hard})
    meta = {"p": p, "h1": h1, "bound_hard": hard, "bound_sharp": sharp,
            "margin_hard": best - hard, "margin_sharp": best - sharp,
            "restarts": len(starts), "iterations": iters, "converged": converged}
    return EigenResult(best, u, "p-rayleigh", meta)


# ---------------------------------------------------------------------------
# torsion


def check_coercive(space: FiniteSpace, omega: np.ndarray) -> None:
    """Every component of ``omega`` must touch ``X \\ omega`` through a positive weight."""
    if not space.is_cut:
        raise UnsupportedOperationError("torsion needs a cut perimeter")
    if omega.all():
        raise CoercivityError("omega is the whole space; the torsion energy is unbounded below")
    adj = space.perimeter.adjacency()
    seen = np.zeros(space.n, dtype=bool)
    for start in np.flatnonzero(omega):
        if seen[start]:
            continue
        comp, stack, touches = [], [int(start)], False
        seen[start] = True
        while stack:
            x = stack.pop()
            comp.append(x)
            for y, w in adj[x]:
                if not w > 0:
                    continue
                if not omega[y]:
                    touches = True
                elif not seen[y]:
                    seen[y] = True
                    stack.append(y)
        if not touches:
            raise CoercivityError(f"points {sorted(comp)} of omega are not connected to the complement")


def torsion_energy(space: FiniteSpace, omega, u, p: float) -> float:
    """``J_p(u) = E_p(u; omega)/p - sum_omega m u``."""
    omega = space.mask(omega)
    en = _Energy(space, omega, p, inside_only=True)
    x = np.asarray(u, dtype=float)[en.idx]
    return en.value(x) / p - float(np.sum(en.m_omega * x))


def torsion(space: FiniteSpace, omega, p: float, tolerance: float = 1e-9, h1=None,
            max_iter: int = 100_000) -> TorsionResult:
    """Minimizer ``w_p`` of ``J_p`` over functions vanishing outside ``omega``.

    Asserted on return: ``J_p(w_p) <= 0``, ``E_p(w_p; omega) <= p sum m w_p`` and
    ``h_1 <= 2 p^{1+1/p} (m(omega)/||w_p||_1)^{(p-1)/p}``.
    """
    if not p > 1:
        raise DomainError(f"p must exceed 1, got {p}")
    omega = space.mask(omega)
    if not omega.any():
        raise AdmissibilityError("empty domain")
    check_coercive(space, omega)
    en = _Energy(space, omega, p, inside_only=True)

    def objective(x, eps):
        E, gE = en.value_grad(x, eps)
        return E / p - float(np.sum(en.m_omega * x)), gE / p - en.m_omega

    x = np.ones(len(en.idx))
    # a rough scale for u: balance the energy against the linear term
    E1 = en.value(x)
    if E1 > 0:
        x = x * (float(np.sum(en.m_omega)) / E1) ** (1.0 / (p - 1))
    scale = float(np.max(np.abs(x))) if x.size else 1.0
    iters, grad_norm = 0, np.inf
    for eps in _schedule(scale, final=1e-12):
        res = minimize(objective, x, args=(eps,), jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "gtol": tolerance, "ftol": 1e-16, "maxcor": 30})
        x = res.x
        iters += int(res.nit)
        grad_norm = float(np.max(np.abs(res.jac)))
    w = en.full(x)
    E = en.value(x)
    J = E / p - float(np.sum(en.m_omega * x))
    l1 = float(np.sum(en.m_omega * np.abs(x)))
    lin = float(np.sum(en.m_omega * x))
    m_omega = float(np.sum(en.m_omega))
    tol = 1e-8 * (1.0 + abs(lin))
    if J > tol:
        raise TheoremViolationError("J_p(w_p) > 0", witness={"J": J})
    if E > p * lin + tol:
        raise TheoremViolationError("E_p(w_p) > p sum m w_p", witness={"E": E, "lin": lin})
    if h1 is None:
        h1 = float(h1_value(space, omega).value)
    h1 = float(h1)
    sharp = p ** (1 + 1 / p) * (m_omega / l1) ** ((p - 1) / p)
    hard = 2 * sharp
    if h1 > hard * (1 + 1e-9):
        raise TheoremViolationError("h_1 exceeds the torsion bound", witness={"h1": h1, "bound": hard})
    bounds = {"p": p, "h1": h1, "J": J, "energy_p": E, "linear": lin,
              "bound_hard": hard, "bound_sharp": sharp, "margin_hard": hard - h1,
              "margin_sharp": sharp - h1, "grad_norm": grad_norm, "iterations": iters}
    return TorsionResult(w, J, l1, bounds)


__all__ = [
    "EigenResult", "TorsionResult", "check_coercive", "eigenfunction_cheeger_check", "h1_value",
    "lambda_11", "lambda_1p", "lambda_N", "rayleigh_p", "torsion", "torsion_energy",
]
