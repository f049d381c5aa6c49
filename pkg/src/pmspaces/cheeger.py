"""N-Cheeger constants and clusters.

``h_N(Omega)`` is the least value of ``sum_i P(E_i) / m(E_i)`` over N pairwise
disjoint nonempty subsets ``E_i`` of ``Omega``.  Three solvers are offered:

* :func:`brute_force_hN` -- exact, by dynamic programming over subsets.
  With ``R(T) = P(T)/m(T)``,

      H_1(S) = min_{T <= S} R(T),    H_k(S) = min_{T <= S} R(T) + H_{k-1}(S \\ T),

  which visits every disjoint assignment without listing them.  The table
  ``H_k(S)`` also gives ``h_k`` of every subdomain, which the structural
  verifiers reuse.  Runs in floats with an exact re-evaluation of all
  near-optimal branches in rational mode.
* :func:`dinkelbach_h1` -- exact ``h_1`` through the prescribed-curvature
  functional: minimize ``P(F) - kappa m(F)`` by min-cut, move ``kappa`` to
  the ratio of the minimizer, and stop when the minimum is zero.  The ratio
  strictly drops each round and there are finitely many sets.
* :func:`local_search_hN` -- block-coordinate descent for larger N-cluster
  instances; an upper bound only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import numeric as num
from .axioms import isoperimetric_profile
from .curvature import flow_tolerance, minimize_J, minimize_Jkappa
from .errors import AdmissibilityError, NumericalDegeneracyError, SizeError, TheoremViolationError
from .space import FiniteSpace
from .subsets import SubsetTable, submasks

BRUTE_LIMIT = 16
EXHAUSTIVE_SETS = 16


@dataclass
class Cluster:
    """``N`` pairwise disjoint nonempty chambers."""

    chambers: list

    def __post_init__(self):
        seen = None
        for c in self.chambers:
            c = np.asarray(c, dtype=bool)
            if not c.any():
                raise ValueError("chambers must be nonempty")
            if seen is None:
                seen = c.copy()
            elif np.any(seen & c):
                raise ValueError("chambers must be pairwise disjoint")
            else:
                seen |= c
        self.chambers = [np.asarray(c, dtype=bool) for c in self.chambers]

    @property
    def N(self) -> int:
        return len(self.chambers)

    def ratios(self, space: FiniteSpace) -> list:
        return [space.ratio(c) for c in self.chambers]

    def value(self, space: FiniteSpace):
        out = num.zero(space.exact)
        for r in self.ratios(space):
            out += r
        return out

    def union(self) -> np.ndarray:
        out = np.zeros_like(self.chambers[0])
        for c in self.chambers:
            out |= c
        return out


@dataclass
class CheegerCertificate:
    value: object
    cluster: Cluster
    ratios: list
    method: str
    trace: list = field(default_factory=list)
    optimal: bool = True

    @property
    def N(self) -> int:
        return self.cluster.N

    def to_dict(self, space: FiniteSpace) -> dict:
        val = {"decimal": num.fmt(self.value)}
        if space.exact:
            val["numerator"] = self.value.numerator
            val["denominator"] = self.value.denominator
        return {
            "value": val,
            "N": self.N,
            "method": self.method,
            "optimal": self.optimal,
            "chambers": [space.members(c) for c in self.cluster.chambers],
            "ratios": [num.encode(r) for r in self.ratios],
            "trace": [{k: (num.encode(v) if not isinstance(v, (int, bool, str)) else v)
                       for k, v in row.items()} for row in self.trace],
        }


def _certificate(space, chambers, method, trace=(), optimal=True) -> CheegerCertificate:
    cl = Cluster(list(chambers))
    ratios = cl.ratios(space)
    return CheegerCertificate(cl.value(space), cl, ratios, method, list(trace), optimal)


def check_admissible(space: FiniteSpace, omega: np.ndarray, N: int):
    if N < 1:
        raise ValueError("N must be at least 1")
    if int(omega.sum()) < N:
        raise AdmissibilityError(f"domain has {int(omega.sum())} points, fewer than N={N}")


# ---------------------------------------------------------------------------
# exhaustive solver


class ClusterTable:
    """Float DP tables ``H[k][S]`` for ``k = 1..N`` over subsets ``S`` of ``omega``.

    Exact values are recovered on demand by :meth:`exact_H`, which only
    expands branches whose float value lies within a relative ``1e-9`` of the
    float optimum.
    """

    def __init__(self, space: FiniteSpace, omega: np.ndarray, N: int):
        k = int(omega.sum())
        if k > BRUTE_LIMIT:
            raise SizeError(f"exhaustive cluster search needs |Omega| <= {BRUTE_LIMIT}, got {k}")
        self.space = space
        self.omega = omega
        self.N = N
        self.table = SubsetTable(space, np.flatnonzero(omega), limit=BRUTE_LIMIT)
        R = self.table.float_ratios()
        self.R = R
        size = 1 << k
        self.subs = [None] * size
        H = [np.zeros(size)]
        for level in range(1, N + 1):
            prev = H[-1]
            cur = np.full(size, np.inf)
            for S in range(1, size):
                subs = self._submasks(S)
                cur[S] = np.min(R[subs] + prev[S ^ subs])
            H.append(cur)
        self.H = H
        self._exact_cache: dict = {}

    def _submasks(self, S: int) -> np.ndarray:
        subs = self.subs[S]
        if subs is None:
            subs = submasks(S)[1:]
            if self.table.k <= 13:
                self.subs[S] = subs
        return subs

    def _near(self, level: int, S: int) -> np.ndarray:
        """Chamber candidates ``T`` attaining ``H[level][S]`` up to float slack."""
        subs = self._submasks(S)
        vals = self.R[subs] + self.H[level - 1][S ^ subs]
        best = self.H[level][S]
        return subs[vals <= best * (1 + 1e-9) + 1e-12]

    def ratio(self, T: int):
        return self.table.ratio(T) if self.table.exact else float(self.R[T])

    def exact_H(self, level: int, S: int):
        """``H[level][S]`` in the space's number type (inf if inadmissible)."""
        if level == 0:
            return num.zero(self.table.exact)
        if not np.isfinite(self.H[level][S]):
            return float("inf")
        if not self.table.exact:
            return float(self.H[level][S])
        key = (level, S)
        if key not in self._exact_cache:
            self._exact_cache[key] = min(self.ratio(int(T)) + self.exact_H(level - 1, S ^ int(T))
                                         for T in self._near(level, S))
        return self._exact_cache[key]

    def optimal_chambers(self, level: int, S: int) -> list[int]:
        """Greedy smallest-code chambers of an optimal ``level``-cluster in ``S``."""
        out = []
        target = self.exact_H(level, S)
        while level > 0:
            for T in sorted(int(t) for t in self._near(level, S)):
                val = self.ratio(T) + self.exact_H(level - 1, S ^ T)
                if self._equal(val, target):
                    out.append(T)
                    target = self.exact_H(level - 1, S ^ T)
                    S ^= T
                    level -= 1
                    break
            else:
                raise NumericalDegeneracyError("could not reconstruct an optimal cluster")
        return out

    def _equal(self, a, b) -> bool:
        if self.table.exact:
            return a == b
        return abs(a - b) <= 1e-10 * (1 + abs(b))

    @property
    def full(self) -> int:
        return self.table.full_code


def brute_force_hN(space: FiniteSpace, omega, N: int = 1, table: ClusterTable | None = None) -> CheegerCertificate:
    """Exact ``h_N(omega)`` with an optimal cluster.

    Ties are broken by choosing the first chamber with the smallest bitmask
    (bit ``i`` = ``i``-th point of ``omega``), then recursing on the rest.
    """
    omega = space.mask(omega)
    check_admissible(space, omega, N)
    if table is None or table.N < N:
        table = ClusterTable(space, omega, N)
    codes = table.optimal_chambers(N, table.full)
    chambers = [table.table.mask(c) for c in codes]
    cert = _certificate(space, chambers, "brute")
    if not table._equal(cert.value, table.exact_H(N, table.full)):
        raise NumericalDegeneracyError("reconstructed cluster does not attain the DP value")
    return cert


def cheeger_sets(space: FiniteSpace, omega, h1=None) -> list[np.ndarray]:
    """All 1-Cheeger sets of ``omega`` by enumeration (``|omega| <= 16``)."""
    omega = space.mask(omega)
    table = SubsetTable(space, np.flatnonzero(omega), limit=EXHAUSTIVE_SETS)
    value, codes = table.min_ratio()
    if h1 is not None and not num.close(value, h1, scale=abs(float(h1))):
        raise TheoremViolationError(f"enumerated h_1 {value} differs from {h1}")
    return [table.mask(c) for c in codes]


# ---------------------------------------------------------------------------
# parametric solver


def dinkelbach_h1(space: FiniteSpace, omega, max_iter: int = 1000) -> CheegerCertificate:
    """Exact ``h_1(omega)`` by iterated minimization of ``P - kappa m``.

    The certificate chamber is the largest minimizer at the final ``kappa``,
    which is the maximal Cheeger set.
    """
    omega = space.mask(omega)
    check_admissible(space, omega, 1)
    E = omega.copy()
    kappa = space.ratio(E)
    trace = []
    for it in range(max_iter):
        res = minimize_Jkappa(space, omega, kappa)
        tol = flow_tolerance(space, omega, kappa)
        trace.append({"iter": it, "kappa": kappa, "J_min": res.value,
                      "min_size": int(res.minimal.sum()), "max_size": int(res.maximal.sum())})
        if res.value >= -tol:
            if res.maximal.any():
                E = res.maximal
            return _certificate(space, [E], "dinkelbach", trace)
        F = res.maximal if res.maximal.any() else res.minimal
        new_kappa = space.ratio(F)
        if not new_kappa < kappa:
            raise NumericalDegeneracyError("Dinkelbach ratio failed to decrease; try rational mode")
        E, kappa = F, new_kappa
    raise NumericalDegeneracyError(f"no convergence within {max_iter} iterations")


def maximal_minimal_cheeger(space: FiniteSpace, omega, h1=None):
    """Maximal Cheeger set and the list of inclusion-minimal Cheeger sets.

    The maximal set is the largest minimizer of ``P - h_1 m``.  Minimal sets
    are found by enumeration for ``|omega| <= 16``; beyond that, for every
    point ``x`` the smallest minimizer containing ``x`` is computed by
    forcing ``x`` into the source side, and the inclusion-minimal ones are
    kept.
    """
    omega = space.mask(omega)
    if h1 is None:
        h1 = dinkelbach_h1(space, omega).value
    res = minimize_Jkappa(space, omega, h1)
    E_max = res.maximal
    if not E_max.any() and not space.exact:
        tol = flow_tolerance(space, omega, h1)
        shifted = minimize_Jkappa(space, omega, float(h1) + tol / float(space.mass(omega)))
        cand = shifted.maximal
        if cand.any() and float(space.P(cand)) - float(h1) * float(space.mass(cand)) <= tol:
            E_max = cand
    if not E_max.any():
        raise NumericalDegeneracyError("no nonempty minimizer at kappa = h_1; use rational mode")
    if int(omega.sum()) <= EXHAUSTIVE_SETS:
        sets = cheeger_sets(space, omega, h1)
        minimal = _inclusion_minimal(sets)
    else:
        minimal = _inclusion_minimal(forced_minimizers(space, omega, h1, E_max))
    return E_max, minimal


def forced_minimizers(space: FiniteSpace, omega, kappa, within) -> list[np.ndarray]:
    """For each ``x`` in ``within``, the smallest minimizer of ``J_kappa`` containing ``x``.

    Points that lie in no minimizer are skipped.
    """
    omega = space.mask(omega)
    big = float(space.P(omega)) + float(kappa) * float(space.mass(omega)) + 1.0
    out = []
    for x in np.flatnonzero(within):
        H = [kappa] * space.n
        H[x] = kappa + num.number(big, space.exact) / space.measure[x]
        res = minimize_J(space, omega, H)
        # x lies in a minimizer exactly when forcing it costs nothing extra
        target = -num.number(big, space.exact)
        if res.minimal[x] and num.leq(res.value, target + flow_tolerance(space, omega, kappa)):
            out.append(res.minimal)
    return out


def _inclusion_minimal(sets: list[np.ndarray]) -> list[np.ndarray]:
    uniq = []
    for s in sets:
        if not any(np.array_equal(s, u) for u in uniq):
            uniq.append(s)
    out = []
    for s in uniq:
        if not any((u is not s) and np.all(u <= s) and not np.array_equal(u, s) for u in uniq):
            out.append(s)
    out.sort(key=lambda m: [int(i) for i in np.flatnonzero(m)])
    return out


# ---------------------------------------------------------------------------
# structural verifiers


def _fail(msg, **witness):
    raise TheoremViolationError(msg, witness=witness)


def verify_cluster_inequalities(space: FiniteSpace, omega, N: int, table: ClusterTable | None = None,
                                profile=None) -> dict:
    """Check the structural inequalities for N-Cheeger constants exhaustively.

    Checked, for the given ``omega`` and all ``M < N``:

    * ``h_M + h_{N-M} <= h_N`` and ``k h_M <= h_N`` when ``N = k M``;
    * for an optimal N-cluster and each proper index set ``J``, the chambers
      in ``J`` form an optimal ``|J|``-cluster of ``omega`` minus the other
      chambers;
    * every chamber has measure at least the profile volume threshold at
      ``h_N``, and ``h_N >= N f(m(omega))``;
    * ``h_M`` is non-increasing under enlargement of the domain, over all
      subdomains;
    * unions and nonempty intersections of 1-Cheeger sets are 1-Cheeger.

    Raises :class:`TheoremViolationError` with a witness on the first failure.
    """
    omega = space.mask(omega)
    check_admissible(space, omega, N)
    if table is None or table.N < N:
        table = ClusterTable(space, omega, N)
    full = table.full
    h = {M: table.exact_H(M, full) for M in range(1, N + 1)}
    report = {"h": {M: num.encode(v) for M, v in h.items()}, "checks": []}

    def leq(a, b):
        return a <= b if space.exact else float(a) <= float(b) + 1e-10 * (1 + abs(float(b)))

    for M in range(1, N):
        if not leq(h[M] + h[N - M], h[N]):
            _fail("h_M + h_{N-M} > h_N", M=M, N=N)
        if N % M == 0 and not leq((N // M) * h[M], h[N]):
            _fail("k h_M > h_N", M=M, N=N)
    report["checks"].append("superadditivity")

    codes = table.optimal_chambers(N, full)
    for r in range(1, N):
        for J in combinations(range(N), r):
            others = 0
            for i in range(N):
                if i not in J:
                    others |= codes[i]
            sub_domain = full ^ others
            val = num.zero(space.exact)
            for i in J:
                val += table.ratio(codes[i])
            best = table.exact_H(r, sub_domain)
            if not (val == best if space.exact else abs(float(val) - float(best)) <= 1e-10 * (1 + abs(float(best)))):
                _fail("subcluster is not optimal in its subdomain", J=list(J))
    report["checks"].append("subcluster-optimality")

    if profile is None and space.n <= 20:
        profile = isoperimetric_profile(space)
    if profile is not None:
        c = profile.volume_threshold(h[N])
        for T in codes:
            if c is None or not leq(c, table.table.m(T)):
                _fail("chamber below the volume threshold", chamber=int(T), threshold=num.encode(c))
        if not leq(N * profile(space.mass(omega)), h[N]):
            _fail("h_N < N f(m(Omega))")
        report["volume_threshold"] = num.encode(c)
        report["checks"].append("volume-bound")

    for M in range(1, N + 1):
        Hm = table.H[M]
        k = table.table.k
        for i in range(k):
            bit = 1 << i
            S = np.flatnonzero((np.arange(1 << k) & bit) != 0)
            big, small = Hm[S], Hm[S ^ bit]
            finite = np.isfinite(big) & np.isfinite(small)
            with np.errstate(invalid="ignore"):
                bad = np.flatnonzero(finite & (small < big - 1e-10 * (1 + np.abs(big))))
            if len(bad):
                _fail("h_M increased under domain enlargement", M=M, S=int(S[bad[0]]), point=i)
    report["checks"].append("monotonicity")

    sets = cheeger_sets(space, omega, h[1])
    check_closure(space, omega, sets, h[1])
    report["checks"].append("union-intersection")
    report["cheeger_sets"] = len(sets)
    return report


def check_closure(space, omega, sets, h1):
    def is_cheeger(E):
        return num.close(space.ratio(E), h1, scale=abs(float(h1)))

    for a, b in combinations(sets, 2):
        if not is_cheeger(a | b):
            _fail("union of Cheeger sets is not Cheeger", E=a, F=b)
        inter = a & b
        if inter.any() and not is_cheeger(inter):
            _fail("intersection of Cheeger sets is not Cheeger", E=a, F=b)


# ---------------------------------------------------------------------------
# heuristic


def local_search_hN(space: FiniteSpace, omega, N: int, seed: int = 0, restarts: int = 8,
                    max_rounds: int = 50) -> CheegerCertificate:
    """Upper bound for ``h_N`` by block-coordinate descent with point moves.

    Restart 0 peels chambers greedily (a smallest Cheeger set of what is
    left, repeatedly); the others start from random labelings drawn from
    ``default_rng([seed, restart])``.  Each round replaces every chamber by
    a maximal Cheeger set of ``omega`` minus the other chambers, then tries
    moving single points between chambers and the unused part.  Neither step
    increases the objective.  The best restart wins, the lowest index among
    equal values.
    """
    omega = space.mask(omega)
    check_admissible(space, omega, N)
    if N == 1:
        return dinkelbach_h1(space, omega)
    idx = np.flatnonzero(omega)
    best = None
    trace = []
    for r in range(restarts):
        labels = _start_labels(space, omega, idx, N, seed, r)
        value = _labels_value(space, idx, labels, N)
        rnd = 0
        for rnd in range(max_rounds):
            improved = False
            for i in range(N):
                rest = omega.copy()
                rest[idx[(labels != i) & (labels < N)]] = False
                cand = dinkelbach_h1(space, rest).cluster.chambers[0]
                trial = labels.copy()
                trial[trial == i] = N
                trial[cand[idx]] = i
                new_value = _labels_value(space, idx, trial, N)
                if _better(new_value, value):
                    labels, value, improved = trial, new_value, True
            moved, labels, value = _point_moves(space, idx, labels, value, N)
            if not (improved or moved):
                break
        trace.append({"restart": r, "value": value, "rounds": rnd + 1})
        if best is None or _better(value, best[0]):
            best = (value, labels)
    chambers = []
    for i in range(N):
        c = np.zeros(space.n, dtype=bool)
        c[idx[best[1] == i]] = True
        chambers.append(c)
    return _certificate(space, chambers, "local-search", trace, optimal=False)


def _better(a, b) -> bool:
    return a < b and not num.close(a, b, scale=abs(float(b)))


def _labels_value(space, idx, labels, N):
    """Objective of a labeling (label ``N`` = unused); inf if a chamber is empty."""
    out = num.zero(space.exact)
    for i in range(N):
        c = np.zeros(space.n, dtype=bool)
        c[idx[labels == i]] = True
        if not c.any():
            return float("inf")
        out += space.ratio(c)
    return out


def _start_labels(space, omega, idx, N, seed, r):
    if r == 0:
        labels = np.full(len(idx), N)
        rest = omega.copy()
        for i in range(N):
            if int(rest.sum()) < N - i:
                break
            h = dinkelbach_h1(space, rest)
            mins = forced_minimizers(space, rest, h.value, h.cluster.chambers[0])
            pick = min(mins, key=lambda m: int(m.sum())) if mins else h.cluster.chambers[0]
            if int(rest.sum()) - int(pick.sum()) < N - i - 1:
                break
            labels[pick[idx]] = i
            rest &= ~pick
        else:
            return labels
    rng = np.random.default_rng([seed, r])
    labels = rng.integers(0, N + 1, size=len(idx))
    labels[rng.permutation(len(idx))[:N]] = np.arange(N)
    return labels


def _point_moves(space, idx, labels, value, N):
    moved = False
    for p in range(len(idx)):
        current = labels[p]
        for target in range(N + 1):
            if target == current:
                continue
            trial = labels.copy()
            trial[p] = target
            new_value = _labels_value(space, idx, trial, N)
            if _better(new_value, value):
                labels, value, moved = trial, new_value, True
                current = target
    return moved, labels, value


__all__ = [
    "CheegerCertificate", "Cluster", "ClusterTable", "brute_force_hN", "check_admissible",
    "check_closure", "cheeger_sets", "dinkelbach_h1", "forced_minimizers", "local_search_hN",
    "maximal_minimal_cheeger", "verify_cluster_inequalities",
]
