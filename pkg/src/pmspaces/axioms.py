"""Machine checks of the perimeter axioms and the isoperimetric profile.

Verdicts come in four flavours:

``holds-structural``
    true for every oracle of this kind on a finite space with positive
    masses; the report stores the reason instead of a computation.
``holds-exhaustive`` / ``holds-randomized``
    checked on every (or on ``trials`` random) configurations.
``violated``
    a witness is attached; :func:`recheck` re-runs the failing comparison.

Submodularity is verified through the equivalent local form
``P(S+i) + P(S+j) >= P(S+i+j) + P(S)`` over all ``S`` and ``i, j`` outside
``S``.  A failing local quadruple is itself a violating pair
``E = S+i, F = S+j``.

On a finite space with ``P(X) = 0`` the isoperimetric property can only
hold for ``eps < m(X)``: the whole space has measure ``m(X)`` and zero
perimeter.  The check is therefore "every nonempty proper subset has
positive perimeter", which is exactly what the existence and volume bounds
for clusters inside a proper domain use.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import numeric as num
from .errors import MalformedOracleError, SizeError
from .space import CutPerimeter, FiniteSpace, int_to_mask, mask_to_int
from .subsets import SubsetTable

EXHAUSTIVE_LIMIT = 14
PROFILE_LIMIT = 20

HOLDS_STRUCTURAL = "holds-structural"
HOLDS_EXHAUSTIVE = "holds-exhaustive"
HOLDS_RANDOMIZED = "holds-randomized"
VIOLATED = "violated"
NOT_APPLICABLE = "not-applicable"

_STRUCTURAL_REASON = {
    "P.4": "finite space with positive masses: L1-convergent masks are eventually constant",
    "P.5": "finite space: finitely many masks, every sequence has a constant subsequence",
    "RP.4": "finite space: L1-convergent masks are eventually constant",
    "RP.+": "finite weights: every function has a finite variation measure",
}


@dataclass
class Verdict:
    status: str
    detail: str = ""
    trials: int | None = None
    witness: tuple | None = None

    @property
    def holds(self) -> bool:
        return self.status.startswith("holds")

    def to_dict(self, space: FiniteSpace | None = None) -> dict:
        out = {"status": self.status, "detail": self.detail}
        if self.trials is not None:
            out["trials"] = self.trials
        if self.witness is not None:
            if space is not None:
                out["witness"] = [space.members(w) for w in self.witness]
            else:
                out["witness"] = [np.flatnonzero(w).tolist() for w in self.witness]
        return out


@dataclass
class AxiomReport:
    verdicts: dict[str, Verdict]
    mode: str
    profile: "IsoperimetricProfile | None" = None
    extra: dict = field(default_factory=dict)

    def __getitem__(self, axiom: str) -> Verdict:
        return self.verdicts[axiom]

    def holds(self, axiom: str) -> bool:
        return self.verdicts[axiom].holds

    def violated(self) -> list[str]:
        return [a for a, v in self.verdicts.items() if v.status == VIOLATED]

    def to_dict(self, space: FiniteSpace | None = None) -> dict:
        out = {"mode": self.mode,
               "verdicts": {a: v.to_dict(space) for a, v in self.verdicts.items()}}
        if self.profile is not None:
            out["profile"] = self.profile.to_dict()
        out.update(self.extra)
        return out


# ---------------------------------------------------------------------------
# isoperimetric profile


@dataclass
class IsoperimetricProfile:
    """Step function ``f(eps) = min{P(E)/m(E) : 0 < m(E) <= eps}``.

    ``breakpoints`` lists ``(eps, f(eps))`` at every attained mass level, in
    increasing ``eps``.  ``exhaustive`` is False for sampled profiles, whose
    values are only upper bounds of the true profile.
    """

    breakpoints: list[tuple]
    exhaustive: bool = True

    def __call__(self, eps):
        value = float("inf")
        for level, f in self.breakpoints:
            if level <= eps:
                value = f
            else:
                break
        return value

    def positive_below(self, eps) -> bool:
        """``f > 0`` on every level strictly below ``eps``."""
        return all(f > 0 for level, f in self.breakpoints if level < eps)

    def volume_threshold(self, h):
        """Smallest level ``c`` with ``f(c) <= h``.

        Any set with ``P(E)/m(E) <= h`` has ``m(E) >= c``; this is the
        chamber-volume lower bound for clusters with constant ``h``.
        """
        for level, f in self.breakpoints:
            if f <= h:
                return level
        return None

    def is_non_increasing(self) -> bool:
        vals = [f for _, f in self.breakpoints]
        return all(a >= b for a, b in zip(vals, vals[1:]))

    def to_dict(self) -> dict:
        return {"exhaustive": self.exhaustive,
                "breakpoints": [[num.encode(e), num.encode(f)] for e, f in self.breakpoints]}


def isoperimetric_profile(space: FiniteSpace, table: SubsetTable | None = None) -> IsoperimetricProfile:
    """Exact profile by enumeration of all ``2**n - 1`` nonempty subsets."""
    if space.n > PROFILE_LIMIT:
        raise SizeError(f"exact profile needs n <= {PROFILE_LIMIT}, got {space.n}; "
                        "use sampled_profile for a flagged estimate")
    if table is None or len(table.index) != space.n:
        table = SubsetTable(space, limit=PROFILE_LIMIT)
    _check_table(table)
    meas = table.meas[1:]
    levels, inverse = np.unique(meas, return_inverse=True)
    ratios = table.float_ratios()[1:]
    group_min = np.full(len(levels), np.inf)
    np.minimum.at(group_min, inverse, ratios)

    breakpoints = []
    running_float = np.inf
    running = None
    for g, level in enumerate(levels):
        candidate = group_min[g]
        if table.exact:
            eps = Fraction(int(level), table.m_den)
            if running is None or candidate <= running_float * (1 + 1e-9):
                codes = np.flatnonzero((inverse == g) & (ratios <= candidate * (1 + 1e-9) + 1e-300)) + 1
                exact_min = min(table.ratio(int(c)) for c in codes)
                running = exact_min if running is None else min(running, exact_min)
            running_float = float(running)
        else:
            eps = float(level)
            running_float = min(running_float, float(candidate))
            running = running_float
        breakpoints.append((eps, running))
    return IsoperimetricProfile(breakpoints, exhaustive=True)


def sampled_profile(space: FiniteSpace, seed: int = 0, samples: int = 20000) -> IsoperimetricProfile:
    """Profile estimated from random subsets; an upper bound of the exact one."""
    pts = []
    for t in range(samples):
        rng = np.random.default_rng([seed, t])
        mask = rng.random(space.n) < rng.random()
        if not mask.any():
            continue
        pts.append((space.mass(mask), space.ratio(mask)))
    pts.sort(key=lambda p: p[0])
    breakpoints, running = [], None
    for eps, r in pts:
        running = r if running is None else min(running, r)
        if breakpoints and breakpoints[-1][0] == eps:
            breakpoints[-1] = (eps, running)
        else:
            breakpoints.append((eps, running))
    return IsoperimetricProfile(breakpoints, exhaustive=False)


# ---------------------------------------------------------------------------
# relative perimeter


def relative_perimeter(space: FiniteSpace, E, A):
    """``P(E; A)``; raises UnsupportedOperationError for table oracles."""
    return space.relative_perimeter(space.mask(E), space.mask(A))


# ---------------------------------------------------------------------------
# axiom checks


def _check_table(table: SubsetTable):
    vals = table.float_perimeters()
    if not np.all(np.isfinite(vals)):
        c = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise MalformedOracleError(f"non-finite perimeter on {np.flatnonzero(table.mask(c)).tolist()}")
    if np.any(vals < 0):
        c = int(np.flatnonzero(vals < 0)[0])
        raise MalformedOracleError(f"negative perimeter on {np.flatnonzero(table.mask(c)).tolist()}")


def _submodular_violation(values: np.ndarray, k: int, tol: float):
    """First ``(S+i, S+j)`` violating the local submodularity inequality."""
    codes = np.arange(1 << k, dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            bi, bj = 1 << i, 1 << j
            S = codes[(codes & (bi | bj)) == 0]
            lhs = values[S | bi | bj] + values[S]
            rhs = values[S | bi] + values[S | bj]
            if values.dtype == object or np.issubdtype(values.dtype, np.integer):
                bad = np.flatnonzero(lhs > rhs)
            else:
                bad = np.flatnonzero(lhs > rhs + tol)
            if len(bad):
                s = int(S[bad[0]])
                return s | bi, s | bj
    return None


def _point_variation_table(cut: CutPerimeter, n: int, exact: bool):
    """``D[x, c] = 1/2 sum_y w(x, y) |chi_c(x) - chi_c(y)|`` over all subsets ``c``.

    In exact mode the entries are integers over the returned denominator.
    """
    if exact:
        w, den = num.scale_to_integers(cut.weight)
    else:
        w, den = cut.weight, 1.0
    codes = np.arange(1 << n, dtype=np.int64)
    D = np.zeros((n, 1 << n), dtype=w.dtype)
    for a, b, wt in zip(cut.tail, cut.head, w):
        crossing = ((codes >> int(a)) & 1) ^ ((codes >> int(b)) & 1)
        D[a] = D[a] + crossing * wt
        D[b] = D[b] + crossing * wt
    # stored doubled so that integer tables stay integral
    return D, 2 * den


def check_axioms(space: FiniteSpace, mode: str = "exhaustive", seed: int = 0,
                 trials: int = 2000) -> AxiomReport:
    """Verdict for each of P.1-P.7 and RP.1-RP.4, RP.+, RP.L.

    Parameters
    ----------
    mode : {"exhaustive", "randomized"}
        Exhaustive enumeration requires ``n <= 14``.  Randomized checks draw
        trial ``t`` from ``default_rng([seed, t])`` so results do not depend
        on evaluation order.
    """
    if mode == "exhaustive":
        if space.n > EXHAUSTIVE_LIMIT:
            raise SizeError(f"exhaustive axiom checks need n <= {EXHAUSTIVE_LIMIT}, got {space.n}")
        return _check_exhaustive(space)
    if mode == "randomized":
        return _check_randomized(space, seed, trials)
    raise ValueError(f"unknown mode {mode!r}")


def _structural(verdicts: dict, keys):
    for k in keys:
        verdicts[k] = Verdict(HOLDS_STRUCTURAL, _STRUCTURAL_REASON[k])


def _p6_detail(space, zero_at_full: bool) -> str:
    if zero_at_full:
        return ("f(eps) > 0 for every eps < m(X); P(X) = 0 forces f(m(X)) = 0 "
                "on a finite space")
    return "f(eps) > 0 for every eps"


def _check_exhaustive(space: FiniteSpace) -> AxiomReport:
    n = space.n
    table = SubsetTable(space, limit=EXHAUSTIVE_LIMIT)
    _check_table(table)
    full = table.full_code
    vals = table.perim
    tol = num.IDENTITY_TOL * (1.0 + float(np.max(np.abs(table.float_perimeters()))))
    exact_cmp = table.exact
    V: dict[str, Verdict] = {}

    def is_zero(x):
        return x == 0 if exact_cmp else abs(float(x)) <= tol

    V["P.1"] = (Verdict(HOLDS_EXHAUSTIVE, "P(empty) = 0") if is_zero(vals[0])
                else Verdict(VIOLATED, "P(empty) != 0", witness=(space.empty(),)))
    V["P.2"] = (Verdict(HOLDS_EXHAUSTIVE, "P(X) = 0") if is_zero(vals[full])
                else Verdict(VIOLATED, "P(X) != 0", witness=(space.full(),)))

    bad = _submodular_violation(vals, n, tol)
    V["P.3"] = (Verdict(HOLDS_EXHAUSTIVE, f"local form over all {1 << n} subsets")
                if bad is None else
                Verdict(VIOLATED, "P(E&F) + P(E|F) > P(E) + P(F)",
                        witness=(int_to_mask(bad[0], n), int_to_mask(bad[1], n))))
    _structural(V, ("P.4", "P.5"))

    profile = isoperimetric_profile(space, table) if n <= PROFILE_LIMIT else None
    proper = table.float_perimeters()[1:full]
    zero_sets = np.flatnonzero(proper <= (0 if exact_cmp else tol)) + 1
    if len(zero_sets) == 0:
        V["P.6"] = Verdict(HOLDS_EXHAUSTIVE, _p6_detail(space, is_zero(vals[full])))
    else:
        V["P.6"] = Verdict(VIOLATED, "nonempty proper set with zero perimeter",
                           witness=(int_to_mask(int(zero_sets[0]), n),))

    comp = full ^ table.codes
    if exact_cmp:
        asym = np.flatnonzero(vals != vals[comp])
    else:
        asym = np.flatnonzero(np.abs(vals - vals[comp]) > tol)
    V["P.7"] = (Verdict(HOLDS_EXHAUSTIVE, "P(E) = P(X \\ E) for all E") if len(asym) == 0
                else Verdict(VIOLATED, "P(E) != P(X \\ E)",
                             witness=(int_to_mask(int(asym[0]), n),)))

    extra = {}
    if isinstance(space.perimeter, CutPerimeter):
        D, den = _point_variation_table(space.perimeter, n, exact_cmp)
        V["RP.1"] = (Verdict(HOLDS_EXHAUSTIVE, "P(empty; A) = 0 for all A") if not np.any(D[:, 0])
                     else Verdict(VIOLATED, "P(empty; A) != 0", witness=(space.empty(), space.full())))
        V["RP.2"] = (Verdict(HOLDS_EXHAUSTIVE, "P(X; A) = 0 for all A") if not np.any(D[:, full])
                     else Verdict(VIOLATED, "P(X; A) != 0", witness=(space.full(), space.full())))
        rp3 = None
        for x in range(n):
            bad = _submodular_violation(D[x], n, tol)
            if bad is not None:
                window = np.zeros(n, dtype=bool)
                window[x] = True
                rp3 = (int_to_mask(bad[0], n), int_to_mask(bad[1], n), window)
                break
        V["RP.3"] = (Verdict(HOLDS_EXHAUSTIVE, "per-point windows; A -> P(E; A) is additive")
                     if rp3 is None else
                     Verdict(VIOLATED, "relative submodularity fails", witness=rp3))
        _structural(V, ("RP.4", "RP.+"))
        V["RP.L"] = _rp_local(space)
        # P(E; X) = P(E) bit-exactly
        sums = D.sum(axis=0)
        if exact_cmp:
            consistent = bool(np.all(sums * table.p_den == table.perim * den))
        else:
            consistent = bool(np.all(np.abs(sums / den - table.perim) <= tol))
        extra["relative_total_consistent"] = consistent
    else:
        for k in ("RP.1", "RP.2", "RP.3", "RP.4", "RP.+", "RP.L"):
            V[k] = Verdict(NOT_APPLICABLE, "table oracle has no relative perimeter")
    return AxiomReport(V, "exhaustive", profile, extra)


def _rp_local(space: FiniteSpace) -> Verdict:
    """RP.L in the discrete topology.

    Every set is open and closed, so its topological boundary is empty and
    locality would force ``P(E; A) = 0`` for every ``A``.  Any set with
    positive perimeter is a witness (taken with ``A = X``).
    """
    for i in range(space.n):
        e = space.empty()
        e[i] = True
        if space.P(e) > 0:
            return Verdict(VIOLATED, "discrete topology: boundary of E is empty, yet P(E; X) > 0",
                           witness=(e, space.full()))
    e = space.full()
    e[0] = False
    if space.P(e) > 0:
        return Verdict(VIOLATED, "discrete topology: boundary of E is empty, yet P(E; X) > 0",
                       witness=(e, space.full()))
    return Verdict(HOLDS_EXHAUSTIVE, "perimeter vanishes on singletons and co-singletons, hence everywhere")


def _check_randomized(space: FiniteSpace, seed: int, trials: int) -> AxiomReport:
    n = space.n
    V: dict[str, Verdict] = {}
    scale = float(space.P(space.full())) + 1.0

    def malformed(x):
        if not space.exact and not np.isfinite(float(x)):
            raise MalformedOracleError("non-finite perimeter value")
        if x < 0:
            raise MalformedOracleError("negative perimeter value")
        return x

    def draw(t):
        rng = np.random.default_rng([seed, t])
        return rng.random(n) < 0.5, rng.random(n) < 0.5

    p_empty = malformed(space.P(space.empty()))
    p_full = malformed(space.P(space.full()))
    V["P.1"] = (Verdict(HOLDS_EXHAUSTIVE, "P(empty) = 0") if num.close(p_empty, num.zero(space.exact))
                else Verdict(VIOLATED, "P(empty) != 0", witness=(space.empty(),)))
    V["P.2"] = (Verdict(HOLDS_EXHAUSTIVE, "P(X) = 0") if num.close(p_full, num.zero(space.exact))
                else Verdict(VIOLATED, "P(X) != 0", witness=(space.full(),)))

    p3 = p6 = p7 = None
    for t in range(trials):
        E, F = draw(t)
        pE, pF = malformed(space.P(E)), malformed(space.P(F))
        lhs = malformed(space.P(E & F)) + malformed(space.P(E | F))
        if p3 is None and not num.leq(lhs, pE + pF, scale):
            p3 = (E, F)
        if p7 is None and not num.close(pE, space.P(~E), scale):
            p7 = (E,)
        if p6 is None and E.any() and not E.all() and not pE > 0:
            p6 = (E,)
    V["P.3"] = (Verdict(HOLDS_RANDOMIZED, "random pairs", trials=trials) if p3 is None
                else Verdict(VIOLATED, "P(E&F) + P(E|F) > P(E) + P(F)", trials=trials, witness=p3))
    _structural(V, ("P.4", "P.5"))
    V["P.6"] = (Verdict(HOLDS_RANDOMIZED, _p6_detail(space, num.close(p_full, num.zero(space.exact))),
                        trials=trials) if p6 is None
                else Verdict(VIOLATED, "nonempty proper set with zero perimeter", trials=trials, witness=p6))
    V["P.7"] = (Verdict(HOLDS_RANDOMIZED, "random sets", trials=trials) if p7 is None
                else Verdict(VIOLATED, "P(E) != P(X \\ E)", trials=trials, witness=p7))

    if isinstance(space.perimeter, CutPerimeter):
        cut = space.perimeter
        zero_u = num.zeros(n, space.exact)
        one_u = num.as_array([1] * n, space.exact)
        V["RP.1"] = (Verdict(HOLDS_EXHAUSTIVE, "P(empty; .) vanishes pointwise")
                     if not np.any(cut.point_variation(zero_u) != 0)
                     else Verdict(VIOLATED, "P(empty; A) != 0", witness=(space.empty(), space.full())))
        V["RP.2"] = (Verdict(HOLDS_EXHAUSTIVE, "P(X; .) vanishes pointwise")
                     if not np.any(cut.point_variation(one_u) != 0)
                     else Verdict(VIOLATED, "P(X; A) != 0", witness=(space.full(), space.full())))
        rp3 = None
        for t in range(trials):
            E, F = draw(t)
            rng = np.random.default_rng([seed, t, 1])
            A = rng.random(n) < 0.5
            lhs = space.relative_perimeter(E & F, A) + space.relative_perimeter(E | F, A)
            rhs = space.relative_perimeter(E, A) + space.relative_perimeter(F, A)
            if not num.leq(lhs, rhs, scale):
                rp3 = (E, F, A)
                break
        V["RP.3"] = (Verdict(HOLDS_RANDOMIZED, "random pairs and windows", trials=trials) if rp3 is None
                     else Verdict(VIOLATED, "relative submodularity fails", trials=trials, witness=rp3))
        _structural(V, ("RP.4", "RP.+"))
        V["RP.L"] = _rp_local(space)
    else:
        for k in ("RP.1", "RP.2", "RP.3", "RP.4", "RP.+", "RP.L"):
            V[k] = Verdict(NOT_APPLICABLE, "table oracle has no relative perimeter")
    return AxiomReport(V, "randomized")


def recheck(space: FiniteSpace, axiom: str, witness: tuple) -> bool:
    """True when the witness still violates ``axiom``."""
    P = space.P
    scale = float(P(space.full())) + 1.0
    zero = num.zero(space.exact)
    if axiom == "P.1":
        return not num.close(P(space.empty()), zero)
    if axiom == "P.2":
        return not num.close(P(space.full()), zero)
    if axiom == "P.3":
        E, F = witness
        return not num.leq(P(E & F) + P(E | F), P(E) + P(F), scale)
    if axiom == "P.6":
        (E,) = witness
        return bool(E.any()) and not bool(E.all()) and not P(E) > 0
    if axiom == "P.7":
        (E,) = witness
        return not num.close(P(E), P(~E), scale)
    rel = space.relative_perimeter
    if axiom == "RP.1":
        E, A = witness
        return not num.close(rel(space.empty(), A), zero)
    if axiom == "RP.2":
        E, A = witness
        return not num.close(rel(space.full(), A), zero)
    if axiom == "RP.3":
        E, F, A = witness
        return not num.leq(rel(E & F, A) + rel(E | F, A), rel(E, A) + rel(F, A), scale)
    if axiom == "RP.L":
        E, A = witness
        # empty boundary in the discrete topology: locality demands P(E; A) = 0
        return rel(E, A) > 0
    raise ValueError(f"no witness check for {axiom}")


__all__ = [
    "AxiomReport", "IsoperimetricProfile", "Verdict", "check_axioms", "isoperimetric_profile",
    "recheck", "relative_perimeter", "sampled_profile", "mask_to_int",
]
