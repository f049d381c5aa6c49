from fractions import Fraction

import numpy as np
import pytest

from pmspaces import FiniteSpace, TablePerimeter, catalog, lambda_11, lambda_1p, lambda_N, torsion
from pmspaces.bv import BVFunction
from pmspaces.cheeger import brute_force_hN
from pmspaces.errors import CoercivityError, DomainError, TheoremViolationError
from pmspaces.spectral import eigenfunction_cheeger_check, rayleigh_p, torsion_energy


def test_lambda_11_on_path(p4):
    space, omega = p4
    res = lambda_11(space, omega, samples=200, seed=1)
    assert res.value == Fraction(1, 3)
    assert res.mode == "symmetric"
    assert res.minimizer.tolist() == [1, 1, 1, 0]
    assert res.meta["min_sampled_quotient"] >= Fraction(1, 3)


def test_lambda_11_nonnegative_mode_without_symmetry():
    # a non-symmetric table: P(E) = P_cut(E) + [x0 in E]
    base, omega = catalog.path_graph(3, exact=True)
    from pmspaces.space import int_to_mask
    table = [base.P(int_to_mask(c, 3)) + (c & 1) for c in range(8)]
    space = FiniteSpace(base.measure, TablePerimeter(3, table, True), base.labels)
    res = lambda_11(space, omega, samples=50)
    assert res.mode == "nonnegative"
    assert res.value == brute_force_hN(space, omega).value


def test_eigenfunction_check(p4):
    space, omega = p4
    assert eigenfunction_cheeger_check(space, omega, [2, 2, 2, 0], Fraction(1, 3)) == (True, True)
    assert eigenfunction_cheeger_check(space, omega, [2, 1, 1, 0], Fraction(1, 3)) == (False, False)


def test_lambda_N_examples(p4):
    space, omega = p4
    res = lambda_N(space, omega, 2)
    assert res.value == 2
    assert sorted(res.meta["supports"]) == [[0], [1, 2]]
    assert lambda_N(space, omega, 1).value == Fraction(1, 3)
    tw, om = catalog.twin_components(3, exact=True)
    h1 = brute_force_hN(tw, om).value
    assert lambda_N(tw, om, 2).value == 2 * h1 == brute_force_hN(tw, om, 2).value


def test_rayleigh_p_of_indicator(p4_float):
    space, omega = p4_float
    assert rayleigh_p(space, omega.astype(float), 2) == pytest.approx(1 / 6)
    u = np.array([0.3, 1.2, 0.7, 0.0])
    assert rayleigh_p(space, -2.5 * u, 2) == pytest.approx(rayleigh_p(space, u, 2))


def test_single_point_p_quotient():
    # the exterior point carries its own slope; a heavy exterior makes it vanish
    for m_ext, expected in ((1.0, 0.5), (1e6, 0.25 + 0.25e-6)):
        space = FiniteSpace.from_cut([1.0, m_ext], [(0, 1, 1.0)])
        assert rayleigh_p(space, np.array([1.0, 0.0]), 2) == pytest.approx(expected)
        res = lambda_1p(space, space.mask([0]), 2, restarts=2)
        assert res.value == pytest.approx(expected)
        assert res.value >= (1 / 4) ** 2


def test_lambda_1p_bounds_and_determinism(p4_float):
    space, omega = p4_float
    a = lambda_1p(space, omega, 2, seed=3, restarts=6)
    b = lambda_1p(space, omega, 2, seed=3, restarts=6)
    assert a.value == b.value
    assert a.value <= 1 / 6 + 1e-12
    assert a.value >= a.meta["bound_hard"]
    assert a.meta["margin_hard"] > 0
    assert np.sum(np.abs(a.minimizer) ** 2 * space.measure) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        lambda_1p(space, omega, 1.0)


def test_torsion_single_point():
    space = FiniteSpace.from_cut([1.0, 1.0], [(0, 1, 1.0)])
    res = torsion(space, space.mask([0]), 2)
    assert res.w[0] == pytest.approx(4.0, abs=1e-6)
    assert res.energy == pytest.approx(-2.0, abs=1e-9)


def test_torsion_invariants(p4_float):
    space, omega = p4_float
    for p in (1.5, 2.0, 3.0):
        res = torsion(space, omega, p)
        b = res.bounds
        assert res.energy < 0
        assert b["energy_p"] <= p * b["linear"] + 1e-8
        assert b["h1"] <= b["bound_hard"]
        assert torsion_energy(space, omega, np.zeros(4), p) == 0
        assert res.w[3] == 0


def test_torsion_needs_a_boundary():
    space, omega = catalog.complete_graph(3)
    with pytest.raises(CoercivityError):
        torsion(space, omega, 2)
    tw = FiniteSpace.from_cut([1.0, 1.0, 1.0], [(0, 1, 1.0)])
    with pytest.raises(CoercivityError):
        torsion(tw, tw.mask([0, 2]), 2)


def _cvxpy_torsion(space, omega, p):
    cp = pytest.importorskip("cvxpy")
    n = space.n
    m = np.asarray(space.measure, dtype=float)
    idx = np.flatnonzero(omega)
    u = cp.Variable(len(idx))
    full = [0] * n
    for k, i in enumerate(idx):
        full[i] = u[k]
    terms = []
    for x in idx:
        diffs = [float(w) * (full[x] - full[y]) for a, b, w in space.perimeter.edges()
                 for (xx, y) in ((a, b), (b, a)) if xx == x]
        slope = 0.5 * cp.norm1(cp.hstack(diffs)) / m[x]
        terms.append(m[x] * cp.power(slope, p))
    obj = cp.sum(cp.hstack(terms)) / p - m[idx] @ u
    prob = cp.Problem(cp.Minimize(obj))
    prob.solve(solver=cp.CLARABEL)
    return prob.value


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_torsion_matches_generic_convex_solver(p4_float, p):
    space, omega = p4_float
    ours = torsion(space, omega, p).energy
    assert ours == pytest.approx(_cvxpy_torsion(space, omega, p), abs=1e-6)


def test_torsion_matches_generic_solver_on_random_graph():
    space, omega = catalog.random_graph(7, 0.4, 11, exact=False)
    ours = torsion(space, omega, 2.0).energy
    assert ours == pytest.approx(_cvxpy_torsion(space, omega, 2.0), rel=1e-6, abs=1e-6)


def test_p_inequality_on_random_functions():
    space, omega = catalog.random_graph(8, 0.4, 3, exact=False)
    h1 = float(brute_force_hN(space, omega).value)
    rng = np.random.default_rng(0)
    m = np.asarray(space.measure, dtype=float)
    for _ in range(200):
        u = np.where(omega, rng.normal(size=space.n), 0.0)
        from pmspaces.bv import one_slope
        s = np.asarray(one_slope(BVFunction(space, u)), dtype=float)
        for p in (1.5, 2.0, 3.0):
            lhs = 2 * p * np.sum(m * s**p) ** (1 / p)
            rhs = h1 * np.sum(m * np.abs(u) ** p) ** (1 / p)
            assert lhs >= rhs - 1e-10


def test_theorem_violation_raised_on_corrupted_h1(p4_float):
    space, omega = p4_float
    with pytest.raises(TheoremViolationError):
        torsion(space, omega, 2.0, h1=100.0)
