from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmspaces import BVFunction, FiniteSpace, TablePerimeter, catalog, check_axioms
from pmspaces.bv import (chain_rule_defect, convexity_check, edge_variation, level_variation,
                         one_slope, p_energy, rayleigh_1, superlevel_family, symmetric_coarea,
                         variation, variation_measure, weak_p_slope)
from pmspaces.errors import AxiomMissingError, DomainError

half = Fraction(1, 2)


def test_level_and_edge_sums_agree(p4):
    space, _ = p4
    u = BVFunction(space, [2, 1, 0, 0])
    assert level_variation(u) == 2
    assert edge_variation(u) == 2
    assert variation(u) == 2


def test_variation_measure_density(p4):
    space, _ = p4
    mu = variation_measure(BVFunction.indicator(space, ["v1", "v2"]))
    assert mu.density.tolist() == [0, half, half, 0]
    assert mu.total == 1
    assert mu(space.mask(["v2", "v3"])) == 1


def test_symmetric_coarea_example(p4):
    space, _ = p4
    u = BVFunction(space, [1, -1, 0, 0])
    assert symmetric_coarea(u) == (2, 3)
    assert u.l1() == 2 and variation(u) == 3


def test_symmetric_coarea_needs_symmetry():
    space = FiniteSpace(np.ones(2), TablePerimeter(2, [0, 1, 2, 0], False))
    u = BVFunction(space, [1.0, -1.0])
    with pytest.raises(AxiomMissingError):
        symmetric_coarea(u)
    with pytest.raises(AxiomMissingError):
        symmetric_coarea(u, report=check_axioms(space))


def test_superlevel_family_two_sided(p4):
    space, _ = p4
    pieces = superlevel_family(BVFunction(space, [2, -1, 0, 0]))
    assert [(lo, hi, m.tolist()) for lo, hi, m in pieces] == [
        (-1, 0, [False, True, False, False]),
        (0, 2, [True, False, False, False]),
    ]


def test_slope_of_domain_indicator(p4):
    space, omega = p4
    s = one_slope(BVFunction.indicator(space, omega))
    assert s.tolist() == [0, 0, half, half]
    assert weak_p_slope(BVFunction.indicator(space, omega), 2).one_slope.tolist() == s.tolist()
    with pytest.raises(DomainError):
        weak_p_slope(BVFunction.indicator(space, omega), 1)


def test_chain_rule_defect_positive_for_cube(p4):
    space, _ = p4
    u = BVFunction(space, [2, 1, 0, 0])
    assert chain_rule_defect(u, lambda r: r**3, lambda r: 3 * r**2) > 0
    chi = BVFunction.indicator(space, ["v1"])
    assert chain_rule_defect(chi, lambda r: 2 * r + 1, lambda r: 2 + 0 * r) == 0
    with pytest.raises(DomainError):
        chain_rule_defect(u, lambda r: -r, lambda r: -1 + 0 * r)


def test_chain_rule_defect_shrinks_under_refinement():
    defects = []
    for n in (8, 16, 32, 64):
        space, _ = catalog.path_graph(n, weights=[float(n)] * (n - 1), measures=[1.0 / n] * n)
        x = (np.arange(n) + 0.5) / n
        defects.append(chain_rule_defect(BVFunction(space, np.sin(x)), np.exp, np.exp))
    assert all(a > b for a, b in zip(defects, defects[1:]))


def test_rayleigh_of_sample_function(p4):
    space, _ = p4
    assert rayleigh_1(BVFunction(space, [1, 2, 1, 0])) == Fraction(3, 4)


def test_p_energy_of_indicator(p4_float):
    space, omega = p4_float
    assert p_energy(space, omega.astype(float), 2) == pytest.approx(0.5)


def test_bvfunction_validates_length(p4):
    space, _ = p4
    with pytest.raises(ValueError):
        BVFunction(space, [1, 2])


values = st.lists(st.integers(-4, 4), min_size=6, max_size=6)


@settings(max_examples=60, deadline=None)
@given(values, st.integers(0, 500))
def test_coarea_identities(vals, seed):
    space, _ = catalog.random_graph(6, 0.5, seed, exact=True)
    u = BVFunction(space, vals)
    assert level_variation(u) == edge_variation(u)
    mass, var = symmetric_coarea(u)
    assert mass == u.l1()
    assert var == variation(u)


@settings(max_examples=60, deadline=None)
@given(values, values, st.fractions(0, 1), st.integers(0, 500))
def test_convexity_and_homogeneity(a, b, lam, seed):
    space, _ = catalog.random_graph(6, 0.5, seed, exact=True)
    u, v = BVFunction(space, a), BVFunction(space, b)
    assert convexity_check(u, v, lam)
    assert variation(u.scaled(-3)) == 3 * variation(u)
    assert variation(u.shifted(5)) == variation(u)
