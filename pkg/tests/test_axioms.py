from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmspaces import FiniteSpace, TablePerimeter, catalog, check_axioms, isoperimetric_profile
from pmspaces.axioms import recheck, relative_perimeter, sampled_profile
from pmspaces.errors import SizeError

CORE = ("P.1", "P.2", "P.3", "P.6", "P.7")


def test_path_verdicts(p4):
    space, _ = p4
    rep = check_axioms(space)
    for a in CORE + ("RP.1", "RP.2", "RP.3"):
        assert rep[a].status == "holds-exhaustive", a
    for a in ("P.4", "P.5", "RP.4", "RP.+"):
        assert rep[a].status == "holds-structural"
        assert rep[a].detail
    assert rep.violated() == ["RP.L"]
    assert rep["RP.L"].witness is not None
    assert recheck(space, "RP.L", rep["RP.L"].witness)
    assert rep.extra["relative_total_consistent"]


def test_submodularity_example(p4):
    space, _ = p4
    E, F = space.mask(["v1"]), space.mask(["v2"])
    assert space.P(E & F) + space.P(E | F) == 1
    assert space.P(E) + space.P(F) == 3


def test_profile_of_path(p4):
    space, _ = p4
    prof = isoperimetric_profile(space)
    assert prof.breakpoints == [(1, 1), (2, Fraction(1, 2)), (3, Fraction(1, 3)), (4, 0)]
    assert prof(Fraction(5, 2)) == Fraction(1, 2)
    assert prof.is_non_increasing()
    assert prof.positive_below(4) and not prof.positive_below(5)
    assert prof.volume_threshold(Fraction(1, 2)) == 2


def test_relative_perimeter_half_weight(p4):
    space, _ = p4
    assert relative_perimeter(space, space.mask(["v1", "v2"]), space.mask(["v2"])) == Fraction(1, 2)


def test_sampled_profile_is_an_upper_bound(p4_float):
    space, _ = p4_float
    exact = isoperimetric_profile(space)
    est = sampled_profile(space, seed=3, samples=200)
    assert not est.exhaustive
    for level, f in est.breakpoints:
        assert f >= exact(level) - 1e-12


def _table_space(values, exact=True):
    n = int(np.log2(len(values)))
    return FiniteSpace(np.array([1] * n, dtype=object) if exact else np.ones(n),
                       TablePerimeter(n, values, exact), tuple(f"x{i}" for i in range(n)))


def test_non_submodular_table_gets_witness():
    # P({a}) = P({b}) = 0 but P({a,b}) = 1 breaks the local form at S = empty
    from fractions import Fraction as F
    space = _table_space([F(0), F(0), F(0), F(1)])
    rep = check_axioms(space)
    assert rep["P.3"].status == "violated"
    assert recheck(space, "P.3", rep["P.3"].witness)
    assert rep["P.2"].status == "violated"
    assert rep["RP.1"].status == "not-applicable"


def test_asymmetric_table_fails_symmetry():
    from fractions import Fraction as F
    space = _table_space([F(0), F(1), F(2), F(0)])
    rep = check_axioms(space)
    assert rep["P.7"].status == "violated"
    assert recheck(space, "P.7", rep["P.7"].witness)


def test_disconnected_graph_fails_isoperimetry():
    space = FiniteSpace.from_cut([1, 1, 1], [(0, 1, 1)], exact=True)
    rep = check_axioms(space)
    assert rep["P.6"].status == "violated"


def test_randomized_mode_labels(p4_float):
    space, _ = p4_float
    rep = check_axioms(space, mode="randomized", seed=7, trials=300)
    assert rep["P.3"].status == "holds-randomized"
    assert rep["RP.L"].status == "violated"


def test_exhaustive_mode_refuses_large_spaces():
    space, _ = catalog.path_graph(16)
    with pytest.raises(SizeError):
        check_axioms(space, mode="exhaustive")


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 8), st.integers(0, 10_000))
def test_cut_spaces_satisfy_core_axioms(n, seed):
    space, _ = catalog.random_graph(n, 0.4, seed, exact=True)
    rep = check_axioms(space)
    for a in CORE:
        assert rep.holds(a), a
    assert rep["RP.L"].status == "violated"
