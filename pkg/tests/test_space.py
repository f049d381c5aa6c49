from fractions import Fraction

import numpy as np
import pytest

from pmspaces import FiniteSpace, TablePerimeter, load_space, save_space
from pmspaces import numeric as num
from pmspaces.errors import MalformedOracleError, PositivityError
from pmspaces.space import int_to_mask, mask_to_int, space_from_dict, space_to_dict


def test_cut_perimeter_on_path(p4):
    space, omega = p4
    assert space.P(omega) == 1
    assert space.mass(omega) == 3
    assert space.P(space.mask(["v2"])) == 2
    assert space.P(space.full()) == 0 and space.P(space.empty()) == 0


def test_exact_values_are_fractions(p4):
    space, omega = p4
    assert isinstance(space.ratio(omega), Fraction)
    assert space.ratio(omega) == Fraction(1, 3)


def test_float_reading_uses_decimal_repr():
    assert num.to_fraction(0.01) == Fraction(1, 100)
    assert num.to_fraction("3/7") == Fraction(3, 7)
    with pytest.raises(ValueError):
        num.to_fraction(float("inf"))


def test_mask_accepts_labels_and_indices(p4):
    space, _ = p4
    assert np.array_equal(space.mask(["v1", 2]), np.array([True, False, True, False]))
    with pytest.raises(KeyError):
        space.mask(["nope"])


def test_mask_int_roundtrip():
    m = np.array([True, False, True, True])
    assert int_to_mask(mask_to_int(m), 4).tolist() == m.tolist()


def test_nonpositive_measure_rejected():
    with pytest.raises(PositivityError):
        FiniteSpace.from_cut([1, 0], [(0, 1, 1)])


def test_interchange_roundtrip(tmp_path, p4):
    space, omega = p4
    path = tmp_path / "p4.json"
    save_space(path, space, omega)
    again, om = load_space(path)
    assert again.exact and again.labels == space.labels
    assert om.tolist() == omega.tolist()
    for code in range(16):
        E = int_to_mask(code, 4)
        assert again.P(E) == space.P(E)


def test_table_oracle_roundtrip():
    table = [0, 1, 1, 0]
    space = FiniteSpace(np.array([1.0, 1.0]), TablePerimeter(2, table, False), ("a", "b"))
    doc = space_to_dict(space)
    again, _ = space_from_dict(doc)
    assert not again.is_cut
    assert again.P(np.array([True, False])) == 1


def test_table_oracle_rejects_negative_values():
    with pytest.raises(MalformedOracleError):
        TablePerimeter(1, [0, -1], False)
