from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from toricfan import Fan, product_fan, projective_space_fan

F2 = Fan(2, [(1, 0), (0, 1), (-1, 2), (0, -1)], [(0, 1), (1, 2), (2, 3), (3, 0)])


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_projective_space_fan_shape(d):
    fan = projective_space_fan(d)
    assert fan.dim == d
    assert fan.n_rays == d + 1
    assert fan.picard_number == 1
    assert fan.is_nonsingular
    assert len(fan.max_cones) == d + 1
    assert not fan.validate()


def test_product_fan_shape():
    a, b = projective_space_fan(2), projective_space_fan(1)
    p = product_fan(a, b)
    assert p.dim == 3
    assert p.n_rays == 5
    assert p.picard_number == 2
    assert len(p.max_cones) == len(a.max_cones) * len(b.max_cones)
    assert not p.validate()


def test_constructor_rejects_bad_input():
    with pytest.raises(ValueError):
        Fan(2, [(2, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (2, 0)])  # imprimitive ray
    with pytest.raises(ValueError):
        Fan(2, [(1, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2)])  # missing wall pairing
    with pytest.raises(ValueError):
        Fan(2, [(1, 0), (0, 1)], [(0, 1), (0, 1, 1)])  # malformed cone
    with pytest.raises(ValueError):
        Fan(2, [(1, 0), (0, 1), (1, 0)], [(0, 1), (1, 2), (2, 0)])  # duplicate ray


def test_cone_queries():
    fan = projective_space_fan(2)
    assert fan.is_cone(())
    assert fan.is_cone((0,))
    assert fan.is_cone((0, 1))
    assert not fan.is_cone((0, 1, 2))
    assert fan.cones(1) == [(0,), (1,), (2,)]
    assert fan.cones(2) == [(0, 1), (0, 2), (1, 2)]


def test_locate_and_minimal_cone():
    cone, coeffs = F2.locate((3, 2))
    assert cone == (0, 1)
    assert coeffs == (Fraction(3), Fraction(2))
    cone, coeffs = F2.minimal_cone_containing((0, 5))
    assert cone == (1,)
    assert coeffs == (Fraction(5),)
    cone, _ = F2.minimal_cone_containing((0, 0))
    assert cone == ()


def test_validate_flags_overlapping_cones():
    # two maximal cones sharing a wall but lying on the same side of it
    fan = Fan.__new__(Fan)
    object.__setattr__(fan, "dim", 2)
    object.__setattr__(fan, "rays", ((1, 0), (0, 1), (1, 1), (-1, -1)))
    object.__setattr__(fan, "max_cones", ((0, 1), (0, 2), (1, 2), (2, 3), (3, 0)))
    assert fan.validate()


def test_serialization_roundtrip():
    text = F2.to_json()
    assert Fan.from_json(text) == F2


def test_save_load_roundtrip(tmp_path):
    path = tmp_path / "fan.json"
    fan = product_fan(projective_space_fan(2), projective_space_fan(2))
    fan.save(path)
    assert Fan.load(path) == fan


@given(st.integers(1, 4), st.integers(1, 3))
def test_product_picard_number_adds(da, db):
    p = product_fan(projective_space_fan(da), projective_space_fan(db))
    assert p.picard_number == 2
    assert p.n_rays - p.dim == 2
