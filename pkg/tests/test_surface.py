import pytest

from quasicluster.surface import (
    InvalidSignature,
    SurfaceSignature,
    annulus,
    count_quasi_arcs_closed_form,
    disc,
    is_finite_type,
    moebius,
    parse_preset,
    rank,
)


@pytest.mark.parametrize("n", range(1, 11))
def test_moebius_rank(n):
    assert rank(moebius(n)) == n


def test_ranks():
    assert rank(disc(6)) == 3
    assert rank(annulus(1, 1)) == 2
    assert rank(disc(4)) == 1


def test_finite_type():
    assert is_finite_type(moebius(3))
    assert is_finite_type(disc(5))
    assert not is_finite_type(SurfaceSignature(False, 2, (1,)))
    assert not is_finite_type(annulus(1, 1))


def test_closed_forms():
    assert count_quasi_arcs_closed_form(moebius(2)) == (6, 5)
    assert count_quasi_arcs_closed_form(moebius(3)) == (13, 12)
    assert count_quasi_arcs_closed_form(disc(6)) == (9, 9)
    assert count_quasi_arcs_closed_form(annulus(2, 1)) is None


@pytest.mark.parametrize("b", [1, 2, 3])
def test_small_discs_rejected(b):
    with pytest.raises(InvalidSignature):
        disc(b)


def test_invalid_signatures():
    with pytest.raises(InvalidSignature):
        SurfaceSignature(True, 0, (4,), punctures=1)
    with pytest.raises(InvalidSignature):
        SurfaceSignature(True, 0, ())
    with pytest.raises(InvalidSignature):
        SurfaceSignature(False, 0, (2,))


def test_json_and_presets():
    s = annulus(2, 3)
    assert SurfaceSignature.from_json(s.to_json()) == s
    assert parse_preset("moebius:4") == moebius(4)
    assert parse_preset("disc:7") == disc(7)
    assert parse_preset("annulus:1,2") == annulus(1, 2)
    with pytest.raises(InvalidSignature):
        parse_preset("torus:3")
