"""Weight-4 multiple search: collision scan vs cubic enumeration."""

from fractions import Fraction

import pytest

from combgen import presets
from combgen.errors import ValidationError
from combgen.gf2 import LfsrSpec, poly_mul, poly_rem
from combgen.multiples import (Weight4Multiple, _residue_list, _scan_python,
                               expected_count, find_weight4,
                               find_weight4_bruteforce, product_modulus,
                               verify_multiple)

P3 = 0b1011
P4 = 0b10011


def test_weight4_multiple_validation():
    m = Weight4Multiple(2, 4, 5)
    assert m.poly == 0b110101
    assert m.degree == 5
    assert m.shifts == (0, 2, 4, 5)
    for bad in [(0, 1, 2), (2, 2, 3), (3, 2, 5)]:
        with pytest.raises(ValidationError):
            Weight4Multiple(*bad)


def test_product_modulus_singleton():
    assert product_modulus([P3]) == P3


def test_product_modulus_of_two(toy):
    prod = product_modulus([P3, P4])
    assert prod == poly_mul(P3, P4)
    assert poly_rem(prod, P3) == 0 and poly_rem(prod, P4) == 0
    # also accepts LfsrSpec objects
    assert product_modulus(toy.lfsrs[1:]) == poly_mul(
        presets.TOY_POLY_11, presets.TOY_POLY_9)


def test_product_modulus_rejects_common_factor():
    with pytest.raises(ValidationError):
        product_modulus([P3, P3])
    with pytest.raises(ValidationError):
        product_modulus([poly_mul(P3, P4), P4])


def test_expected_count_formula():
    assert expected_count(20, 1 << 8) == Fraction(8, 3)
    assert expected_count(68, 1 << 25) == Fraction(64, 3)
    d_min = round((6 * 2 ** 20) ** (1 / 3))
    assert 0.9 < float(expected_count(20, d_min)) < 1.1


def test_verify_multiple():
    assert verify_multiple(Weight4Multiple(2, 4, 5), [P4])
    assert not verify_multiple(Weight4Multiple(1, 2, 3), [P4])
    assert verify_multiple(Weight4Multiple(2, 3, 4), [P3])
    assert not verify_multiple(Weight4Multiple(2, 3, 4), [P3, P4])


def test_find_weight4_toy_pentanomial():
    report = find_weight4(P4, 6)
    assert Weight4Multiple(2, 4, 5) in report.found


def test_find_weight4_equals_exhaustive_for_p3():
    report = find_weight4(P3, 7)
    brute = find_weight4_bruteforce(P3, 7)
    expected = {(2, 3, 4), (1, 2, 5), (1, 4, 6), (3, 5, 6)}
    assert {(m.t1, m.t2, m.t3) for m in report.found} == expected
    assert report.found == brute.found


def test_find_weight4_soundness(rng):
    modulus = product_modulus([presets.TOY_POLY_11, presets.TOY_POLY_9])
    report = find_weight4(modulus, 300)
    assert report.count > 0
    for m in report.found:
        assert verify_multiple(m, [presets.TOY_POLY_11, presets.TOY_POLY_9])
        assert m.t3 <= 300


def test_find_weight4_report_is_sorted():
    report = find_weight4(presets.TOY_POLY_13, 400)
    order = [(m.t3, m.t2, m.t1) for m in report.found]
    assert order == sorted(order)
    assert report.expected == expected_count(13, 400)


def test_find_weight4_limit():
    full = find_weight4(presets.TOY_POLY_13, 400)
    assert full.count > 3
    cut = find_weight4(presets.TOY_POLY_13, 400, limit=3)
    assert cut.found == full.found[:3]


def test_find_weight4_below_minimum_degree_is_empty():
    report = find_weight4(product_modulus([presets.TOY_POLY_13,
                                           presets.TOY_POLY_11]), 40)
    assert report.count == 0
    assert report.expected < 1


def test_find_weight4_rejects_bound_beyond_period():
    # X has order 127 modulo this degree-7 modulus; residues repeat past
    # that and the collision scan would return garbage
    with pytest.raises(ValidationError):
        find_weight4(0x89, 400)


def test_find_weight4_rejects_even_modulus():
    with pytest.raises(ValidationError):
        find_weight4(0b110, 10)


def test_python_scan_agrees_with_numpy_scan():
    modulus = product_modulus([presets.TOY_POLY_13, presets.TOY_POLY_9])
    fast = find_weight4(modulus, 800)
    raw = _scan_python(_residue_list(modulus, 800), 800)
    assert {(m.t1, m.t2, m.t3) for m in fast.found} == \
        {tuple(sorted(t)) for t in raw}


def test_bruteforce_guard():
    with pytest.raises(ValidationError):
        find_weight4_bruteforce(P3, 1000)


def test_large_product_multiple_from_preset():
    m = presets.LARGE_MULTIPLE_31_37
    assert verify_multiple(m, [presets.POLY_31, presets.POLY_37])
    assert not verify_multiple(m, [presets.POLY_29])


def test_squaring_chain_multiples_verify():
    chain = presets.large_multiples_31_37(120000)
    assert len(chain) >= 4
    degrees = [m.t3 for m in chain]
    assert degrees == sorted(degrees)
    for m in chain:
        assert verify_multiple(m, [presets.POLY_31, presets.POLY_37])
