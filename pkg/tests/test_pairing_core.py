import pytest

from vermat.errors import DimensionError, GroupMismatchError, MalformedError, ParameterError
from vermat.pairing_core import (Group, multi_exp, op_scope, run_scoped, suite_for, suite_toy)


# ============================================================================
# TOY BACKEND
# ============================================================================

def test_toy_pairing_is_integer_multiplication(toy101):
    assert toy101.pair(toy101.g1 ** 7, toy101.g2 ** 2).value == 14


def test_toy_bilinearity(toy101):
    for a in range(6):
        for b in range(6):
            assert toy101.pair(toy101.g1 ** a, toy101.g2 ** b) == toy101.gT ** (a * b)


def test_toy_random_bilinearity(toy2503, rng):
    for _ in range(200):
        a, b, c = (rng.randrange(toy2503.p) for _ in range(3))
        assert toy2503.pair(toy2503.g1 ** a, toy2503.g2 ** b) == toy2503.gT ** (a * b)
        assert toy2503.pair(toy2503.g1 ** a * toy2503.g1 ** c, toy2503.g2 ** b) == \
            toy2503.pair(toy2503.g1 ** a, toy2503.g2 ** b) * toy2503.pair(toy2503.g1 ** c, toy2503.g2 ** b)


@pytest.mark.parametrize("q", [4, 2, 1, 100])
def test_toy_rejects_bad_modulus(q):
    with pytest.raises(ParameterError):
        suite_toy(q)


def test_toy_rejects_modulus_beyond_encoding():
    with pytest.raises(ParameterError):
        suite_toy(2 ** 64 + 13)


def test_zero_exponent_gives_identity(toy101):
    assert (toy101.g1 ** 0).is_identity()
    assert toy101.pair(toy101.g1 ** 0, toy101.g2 ** 9).is_identity()


def test_inverse_and_division(toy101):
    a = toy101.g1 ** 30
    assert (a * a.inverse()).is_identity()
    assert (toy101.g1 ** 50) / a == toy101.g1 ** 20


# ============================================================================
# MULTI-EXPONENTIATION
# ============================================================================

def test_multi_exp_adds_exponents(toy101):
    g1 = toy101.g1
    assert multi_exp([g1 ** 2, g1 ** 3], [1, 1]) == g1 ** 5
    assert multi_exp([g1 ** 4, g1 ** 6], [1, 1]).value == 10


def test_multi_exp_empty_product(toy101):
    assert multi_exp([], [], suite=toy101).is_identity()
    assert multi_exp([], [], suite=toy101, group=Group.GT) == toy101.identity(Group.GT)
    with pytest.raises(DimensionError):
        multi_exp([], [])


def test_multi_exp_length_mismatch(toy101):
    with pytest.raises(DimensionError):
        multi_exp([toy101.g1], [1, 2])


def test_multi_exp_rejects_mixed_groups(toy101):
    with pytest.raises(GroupMismatchError):
        multi_exp([toy101.g1, toy101.g2], [1, 1])


# ============================================================================
# GROUP DISCIPLINE
# ============================================================================

def test_mixed_group_product_raises(toy101):
    with pytest.raises(GroupMismatchError):
        toy101.g1 * toy101.g2


def test_pairing_argument_order_is_checked(toy101):
    with pytest.raises(GroupMismatchError):
        toy101.pair(toy101.g2, toy101.g1)


def test_elements_of_different_suites_do_not_mix(toy101, toy2503):
    with pytest.raises(GroupMismatchError):
        toy101.g1 * toy2503.g1
    assert toy101.g1 != toy2503.g1


def test_pairing_product_matches_individual_pairings(toy101):
    xs = [toy101.g1 ** 3, toy101.g1 ** 8]
    ys = [toy101.g2 ** 5, toy101.g2 ** 7]
    assert toy101.pairing_product(xs, ys) == toy101.pair(xs[0], ys[0]) * toy101.pair(xs[1], ys[1])
    with pytest.raises(DimensionError):
        toy101.pairing_product(xs, ys[:1])


# ============================================================================
# ENCODING
# ============================================================================

def test_toy_encoding_layout(toy101):
    data = (toy101.g2 ** 42).to_bytes()
    assert data == bytes([0x02]) + (42).to_bytes(8, "little")
    assert toy101.element_from_bytes(data) == toy101.g2 ** 42


def test_toy_reencoding_is_byte_identical(toy2503, rng):
    for base in (toy2503.g1, toy2503.g2, toy2503.gT):
        for _ in range(100):
            data = (base ** rng.randrange(toy2503.p)).to_bytes()
            assert toy2503.element_from_bytes(data).to_bytes() == data


def test_decoding_rejects_bad_input(toy101):
    with pytest.raises(MalformedError):
        toy101.element_from_bytes(b"")
    with pytest.raises(MalformedError):
        toy101.element_from_bytes(bytes([0x07]) + bytes(8))
    with pytest.raises(MalformedError):
        toy101.element_from_bytes(bytes([0x01]) + (101).to_bytes(8, "little"))
    with pytest.raises(MalformedError):
        toy101.element_from_bytes(bytes([0x01]) + bytes(4))


# ============================================================================
# COUNTERS
# ============================================================================

def test_exponentiations_are_counted(toy101):
    with op_scope("prover") as counters:
        toy101.g1 ** 3
        toy101.g1 ** 0
        toy101.g2 ** 5
        toy101.gT ** 7
        toy101.pair(toy101.g1, toy101.g2)
    assert (counters.g1_exp, counters.g2_exp, counters.gt_exp, counters.pairings) == (1, 1, 1, 1)
    assert counters.role == "prover"


def test_multi_exp_counts_nonzero_exponents(toy101):
    g1 = toy101.g1
    with op_scope("prover") as counters:
        multi_exp([g1, g1, g1], [1, 0, 2])
        multi_exp([g1, g1], [101, 202])
    assert counters.g1_exp == 2


def test_nested_scopes_merge_into_parent(toy101):
    with op_scope("verifier") as outer:
        toy101.g1 ** 2
        with op_scope("verifier") as inner:
            toy101.g1 ** 3
            toy101.pair(toy101.g1, toy101.g2)
        assert inner.g1_exp == 1
    assert outer.g1_exp == 2
    assert outer.pairings == 1


def test_run_scoped_merges_worker_counts(toy101):
    tasks = [lambda k=k: toy101.g1 ** k for k in range(1, 9)]
    with op_scope("prover") as counters:
        results = run_scoped(tasks, workers=4)
    assert [r.value for r in results] == list(range(1, 9))
    assert counters.g1_exp == 8


# ============================================================================
# SUITE SELECTION
# ============================================================================

def test_suite_for_toy(toy101):
    assert suite_for("toy", 101) is toy101
    assert suite_for("toy") == toy101


def test_suite_for_unknown_backend():
    with pytest.raises(ParameterError):
        suite_for("bogus")


# ============================================================================
# BN254
# ============================================================================

@pytest.mark.real
def test_real_group_order(real):
    assert real.p.bit_length() == 254
    assert real.secure


@pytest.mark.real
def test_real_bilinearity(real):
    assert real.pair(real.g1 ** 3, real.g2 ** 5) == real.gT ** 15
    assert real.pair(real.g1 ** 0, real.g2 ** 5).is_identity()


@pytest.mark.real
def test_real_pairing_product_shares_final_exponentiation(real):
    xs = [real.g1 ** 2, real.g1 ** 3]
    ys = [real.g2 ** 7, real.g2]
    assert real.pairing_product(xs, ys) == real.gT ** 17


@pytest.mark.real
def test_real_encodings_decode_back(real):
    for element in (real.g1 ** 12345, real.g1.inverse(), real.identity(Group.G1),
                    real.g2 ** 777, real.g2.inverse(), real.identity(Group.G2), real.gT ** 3):
        data = element.to_bytes()
        assert len(data) == {Group.G1: 33, Group.G2: 65, Group.GT: 385}[element.group]
        assert real.element_from_bytes(data) == element


@pytest.mark.real
def test_real_decoding_rejects_non_curve_points(real):
    with pytest.raises(MalformedError):
        real.element_from_bytes(bytes([0x01]) + bytes([0xFF]) * 32)
    with pytest.raises(MalformedError):
        real.element_from_bytes(bytes([0x01, 0xC0]) + bytes(31))


@pytest.mark.real
@pytest.mark.slow
def test_real_bucketed_multi_exp_matches_naive(real, rng):
    bases = [real.g1 ** rng.randrange(1, 1000) for _ in range(20)]
    exps = [rng.randrange(real.p) for _ in range(20)]
    naive = real.identity(Group.G1)
    for base, k in zip(bases, exps):
        naive = naive * base ** k
    assert multi_exp(bases, exps) == naive


@pytest.mark.real
def test_real_backend_has_fixed_order(real):
    with pytest.raises(ParameterError):
        suite_for("real", 101)


@pytest.mark.real
def test_real_gt_decoding_checks_the_subgroup(real):
    tag = real.gT.to_bytes()[:1]
    outside = tag + b"".join((1).to_bytes(32, "big") for _ in range(12))
    with pytest.raises(MalformedError, match="subgroup"):
        real.element_from_bytes(outside)
    assert real.element_from_bytes((real.gT ** 5).to_bytes()) == real.gT ** 5


@pytest.mark.real
@pytest.mark.slow
def test_real_random_bilinearity(real, rng):
    for _ in range(200):
        a, b = rng.randrange(1, real.p), rng.randrange(1, real.p)
        assert real.pair(real.g1 ** a, real.g2 ** b) == real.gT ** (a * b)


@pytest.mark.real
@pytest.mark.slow
def test_real_reencoding_is_byte_identical(real, rng):
    for base in (real.g1, real.g2, real.gT):
        for _ in range(100):
            data = (base ** rng.randrange(real.p)).to_bytes()
            assert real.element_from_bytes(data).to_bytes() == data
