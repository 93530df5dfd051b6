"""Group arithmetic, ElGamal, and DSA against direct modular oracles."""

import pytest
from hypothesis import given, settings, strategies as st

from verivote.groups import (
    Ciphertext,
    Exponent,
    GroupElement,
    GroupParams,
    MembershipError,
    ParameterError,
    decrypt,
    dsa_keygen,
    dsa_sign,
    dsa_verify,
    encode_to_group,
    encrypt,
    generate_params,
    homomorphic_mul,
    keygen,
    reencrypt,
    validate_params,
)
from verivote.rng import Prng

from conftest import SMALL, TOY

TOY_SK = Exponent(3)
TOY_PK = GroupElement(18)  # 4^3 mod 23


def toy_subgroup() -> set[int]:
    # brute-force oracle: all elements of order dividing 11 in Z_23*
    return {x for x in range(1, 23) if pow(x, 11, 23) == 1}


def test_toy_fixture_accepted_by_validation():
    validate_params(TOY, Prng(0, "validate"))
    # 4 generates exactly the order-11 subgroup
    powers = {pow(4, k, 23) for k in range(11)}
    assert powers == toy_subgroup()
    assert len(powers) == 11


def test_wrong_generator_rejected():
    assert pow(5, 11, 23) != 1  # direct oracle
    with pytest.raises(ParameterError):
        validate_params(GroupParams(p=23, q=11, g=5, bits=5), Prng(0, "validate"))


def test_generate_params_512_bits():
    rng = Prng(1, "params")
    params = generate_params(512, rng)
    validate_params(params, rng)
    assert params.p.bit_length() == 512
    assert (params.p - 1) % params.q == 0


def test_generate_params_deterministic():
    a = generate_params(512, Prng(1, "params"))
    b = generate_params(512, Prng(1, "params"))
    assert a == b


def test_generate_params_rejects_small_modulus():
    with pytest.raises(ParameterError):
        generate_params(128, Prng(1, "params"))


def test_membership_checked_on_construction():
    assert TOY.element(4).value == 4
    with pytest.raises(MembershipError):
        TOY.element(5)  # 5^11 mod 23 = 22 != 1
    with pytest.raises(MembershipError):
        TOY.element(0)
    with pytest.raises(MembershipError):
        TOY.element(23)


def test_encode_to_group_values():
    assert encode_to_group(TOY, Exponent(0)).value == 1
    assert encode_to_group(TOY, Exponent(5)).value == pow(4, 5, 23) == 12
    assert encode_to_group(TOY, Exponent(8)).value == pow(4, 8, 23) == 9


def test_encode_injective_on_full_exponent_range():
    images = {encode_to_group(TOY, Exponent(e)).value for e in range(11)}
    assert len(images) == 11


def test_encrypt_toy_vector():
    ct = encrypt(TOY, TOY_PK, GroupElement(9), Exponent(2))
    # oracle: (g^r, pk^r * m)
    assert ct.c1.value == pow(4, 2, 23) == 16
    assert ct.c2.value == pow(18, 2, 23) * 9 % 23 == 18
    assert decrypt(TOY, TOY_SK, ct).value == 9


def test_encrypt_identity_zero_randomness():
    ct = encrypt(TOY, TOY_PK, GroupElement(1), Exponent(0))
    assert (ct.c1.value, ct.c2.value) == (1, 1)


def test_decrypt_fixed_ciphertexts():
    assert decrypt(TOY, TOY_SK, Ciphertext(GroupElement(16), GroupElement(18))).value == 9
    # r=0 ciphertext decrypts to its second component under any key
    for sk in range(11):
        assert decrypt(TOY, Exponent(sk),
                       Ciphertext(GroupElement(1), GroupElement(12))).value == 12
    assert decrypt(TOY, TOY_SK, Ciphertext(GroupElement(8), GroupElement(8))).value == 9


def test_reencrypt_toy_vector():
    ct = Ciphertext(GroupElement(16), GroupElement(18))
    re = reencrypt(TOY, TOY_PK, ct, Exponent(5))
    assert (re.c1.value, re.c2.value) == (16 * pow(4, 5, 23) % 23,
                                          18 * pow(18, 5, 23) % 23) == (8, 8)
    assert reencrypt(TOY, TOY_PK, ct, Exponent(0)) == ct


def test_double_reencryption_adds_exponents():
    ct = encrypt(TOY, TOY_PK, GroupElement(9), Exponent(2))
    for a in range(11):
        for b in range(11):
            twice = reencrypt(TOY, TOY_PK, reencrypt(TOY, TOY_PK, ct, Exponent(a)),
                              Exponent(b))
            once = reencrypt(TOY, TOY_PK, ct, Exponent((a + b) % 11))
            assert twice == once


def test_homomorphic_mul_toy_vectors():
    enc_m = encrypt(TOY, TOY_PK, GroupElement(9), Exponent(2))
    one = encrypt(TOY, TOY_PK, GroupElement(1), Exponent(0))
    assert decrypt(TOY, TOY_SK, homomorphic_mul(TOY, enc_m, one)).value == 9

    enc_b = encrypt(TOY, TOY_PK, GroupElement(12), Exponent(5))
    product = homomorphic_mul(TOY, enc_m, enc_b)
    assert decrypt(TOY, TOY_SK, product).value == 9 * 12 % 23 == 16


def test_product_of_exponent_encryptions():
    rng = Prng(3, "hom")
    exponents = [rng.below(11) for _ in range(5)]
    acc = encrypt(TOY, TOY_PK, GroupElement(1), Exponent(0))
    for e in exponents:
        acc = homomorphic_mul(
            TOY, acc, encrypt(TOY, TOY_PK, encode_to_group(TOY, Exponent(e)),
                              Exponent(rng.below(11))))
    expected = encode_to_group(TOY, Exponent(sum(exponents) % 11))
    assert decrypt(TOY, TOY_SK, acc) == expected


def test_exhaustive_roundtrip_toy_group():
    members = sorted(toy_subgroup())
    for m in members:
        for r in range(11):
            ct = encrypt(TOY, TOY_PK, GroupElement(m), Exponent(r))
            assert decrypt(TOY, TOY_SK, ct).value == m


@settings(max_examples=50, deadline=None)
@given(m_exp=st.integers(0, SMALL.q - 1), r=st.integers(0, SMALL.q - 1),
       r2=st.integers(0, SMALL.q - 1))
def test_roundtrip_and_reencrypt_property(m_exp, r, r2):
    keys = keygen(SMALL, Prng(5, "keys"))
    m = encode_to_group(SMALL, Exponent(m_exp))
    ct = encrypt(SMALL, keys.pk, m, Exponent(r))
    assert decrypt(SMALL, keys.sk, ct) == m
    assert decrypt(SMALL, keys.sk, reencrypt(SMALL, keys.pk, ct, Exponent(r2))) == m


def test_dsa_sign_verify_roundtrip(small):
    rng = Prng(7, "dsa")
    keys = dsa_keygen(small, rng)
    message = b"record:123:456"
    sig = dsa_sign(small, keys.x, message, rng)
    assert dsa_verify(small, keys.y, message, sig)


def test_dsa_rejects_flipped_message_byte(small):
    rng = Prng(7, "dsa")
    keys = dsa_keygen(small, rng)
    sig = dsa_sign(small, keys.x, b"record:123:456", rng)
    assert not dsa_verify(small, keys.y, b"record:123:457", sig)


def test_dsa_rejects_wrong_key(small):
    rng = Prng(7, "dsa")
    keys = dsa_keygen(small, rng)
    other = dsa_keygen(small, rng)
    sig = dsa_sign(small, keys.x, b"payload", rng)
    assert not dsa_verify(small, other.y, b"payload", sig)


def test_dsa_works_on_toy_group():
    rng = Prng(11, "dsa-toy")
    keys = dsa_keygen(TOY, rng)
    sig = dsa_sign(TOY, keys.x, b"tiny", rng)
    assert 0 < sig.r < 11 and 0 < sig.s < 11
    assert dsa_verify(TOY, keys.y, b"tiny", sig)


def test_validate_rejects_wrong_subgroup_order():
    with pytest.raises(ParameterError):
        validate_params(GroupParams(p=23, q=7, g=4, bits=5), Prng(0, "v"))
    with pytest.raises(ParameterError):
        validate_params(GroupParams(p=22, q=11, g=4, bits=5), Prng(0, "v"))
    with pytest.raises(ParameterError):
        validate_params(GroupParams(p=23, q=11, g=1, bits=5), Prng(0, "v"))


def test_prng_streams_replay_and_derive_independently():
    a = Prng(123, "root")
    b = Prng(123, "root")
    assert a.randbytes(64) == b.randbytes(64)

    parent = Prng(123, "root")
    child1 = parent.derive("child")
    # deriving is key-based: consuming the parent stream first changes nothing
    parent.randbytes(100)
    child2 = Prng(123, "root").derive("child")
    assert child1.randbytes(32) == child2.randbytes(32)
    assert Prng(123, "root").derive("other").randbytes(32) != \
        Prng(123, "root").derive("child").randbytes(32)


@settings(max_examples=50, deadline=None)
@given(bound=st.integers(1, 10**30), label=st.text(max_size=10))
def test_prng_below_in_range(bound, label):
    rng = Prng(9, label)
    for _ in range(5):
        assert 0 <= rng.below(bound) < bound


def test_prng_permutation_is_permutation():
    rng = Prng(4, "perm")
    for n in (0, 1, 2, 17):
        perm = rng.permutation(n)
        assert sorted(perm) == list(range(n))
