import hashlib
from collections import Counter

import pytest
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from hypothesis import given, settings
from hypothesis import strategies as st

from scmci.crypto import (
    HashAlg,
    KeyId,
    PrivateKey,
    PublicKey,
    SymmetricKey,
    counting,
    dual_digest,
    hash,
    keygen_rsa,
    keygen_symmetric,
    link_digests,
    oaep_decode,
    oaep_encode,
    open_envelope,
    public_key_ops,
    rsa_decrypt_int,
    rsa_encrypt_int,
    seal_envelope,
    sign_digest,
    sym_decrypt,
    sym_encrypt,
    verify_digest,
)
from scmci.crypto.envelope import DigitalEnvelope
from scmci.errors import InputTooLarge, KeyTooLargeForModulus, MalformedCiphertext, PaddingError, WrongRecipient
from scmci.ids import Participant as P
from scmci.seeding import derive_seed

SK1 = SymmetricKey(KeyId.SK1, (P.C, P.M), bytes(range(16)))


@pytest.fixture(scope="module")
def kp():
    return keygen_rsa(7, 512)


class Cert:
    def __init__(self, subject, public_key):
        self.subject, self.public_key = subject, public_key


# digests


def test_digest_vectors(vectors):
    assert hash(HashAlg.MD5, b"").hex() == vectors["md5_empty"]
    assert hash("md5", b"abc").hex() == vectors["md5_abc"]
    assert hash(HashAlg.SHA256, b"abc").hex() == vectors["sha256_abc"]


@given(st.binary(max_size=200), st.binary(max_size=200))
def test_dual_digest_is_hash_of_concatenated_hashes(os, pd):
    want = hashlib.md5(hashlib.md5(os).digest() + hashlib.md5(pd).digest()).digest()
    assert dual_digest(HashAlg.MD5, os, pd).bytes == want
    assert link_digests(HashAlg.MD5, hash("md5", os), hash("md5", pd)).bytes == want


# symmetric


@settings(max_examples=100)
@given(st.binary(max_size=300))
def test_sym_roundtrip_and_layout(pt):
    ct = sym_encrypt(SK1, pt)
    assert sym_decrypt(SK1, ct) == pt
    pad = -len(pt) % 16
    assert ct[0] == pad and len(ct) == 1 + len(pt) + pad
    if pt:
        enc = Cipher(algorithms.AES(SK1.bytes), modes.CBC(bytes(16))).encryptor()
        assert ct[1:] == enc.update(pt + bytes(pad)) + enc.finalize()


def test_sym_is_deterministic():
    assert sym_encrypt(SK1, b"order") == sym_encrypt(SK1, b"order")


@pytest.mark.parametrize(
    "ct",
    [b"", b"\x00" + bytes(15), b"\x10" + bytes(16), b"\x05", bytes([3]) + bytes(17)],
    ids=["empty", "short", "pad16", "pad-no-body", "ragged"],
)
def test_malformed_ciphertexts(ct):
    with pytest.raises(MalformedCiphertext):
        sym_decrypt(SK1, ct)


def test_nonzero_padding_detected():
    ct = sym_encrypt(SK1, b"abc")
    other = SymmetricKey(KeyId.SK1, (P.C, P.M), bytes(16))
    with pytest.raises(MalformedCiphertext):
        sym_decrypt(other, ct)


def test_key_validation():
    with pytest.raises(ValueError):
        SymmetricKey(KeyId.SK1, (P.C, P.M), bytes(10))
    with pytest.raises(ValueError):
        SymmetricKey(KeyId.SK1, (P.C, P.PG), bytes(16))
    assert "00" not in repr(SK1)


def test_keygen_symmetric_is_seeded():
    a = keygen_symmetric(1, KeyId.SK3)
    assert a == keygen_symmetric(1, "SK3")
    assert a != keygen_symmetric(2, KeyId.SK3)
    assert a.pair == (P.CB, P.PG)
    assert len(keygen_symmetric(1, KeyId.SK2, length=32).bytes) == 32


# RSA


def test_toy_textbook_vector(vectors):
    n, c = int(vectors["toy_rsa_n"], 16), int(vectors["toy_rsa_ciphertext"], 16)
    assert rsa_encrypt_int(PublicKey(n, 17), 65) == c
    assert rsa_decrypt_int(PrivateKey(n, 2753), c) == 65


def test_keygen(kp):
    assert kp.modulus_n.bit_length() == 512
    assert kp.public_e == 65537
    assert keygen_rsa(7, 512) == kp
    assert keygen_rsa(8, 512) != kp
    assert "d=" not in repr(kp)


@pytest.mark.parametrize("bits", [32, 4096])
def test_keygen_rejects_sizes(bits):
    with pytest.raises(ValueError):
        keygen_rsa(0, bits)


@settings(max_examples=30)
@given(st.integers(min_value=0))
def test_rsa_roundtrip_and_multiplicativity(m):
    kp = keygen_rsa(7, 512)
    n = kp.modulus_n
    m %= n
    c = rsa_encrypt_int(kp.public, m)
    assert rsa_decrypt_int(kp.private, c) == m
    assert rsa_encrypt_int(kp.public, 2 * m % n) == c * rsa_encrypt_int(kp.public, 2) % n


def test_rsa_range(kp):
    with pytest.raises(InputTooLarge):
        rsa_encrypt_int(kp.public, kp.modulus_n)
    with pytest.raises(InputTooLarge):
        rsa_decrypt_int(kp.private, -1)


def test_signatures(kp):
    d = hash("md5", b"AI")
    sig = sign_digest(kp.private, d)
    assert verify_digest(kp.public, d, sig)
    assert not verify_digest(kp.public, hash("md5", b"AJ"), sig)
    assert not verify_digest(kp.public, d, kp.modulus_n + 1)


def test_oaep_roundtrip_and_rejection(kp):
    k = kp.public.size
    m = oaep_encode(b"sixteen byte key", k, bytes(20))
    assert oaep_decode(m, k) == b"sixteen byte key"
    with pytest.raises(PaddingError):
        oaep_decode(m ^ 1, k)
    with pytest.raises(InputTooLarge):
        oaep_encode(bytes(k), k, bytes(20))


# envelopes


def test_envelope_roundtrip(kp):
    cert = Cert(P.C, kp.public)
    env = seal_envelope(cert, SK1)
    assert env.recipient is P.C and env.sealed_key == pow(int.from_bytes(SK1.bytes, "big"), 65537, kp.modulus_n)
    assert open_envelope(kp.private, env) == SK1


def test_envelope_leading_zero_key(kp):
    key = SymmetricKey(KeyId.SK1, (P.C, P.M), bytes(15) + b"\x01")
    assert open_envelope(kp.private, seal_envelope(Cert(P.C, kp.public), key)) == key


def test_envelope_errors(kp):
    small = keygen_rsa(3, 128)
    with pytest.raises(KeyTooLargeForModulus):
        seal_envelope(Cert(P.C, small.public), SK1)
    env = seal_envelope(Cert(P.C, kp.public), SK1)
    other = keygen_rsa(9, 512)
    with pytest.raises(WrongRecipient):
        open_envelope(other.private, env)
    big = DigitalEnvelope(P.C, kp.modulus_n + 5, KeyId.SK1, (P.C, P.M))
    with pytest.raises(WrongRecipient):
        open_envelope(kp.private, big)


# instrumentation and seeding


def test_counting_nests_without_double_counting(kp):
    outer = Counter()
    with counting(outer):
        with counting() as inner:
            rsa_encrypt_int(kp.public, 5)
            sym_encrypt(SK1, b"x")
        with counting(outer):
            hash("md5", b"")
    assert inner == Counter(rsa_enc=1, sym_enc=1)
    assert outer == Counter(rsa_enc=1, sym_enc=1, hash=1)
    assert public_key_ops(outer) == 1


def test_derive_seed():
    assert derive_seed(1, "a") == derive_seed(1, "a")
    assert derive_seed(1, "a") != derive_seed(1, "b") != derive_seed(2, "a")
    assert 0 <= derive_seed(123, "x", 4) < 2**64
