import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scmci import fixtures
from scmci.baseline import (
    BaselineSession,
    HybridFrame,
    Padding,
    Verdict,
    baseline_receive,
    baseline_send,
    session_key,
    unwrap_body,
    wrap_body,
)
from scmci.crypto import counting, public_key_ops, sym_encrypt
from scmci.errors import WireError
from scmci.ids import Participant as P
from scmci.wire import MsgType

PLANTED = int.from_bytes(fixtures.PLANTED_SESSION_KEY, "big")


@pytest.fixture(scope="module")
def merchant(deployment):
    ident = deployment.identities[P.M]
    return ident.cert, ident.keypair.private


@settings(max_examples=40, deadline=None)
@given(msg=st.binary(max_size=200), seed=st.integers(0, 2**64 - 1))
def test_roundtrip(merchant, msg, seed):
    cert, priv = merchant
    got = baseline_receive(priv, baseline_send(P.C, cert, msg, seed))
    assert got == (Verdict.ACCEPT, msg)


def test_fresh_key_per_seed(merchant):
    cert, _ = merchant
    a = baseline_send(P.C, cert, b"same", 1)
    b = baseline_send(P.C, cert, b"same", 2)
    assert a.sealed_session_key != b.sealed_session_key and a.body != b.body
    assert baseline_send(P.C, cert, b"same", 1) == a


def test_planted_key_golden(merchant, vectors):
    cert, priv = merchant
    frame = baseline_send(P.C, cert, b"order", 0, session_key_value=PLANTED)
    assert f"{frame.sealed_session_key:0128x}" == vectors["planted_key_sealed"]
    assert baseline_receive(priv, frame).plaintext == b"order"


def test_random_substituted_keys_rejected(merchant):
    cert, priv = merchant
    frame = baseline_send(P.C, cert, b"payment details", 3)
    r = random.Random(11)
    n, e = cert.public_key
    verdicts = Counter()
    for _ in range(300):
        forged = HybridFrame(pow(r.getrandbits(128), e, n), frame.body)
        verdicts[baseline_receive(priv, forged).verdict] += 1
    assert verdicts == {Verdict.REJECT: 300}


@pytest.mark.parametrize("planted", [0x00, 0x5A, 0xB7, 0xFF])
def test_shifted_key_verdicts_by_brute_force(merchant, planted):
    """Every (shift, candidate) pair on an 8-bit key: ACCEPT exactly when the candidate
    equals the low 8 bits of planted << shift."""
    cert, priv = merchant
    n, e = cert.public_key
    frame = baseline_send(P.C, cert, b"x", 0, key_bits=8, session_key_value=planted)
    for shift in range(8):
        sealed = frame.sealed_session_key * pow(2, shift * e, n) % n
        accepted = [
            k
            for k in range(256)
            if baseline_receive(priv, HybridFrame(sealed, sym_encrypt(session_key(k), wrap_body(b"p")), 8)).verdict
            is Verdict.ACCEPT
        ]
        assert accepted == [(planted << shift) & 0xFF]


def test_public_key_ops_per_message(deployment, order):
    session = BaselineSession(deployment)
    with counting() as c:
        session.run(*order)
    assert session.messages_sent == 2
    assert c["rsa_enc"] >= 2 and c["rsa_dec"] >= 2
    assert public_key_ops(c) >= 2 * session.messages_sent


def test_verdict_is_deterministic(merchant):
    cert, priv = merchant
    frame = baseline_send(P.C, cert, b"abc", 9)
    bad = HybridFrame(frame.sealed_session_key ^ 1, frame.body)
    assert len({baseline_receive(priv, bad) for _ in range(5)}) == 1


def test_oaep_mode(merchant):
    cert, priv = merchant
    frame = baseline_send(P.C, cert, b"padded", 4, padding="oaep")
    assert baseline_receive(priv, frame) == (Verdict.ACCEPT, b"padded")
    n, e = cert.public_key
    shifted = HybridFrame(frame.sealed_session_key * pow(2, e, n) % n, frame.body, padding=Padding.OAEP)
    assert baseline_receive(priv, shifted).verdict is Verdict.REJECT


def test_frame_codec():
    f = HybridFrame(12345, b"\x00" * 17, 64, Padding.OAEP)
    assert HybridFrame.from_bytes(f.to_bytes(64)) == f
    with pytest.raises(WireError):
        HybridFrame.from_bytes(b"\x00\x01x\x00\x00\x00\x00")


def test_body_structure():
    assert unwrap_body(wrap_body(b"hello")) == b"hello"
    body = bytearray(wrap_body(b"hello"))
    body[-1] ^= 1
    assert unwrap_body(bytes(body)) is None
    assert unwrap_body(b"junk") is None


def test_receiver_answers_reject_with_abort(deployment):
    s = BaselineSession(deployment)
    good = s.send(P.M, b"hi")
    payload = HybridFrame.from_bytes(good.payload)
    forged = good.__class__(good.msg_type, good.sender, good.receiver, 99, HybridFrame(5, payload.body).to_bytes())
    s.bus.inject(forged)
    s.bus.run_until_idle()
    aborts = [m for m in s.customer_inbox if m.msg_type is MsgType.ABORT]
    assert len(aborts) == 1 and aborts[0].sender == P.M


def test_baseline_replay_accepted(deployment):
    s = BaselineSession(deployment)
    m = s.send(P.M, b"order")
    assert s.replay(m)
    assert len(s.receivers[P.M].accepted) == 2
