import json

import pytest

from scmci import fixtures
from scmci.adversary import (
    AttackState,
    BusOracle,
    Reason,
    ScmciEnvelopeOracle,
    attack_baseline,
    attack_scmci,
    capture,
    forge,
    purchase_phase,
    receiver_oracle,
    replay_attack,
    run_attack_cycle,
)
from scmci.baseline import BaselineSession, HybridFrame, Verdict, baseline_receive, session_key
from scmci.crypto import sym_decrypt
from scmci.baseline import unwrap_body
from scmci.ids import Participant as P
from scmci.protocol import Deployment, ProtocolConfig
from scmci.wire import MsgType, Transcript

PLANTED = int.from_bytes(fixtures.PLANTED_SESSION_KEY, "big")


def baseline_with_key(deployment, key_bits, key):
    s = BaselineSession(deployment, key_bits=key_bits)
    s.send(P.M, b"order information", session_key_value=key)
    return s


def test_capture_census(deployment, order):
    b = BaselineSession(deployment)
    b.send(P.M, b"one")
    assert len(capture(b.transcript)) == 1
    s = deployment.session()
    s.run(*order)
    cands = capture(s.transcript)
    assert len(cands) == 5 and {c.kind for c in cands} == {"envelope"}
    assert sorted(c.message.receiver for c in cands) == [P.C, P.C, P.M, P.CB, P.MB]
    assert capture(purchase_phase(s.transcript)) == []


@pytest.mark.parametrize("bits", [8, 16, 32, 64, 128])
def test_recovers_within_budget(deployment, bits):
    key = (PLANTED >> (128 - bits)) if bits < 128 else PLANTED
    s = baseline_with_key(deployment, bits, key)
    out = attack_baseline(s)
    assert out.recovered and out.key == key
    assert out.query_count <= bits + 2 == out.budget
    # soundness: the recovered key opens the captured body
    body = HybridFrame.from_bytes(capture(s.transcript)[0].message.payload).body
    assert unwrap_body(sym_decrypt(session_key(out.key), body)) == b"order information"


def test_planted_key_recovered_in_130_queries(deployment):
    out = attack_baseline(baseline_with_key(deployment, 128, PLANTED))
    assert out.key_hex() == "FD68C116F776643E447A6EEDC77ECDFD"
    assert out.query_count == 130


def test_all_256_toy_keys(deployment):
    """The attack recovers every possible 8-bit key, checked against the planted value."""
    priv = deployment.identities[P.M].keypair.private
    oracle = receiver_oracle(priv)
    for key in range(256):
        s = BaselineSession(deployment, key_bits=8)
        msg = s.send(P.M, b"t", session_key_value=key)
        out = run_attack_cycle(AttackState.for_target(msg, deployment.identities[P.M].cert.public_key), oracle)
        assert out.recovered and out.key == key and out.query_count == 10


def test_bus_and_direct_oracles_agree(deployment):
    s = baseline_with_key(deployment, 16, 0xBEEF)
    target = capture(s.transcript)[0].message
    pub = deployment.identities[P.M].cert.public_key
    a = run_attack_cycle(AttackState.for_target(target, pub), BusOracle(s))
    b = run_attack_cycle(AttackState.for_target(target, pub), receiver_oracle(deployment.identities[P.M].keypair.private))
    assert a.log == b.log and a.key == b.key == 0xBEEF


def test_oaep_blocks_the_attack(deployment, order):
    s = BaselineSession(deployment, padding="oaep")
    s.run(*order)
    out = attack_baseline(s)
    assert not out.recovered and out.reason is Reason.CONFIRMATION_FAILED


def test_budget_and_modulus_guards(deployment):
    small = Deployment(3, ProtocolConfig(rsa_bits=256))
    s = BaselineSession(small, key_bits=128)
    s.send(P.M, b"x")
    assert attack_baseline(s).reason is Reason.MODULUS_TOO_SMALL
    s = baseline_with_key(deployment, 8, 3)
    state = AttackState.for_target(capture(s.transcript)[0].message, deployment.identities[P.M].cert.public_key)
    state.query_count = state.budget
    assert run_attack_cycle(state, receiver_oracle(deployment.identities[P.M].keypair.private)).reason is Reason.BUDGET_EXHAUSTED


def test_calibration_failure(deployment):
    s = baseline_with_key(deployment, 8, 3)
    state = AttackState.for_target(capture(s.transcript)[0].message, deployment.identities[P.M].cert.public_key)
    assert run_attack_cycle(state, lambda f: Verdict.REJECT).reason is Reason.CALIBRATION_FAILED


def test_scmci_envelope_attack_fails_and_rerun_completes(order):
    dep = Deployment(77)
    s = dep.session()
    s.run(*order)
    out = attack_scmci(dep, s.transcript, *order)
    assert not out.recovered and out.reason is Reason.NO_ITERATIVE_ORACLE
    assert out.query_count == 2 and [q["verdict"] for q in out.log] == ["ACCEPT", "ABORT"]
    assert dep.generation == 1
    assert dep.session().run(*order).complete


def test_every_scmci_envelope_resists(order):
    dep = Deployment(78)
    s = dep.session()
    s.run(*order)
    for cand in capture(s.transcript):
        pub = dep.identities[cand.message.receiver].cert.public_key
        out = run_attack_cycle(AttackState.for_target(cand.message, pub), ScmciEnvelopeOracle(dep, *order))
        assert out.reason is Reason.NO_ITERATIVE_ORACLE


def test_scmci_purchase_phase_has_no_target(deployment, order):
    s = deployment.session()
    s.run(*order)
    out = attack_scmci(deployment, Transcript.from_messages(purchase_phase(s.transcript)), *order)
    assert out.reason is Reason.NO_TARGET and out.query_count == 0


def test_forged_envelope_keeps_metadata(deployment, order):
    s = deployment.session()
    s.run_setup()
    target = capture(s.transcript)[0].message
    f = forge(target, 12345, None, 64)
    assert (f.msg_type, f.sender, f.receiver, f.seq) == (target.msg_type, target.sender, target.receiver, target.seq)
    assert f.payload != target.payload


def test_replay_attack_both_protocols(deployment, order):
    s = deployment.session()
    s.run(*order)
    idx = next(i for i, e in enumerate(s.transcript) if e.message.msg_type is MsgType.PURCHASE)
    assert replay_attack(s, idx).rejected_by_seq
    b = BaselineSession(deployment)
    b.run(*order)
    assert replay_attack(b, 0) is True


def test_report_json(deployment):
    out = attack_baseline(baseline_with_key(deployment, 8, 0x42))
    rep = json.loads(out.to_json())
    assert rep["outcome"] == "RECOVERED" and rep["recovered_key"] == "42"
    assert rep["budget"] == 10 and len(rep["log"]) == rep["query_count"]
    assert rep["log"][0]["kind"] == "copy" and rep["log"][-1]["kind"] == "confirm"
