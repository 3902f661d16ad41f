from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from scmci import fixtures
from scmci.crypto import HashAlg, KeyId, keygen_symmetric, sym_encrypt
from scmci.errors import (
    AuthorizationDeclined,
    CertificateInvalid,
    ConsistencyFailure,
    DoubleSettlement,
    EnvelopeOpenFailed,
    FlowStalled,
    IntegrityFailure,
    LinkageFailure,
    MissingKey,
    NotSettled,
    OrderMismatch,
    ReplayRejected,
    WireError,
)
from scmci.ids import Participant as P
from scmci.protocol import (
    ALLOWED_KEYS,
    AuthorizationInfo,
    BankLedger,
    Deployment,
    LookupTable,
    OrderSummary,
    PaymentResponse,
    ProtocolConfig,
    PurchaseBundle,
    PurchaseDetails,
    Reason,
    State,
    compose_purchase,
    deliver_goods,
    envelope_frames,
    gateway_process,
    luhn_valid,
    merchant_process,
    replay_frame,
    settle,
)
from scmci.wire import MsgType

PARTIES = (P.C, P.M, P.PG, P.CB, P.MB)


# messages


@pytest.mark.parametrize("number, ok", [("4111111111111111", True), ("79927398713", True), ("4111111111111112", False), ("12a4", False)])
def test_luhn(number, ok):
    assert luhn_valid(number) is ok


def test_fixture_cards_are_luhn_valid():
    assert all(luhn_valid(c) for c in fixtures.CARDS)
    assert len(set(fixtures.CARDS)) == 10


@given(st.binary(max_size=100), st.integers(0, 2**63 - 1))
def test_order_summary_roundtrip(items, amount):
    os = OrderSummary(b"ORD12345", items, amount, "EUR")
    assert OrderSummary.from_bytes(os.to_bytes()) == os


def test_message_codecs():
    pd = PurchaseDetails(b"ORD00001", "4111111111111111", "1228", 2500)
    assert PurchaseDetails.from_bytes(pd.to_bytes()) == pd and len(pd.to_bytes()) == PurchaseDetails.SIZE
    ai = AuthorizationInfo(b"ORD00001", True, b"12345678", Reason.APPROVED)
    assert AuthorizationInfo.from_bytes(ai.to_bytes()) == ai
    pr = PaymentResponse(b"ORD00001", 2500, b"d" * 8, b"c" * 8)
    assert PaymentResponse.from_bytes(pr.to_bytes()) == pr
    for bad in (pd.to_bytes()[:-1], ai.to_bytes() + b"x"):
        with pytest.raises(WireError):
            (PurchaseDetails if len(bad) < 30 else AuthorizationInfo).from_bytes(bad)
    with pytest.raises(WireError):
        OrderSummary.from_bytes(b"short")
    with pytest.raises(ValueError):
        PurchaseDetails(b"ORD00001", "4111", "1228", 1)
    with pytest.raises(ValueError):
        OrderSummary(b"ORD1", b"", 1, "USD")


# setup


def test_setup_builds_lookup_tables(session):
    tables = {pid: session.party(pid).lookup for pid in PARTIES}
    for pid, t in tables.items():
        assert t.key_ids() == ALLOWED_KEYS[pid]
        assert t.complete()
    for key_id in KeyId:
        holders = [t.key(key_id) for t in tables.values() if t.has(key_id)]
        assert len({k.bytes for k in holders}) <= 1
    assert tables[P.PG].key_ids() == {KeyId.SK2, KeyId.SK3, KeyId.SK4, KeyId.SK5}
    census = session.transcript.census()
    assert census == {"CERT_EXCHANGE": 5, "ENVELOPE": 5}
    assert all(session.party(p).state is State.KEYED for p in PARTIES)


def test_lookup_table_guards():
    t = LookupTable(P.CB)
    with pytest.raises(MissingKey):
        t.key(KeyId.SK3)
    with pytest.raises(EnvelopeOpenFailed):
        t.install(keygen_symmetric(1, KeyId.SK1))
    t.install(keygen_symmetric(1, KeyId.SK3))
    with pytest.raises(EnvelopeOpenFailed):
        t.install(keygen_symmetric(2, KeyId.SK3))


def test_forged_certificate_rejected(deployment):
    def hook(m, bus):
        if m.msg_type is MsgType.CERT_EXCHANGE and m.sender == P.MB:
            data = bytearray(m.payload)
            data[10] ^= 0x40
            return replace(m, payload=bytes(data))
        return m

    with pytest.raises(CertificateInvalid) as err:
        deployment.session(hook=hook).run_setup()
    assert err.value.step == 1


def test_envelope_replayed_during_setup_is_rejected(deployment):
    s = deployment.session()
    s.run_setup()
    i = envelope_frames(s.transcript)[0]
    out = replay_frame(s, s.transcript[i].message)
    assert out.rejected_by_seq


# purchase and settlement


def test_happy_path(deployment, order):
    s = deployment.session()
    out = s.run(*order)
    os, pd = order
    assert out.complete and out.goods == os.item_list
    assert all(out.state[p] in (State.COMPLETE, State.SETTLED) for p in PARTIES)
    assert out.cb_delta == -pd.amount and out.mb_delta == pd.amount
    steps = s.recorder.step_numbers()
    assert set(steps) == set(range(1, 31))
    assert steps.index(14) < steps.index(16) < steps.index(21) < steps.index(25) < steps.index(30)
    msgs = s.transcript.messages()
    assert [m.msg_type for m in msgs[:10]].count(MsgType.ENVELOPE) == 5
    assert all(m.msg_type is not MsgType.ENVELOPE for m in msgs[s.setup_frames :])
    assert s.public_key_ops("purchase") == 0
    assert s.public_key_ops("setup") == 15  # 5 seals, 5 opens, 5 certificate checks
    assert s.transcript.seq_monotonic()
    assert not s.recorder.failures


def test_merchant_never_sees_card_and_gateway_never_sees_items(deployment, order):
    s = deployment.session()
    s.run(*order)
    os, pd = order
    merchant_seen = b"".join(s.party(P.M).plaintexts_seen)
    gateway_seen = b"".join(s.party(P.PG).plaintexts_seen)
    assert pd.card_number.encode() not in merchant_seen
    assert os.item_list not in gateway_seen


@pytest.mark.parametrize("alg, bits", [(HashAlg.SHA256, 512), (HashAlg.MD5, 1024)])
def test_other_parameters(alg, bits, order):
    dep = Deployment(5, ProtocolConfig(rsa_bits=bits, hash_alg=alg))
    assert dep.session().run(*order).complete


@pytest.mark.parametrize(
    "card, expiry, balance, reason",
    [
        ("4111111111111111", "1228", 100, Reason.INSUFFICIENT_FUNDS),
        (fixtures.BAD_LUHN_CARD, "1228", None, Reason.BAD_PAN),
        ("4111111111111111", "0120", None, Reason.EXPIRED),
        (fixtures.luhn_complete("555555555555444"), "1228", None, Reason.UNKNOWN_ACCOUNT),
    ],
)
def test_declines(deployment, card, expiry, balance, reason):
    os, _ = fixtures.purchase(0)
    pd = PurchaseDetails(os.order_id, card, expiry, os.total_amount)
    balances = {"4111111111111111": balance if balance is not None else 10_000}
    s = deployment.session(cb_balances=balances)
    with pytest.raises(AuthorizationDeclined) as err:
        s.run(os, pd)
    assert err.value.step == 25 and reason.name in str(err.value)
    assert s.party(P.CB).ledger.journal == [] and s.party(P.MB).ledger.journal == []
    assert s.party(P.C).goods is None


def test_order_mismatch(session):
    os, _ = fixtures.purchase(0)
    _, pd = fixtures.purchase(1)
    with pytest.raises(OrderMismatch):
        compose_purchase(session.party(P.C), os, pd)


def test_dropped_goods_stalls(deployment, order):
    s = deployment.session(hook=lambda m, b: None if m.msg_type is MsgType.GOODS else m)
    with pytest.raises(FlowStalled):
        s.run(*order)
    assert s.party(P.CB).ledger.delta_for(order[0].order_id) == -order[1].amount


def test_purchase_replay_rejected_without_killing_merchant(deployment, order):
    s = deployment.session()
    s.run(*order)
    idx = next(i for i, e in enumerate(s.transcript) if e.message.msg_type is MsgType.PURCHASE)
    out = replay_frame(s, s.transcript[idx].message)
    assert not out.accepted and isinstance(out.error, ReplayRejected)
    assert s.party(P.M).state is State.COMPLETE
    assert s.party(P.CB).ledger.delta_for(order[0].order_id) == -order[1].amount


def test_purchase_replay_into_fresh_session_fails_integrity(order):
    a = Deployment(1)
    sa = a.session()
    sa.run(*order)
    frame = next(e.message for e in sa.transcript if e.message.msg_type is MsgType.PURCHASE)
    sb = Deployment(2).session()
    sb.run_setup()
    out = replay_frame(sb, frame)
    assert isinstance(out.error, IntegrityFailure)


# verification functions called directly


def _bundle(session, index):
    return compose_purchase(session.party(P.C), *fixtures.purchase(index))


def test_merchant_detects_swapped_clear_digest(session):
    a, b = _bundle(session, 0), _bundle(session, 1)
    with pytest.raises(IntegrityFailure) as err:
        merchant_process(session.party(P.M), replace(a, h_os_clear=b.h_os_clear))
    assert err.value.step == 17


def test_gateway_detects_altered_order_digest(session):
    m, pg = session.party(P.M), session.party(P.PG)
    fwd = merchant_process(m, _bundle(session, 0))
    other = merchant_process(m, _bundle(session, 1))
    with pytest.raises(ConsistencyFailure):
        gateway_process(pg, replace(fwd, enc_h_od=other.enc_h_od))
    assert gateway_process(pg, fwd).pd == fixtures.purchase(0)[1]


def test_splice_is_a_linkage_failure(session):
    m, pg = session.party(P.M), session.party(P.PG)
    a, b = _bundle(session, 2), _bundle(session, 3)
    spliced = PurchaseBundle(a.merchant_part, b.gateway_part, a.h_os_clear)
    with pytest.raises(LinkageFailure) as err:
        gateway_process(pg, merchant_process(m, spliced))
    assert err.value.step == 21


def test_settlement_functions_and_double_settlement(deployment, order):
    s = deployment.session()
    s.run_setup()
    os, pd = order
    pg, cb, mb = s.party(P.PG), s.party(P.CB), s.party(P.MB)
    ai = cb.authorize(pd)
    assert ai.approved
    result = settle(pg, cb, mb, ai)
    assert result.payment.credit_ref != bytes(8)
    before = dict(cb.ledger.balances), dict(mb.ledger.balances)
    with pytest.raises(DoubleSettlement):
        settle(pg, cb, mb, ai)
    assert (cb.ledger.balances, mb.ledger.balances) == before
    declined = replace(ai, approved=False, reason=Reason.INSUFFICIENT_FUNDS)
    with pytest.raises(AuthorizationDeclined):
        settle(pg, cb, mb, declined)


def test_goods_need_settlement(session):
    with pytest.raises(NotSettled):
        deliver_goods(session.party(P.M), None)


def test_ledger_is_idempotent_per_order():
    ledger = BankLedger({"A": 100})
    ledger.apply("A", b"o1", -40)
    with pytest.raises(DoubleSettlement):
        ledger.apply("A", b"o1", -40)
    assert ledger.balances == {"A": 60} and ledger.delta_for(b"o1") == -40
    with pytest.raises(KeyError):
        ledger.apply("B", b"o2", 1)


def test_goods_under_wrong_key_rejected(deployment, order):
    def hook(m, bus):
        if m.msg_type is MsgType.GOODS:
            return replace(m, payload=sym_encrypt(keygen_symmetric(0, KeyId.SK1), b"x" * 20))
        return m

    s = deployment.session(hook=hook)
    with pytest.raises(Exception) as err:
        s.run(*order)
    assert err.value.step == 30
