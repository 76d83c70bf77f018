import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from muasp.asp import Atom, Constant, Integer, parse_atom
from muasp.messaging import (
    POSTMASTER,
    CodecError,
    FrameDecoder,
    InProcessTransport,
    Message,
    MessageError,
    Performative,
    Registry,
    RegistryClient,
    RegistryEntry,
    RegistryError,
    RegistryServer,
    RegistryService,
    TcpTransport,
    decode,
    encode,
)
from muasp.query import Query, QueryMode, QueryResult

WANT = parse_atom("want_go(c1,t1,ns,2)")

names = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True)
terms = st.one_of(names.map(Constant), st.integers(-(2**31), 2**31 - 1).map(Integer))
ground_atoms = st.builds(lambda p, args: Atom(p, tuple(args)), names, st.lists(terms, max_size=4))
contents = st.one_of(
    ground_atoms,
    st.lists(ground_atoms, max_size=3).map(tuple),
    st.builds(Query, st.sampled_from(QueryMode), ground_atoms),
    st.builds(QueryResult, st.sampled_from(QueryMode), ground_atoms, st.booleans()),
    st.text(max_size=30),
)


@st.composite
def messages(draw):
    perf = draw(st.sampled_from(Performative))
    reply = draw(st.text(min_size=1, max_size=10)) if perf in (Performative.CONFIRM, Performative.FAILURE) else draw(st.one_of(st.none(), st.text(min_size=1, max_size=10)))
    return Message(perf, draw(st.text(max_size=10)), draw(st.text(max_size=10)), draw(st.text(min_size=1, max_size=10)), draw(contents), reply)


class TestCodec:
    def test_request_roundtrip(self):
        m = Message(Performative.REQUEST, "c1", "t1", "c1#1", WANT)
        data = encode(m)
        assert decode(data) == m
        assert b'"want_go(c1,t1,ns,2)"' in data

    def test_length_prefix_is_big_endian(self):
        data = encode(Message(Performative.INFORM, "a", "b", "a#1", Atom("p")))
        assert int.from_bytes(data[:4], "big") == len(data) - 4

    def test_confirm_without_reply_to(self):
        with pytest.raises(MessageError):
            encode(Message(Performative.CONFIRM, "t1", "c1", "t1#1", WANT))

    def test_non_ground_content(self):
        with pytest.raises(MessageError):
            encode(Message(Performative.REQUEST, "c1", "t1", "c1#1", parse_atom("p(X)")))

    def test_truncated_payload(self):
        data = encode(Message(Performative.REQUEST, "c1", "t1", "c1#1", WANT))
        with pytest.raises(CodecError) as exc:
            decode(data[:-3])
        assert exc.value.offset == len(data) - 3

    def test_truncated_header(self):
        with pytest.raises(CodecError) as exc:
            decode(b"\x00\x00")
        assert exc.value.offset == 2

    def test_bad_json_offset(self):
        payload = b'{"performative": oops}'
        with pytest.raises(CodecError) as exc:
            decode(len(payload).to_bytes(4, "big") + payload)
        assert exc.value.offset == 4 + payload.index(b"oops")

    def test_bad_atom(self):
        payload = b'{"content":{"atom":"p(X"},"id":"a","in_reply_to":null,"performative":"request","receiver":"b","sender":"a"}'
        with pytest.raises(CodecError):
            decode(len(payload).to_bytes(4, "big") + payload)

    def test_trailing_bytes(self):
        data = encode(Message(Performative.INFORM, "a", "b", "a#1", Atom("p")))
        with pytest.raises(CodecError) as exc:
            decode(data + b"x")
        assert exc.value.offset == len(data)

    @given(messages())
    def test_roundtrip_identity(self, m):
        assert decode(encode(m)) == m

    def test_frame_decoder_incremental(self):
        ms = [Message(Performative.INFORM, "a", "b", f"a#{i}", Atom("p", (Integer(i),))) for i in range(3)]
        stream = b"".join(encode(m) for m in ms)
        dec = FrameDecoder()
        out = []
        for i in range(0, len(stream), 7):
            out += dec.feed(stream[i : i + 7])
        assert out == ms
        assert dec.pending == 0


class TestRegistry:
    def test_lookup_by_role(self):
        r = Registry()
        r.register(RegistryEntry("c1", {"anycar"}))
        r.register(RegistryEntry("tl1", {"a_traffic_light"}))
        assert r.lookup("anycar") == ["c1"]

    def test_unknown_role(self):
        assert Registry().lookup("unknown_role") == []

    def test_duplicate(self):
        r = Registry()
        r.register(RegistryEntry("c1", {"anycar"}))
        with pytest.raises(RegistryError):
            r.register(RegistryEntry("c1", {"other"}))

    def test_registration_order_and_multiple_roles(self):
        r = Registry()
        for n in ("c3", "c1", "c2"):
            r.register(RegistryEntry(n, {"anycar", "vehicle"}))
        assert r.lookup("anycar") == ["c3", "c1", "c2"]
        assert r.lookup("vehicle") == ["c3", "c1", "c2"]

    def test_service_messages(self):
        svc = RegistryService()
        req = Message(Performative.REQUEST, "c1", "registry", "c1#1", parse_atom("register(c1,anycar)"))
        ok = svc.handle(req)
        assert ok.performative is Performative.CONFIRM and ok.in_reply_to == "c1#1"
        dup = svc.handle(Message(Performative.REQUEST, "c1", "registry", "c1#2", parse_atom("register(c1,anycar)")))
        assert dup.performative is Performative.FAILURE
        found = svc.handle(Message(Performative.QUERY_IF, "x", "registry", "x#1", parse_atom("lookup(anycar)")))
        assert found.content == (Atom("c1"),)

    def test_served_over_tcp(self):
        server = RegistryServer().start()
        try:
            client = RegistryClient(server.address, "admin")
            assert client.register(RegistryEntry("c1", {"anycar"})).performative is Performative.CONFIRM
            assert client.register(RegistryEntry("c2", {"anycar"})).performative is Performative.CONFIRM
            assert client.lookup("anycar") == ["c1", "c2"]
            assert client.lookup("nobody") == []
            client.close()
        finally:
            server.close()


@pytest.fixture(params=["inproc", "tcp"])
def transport(request):
    t = InProcessTransport() if request.param == "inproc" else TcpTransport()
    for name in ("a", "b", "c"):
        t.register(RegistryEntry(name, {"node"}))
    yield t
    t.close()


class TestTransport:
    def test_fifo_per_pair(self, transport):
        a = transport.endpoint("a")
        m1 = a.send(Performative.INFORM, "b", Atom("m1"))
        m2 = a.send(Performative.INFORM, "b", Atom("m2"))
        assert transport.wait_quiescent()
        assert transport.drain("b") == [m1, m2]

    def test_empty_drain(self, transport):
        assert transport.drain("c") == []

    def test_unknown_receiver_bounces(self, transport):
        m = transport.endpoint("a").send(Performative.REQUEST, "nobody", Atom("p"))
        assert transport.wait_quiescent()
        (bounce,) = transport.drain("a")
        assert bounce.performative is Performative.FAILURE
        assert bounce.sender == POSTMASTER and bounce.in_reply_to == m.id

    def test_interleaved_senders_keep_pair_order(self, transport):
        sent = {"a": [], "c": []}

        def worker(name):
            ep = transport.endpoint(name)
            for i in range(50):
                sent[name].append(ep.send(Performative.INFORM, "b", Atom("n", (Integer(i),))).id)

        threads = [threading.Thread(target=worker, args=(n,)) for n in ("a", "c")]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert transport.wait_quiescent()
        got = transport.drain("b")
        for name in ("a", "c"):
            assert [m.id for m in got if m.sender == name] == sent[name]

    def test_ids_unique_per_sender(self, transport):
        a = transport.endpoint("a")
        ids = [a.send(Performative.INFORM, "b", Atom("p")).id for _ in range(20)]
        assert len(set(ids)) == 20

    def test_request_confirm_correlation(self, transport):
        a, b = transport.endpoint("a"), transport.endpoint("b")
        req = a.send(Performative.REQUEST, "b", WANT)
        transport.wait_quiescent()
        (got,) = b.drain()
        b.reply(got, Performative.CONFIRM, (Atom("ok"),))
        transport.wait_quiescent()
        (conf,) = a.drain()
        assert conf.in_reply_to == req.id
