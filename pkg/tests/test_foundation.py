import pytest

from portnets.foundation import (
    Bag,
    BagUnderflowError,
    LabeledNet,
    NetError,
    NetSystem,
    NotEnabledError,
    UnknownNodeError,
    bag_arith,
    enabled,
    fire,
    fire_sequence,
    isomorphic,
    postset,
    preset,
    structure,
)


@pytest.fixture
def ping():
    return LabeledNet.build(
        ["i", "p", "f"], {"t1": "req", "t2": "ack"},
        [("i", "t1"), ("t1", "p"), ("p", "t2"), ("t2", "f")],
    )


class TestBag:
    def test_add(self):
        assert bag_arith(Bag({"p": 1}), Bag({"p": 2}), "add") == Bag({"p": 3})

    def test_leq(self):
        assert bag_arith(Bag({"p": 1}), Bag({"p": 1, "q": 1}), "leq") is True
        assert not Bag({"p": 2}) <= Bag({"p": 1})

    def test_sub_underflow(self):
        with pytest.raises(BagUnderflowError):
            bag_arith(Bag({"p": 1}), Bag({"p": 2}), "sub")

    def test_no_zero_entries(self):
        b = Bag({"p": 2, "q": 0}) - Bag({"p": 2})
        assert dict(b) == {}
        assert "q" not in Bag({"q": 0})

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            Bag({"p": -1})

    def test_hash_and_equality_ignore_order(self):
        assert hash(Bag({"a": 1, "b": 2})) == hash(Bag({"b": 2, "a": 1}))
        assert Bag(["a", "b", "b"]) == Bag({"a": 1, "b": 2})

    def test_unknown_op(self):
        with pytest.raises(ValueError):
            bag_arith(Bag(), Bag(), "mul")


class TestNet:
    def test_pre_post(self, ping):
        assert preset(ping, "t1") == {"i"}
        assert postset(ping, "p") == {"t2"}
        assert preset(ping, "i") == set()

    def test_unknown_node(self, ping):
        with pytest.raises(UnknownNodeError):
            preset(ping, "zz")

    def test_invalid_label(self):
        with pytest.raises(NetError):
            LabeledNet.build(["p"], {"t": "a b"}, [("p", "t")])

    def test_place_to_place_arc_rejected(self):
        with pytest.raises(NetError):
            LabeledNet.build(["p", "q"], {"t": "a"}, [("p", "q")])

    def test_overlapping_ids_rejected(self):
        with pytest.raises(NetError):
            LabeledNet(frozenset({"x"}), frozenset({"x"}), frozenset(), {"x": "a"})

    def test_missing_label_rejected(self):
        with pytest.raises(NetError):
            LabeledNet(frozenset({"p"}), frozenset({"t"}), frozenset(), {})

    def test_marking_places_checked(self, ping):
        with pytest.raises(NetError):
            NetSystem(ping, Bag({"nowhere": 1}), Bag({"f": 1}))


class TestFiring:
    def test_enabled(self, ping):
        assert enabled(ping, Bag({"i": 1})) == {"t1"}
        assert enabled(ping, Bag({"f": 1})) == set()
        assert enabled(ping, Bag({"i": 1, "p": 1})) == {"t1", "t2"}

    def test_fire(self, ping):
        assert fire(ping, Bag({"i": 1}), "t1") == Bag({"p": 1})
        assert fire(ping, Bag({"i": 2}), "t1") == Bag({"i": 1, "p": 1})

    def test_fire_not_enabled(self, ping):
        with pytest.raises(NotEnabledError):
            fire(ping, Bag({"i": 1}), "t2")

    def test_fire_sequence(self, ping):
        assert fire_sequence(ping, Bag({"i": 1}), ["t1", "t2"]) == Bag({"f": 1})

    def test_marking_equation(self, ping):
        m = Bag({"i": 2, "p": 1})
        for t in enabled(ping, m):
            m2 = fire(ping, m, t)
            for p in ping.places:
                expected = m.get(p, 0) - (p in preset(ping, t)) + (p in postset(ping, t))
                assert m2.get(p, 0) == expected


class TestStructure:
    def test_ping(self, ping):
        r = structure(ping)
        assert r.is_s_net and r.is_wfn
        assert (r.source, r.sink) == ("i", "f")
        assert r.splits == frozenset() and r.joins == frozenset()
        assert not r.is_strongly_connected

    def test_not_s_net(self):
        n = LabeledNet.build(["i", "a", "b"], {"t": "x"}, [("i", "t"), ("t", "a"), ("t", "b")])
        assert not structure(n).is_s_net

    def test_no_sink(self, ping):
        n = LabeledNet(ping.places, ping.transitions, ping.flow | {("f", "t1")}, dict(ping.labeling))
        assert not structure(n).is_wfn

    def test_splits_and_joins(self):
        n = LabeledNet.build(
            ["i", "a", "f"], {"t1": "x", "t2": "y", "t3": "z"},
            [("i", "t1"), ("t1", "a"), ("i", "t2"), ("t2", "a"), ("a", "t3"), ("t3", "f")],
        )
        r = structure(n)
        assert r.splits == {"i"} and r.joins == {"a"}

    def test_strongly_connected_cycle(self):
        n = LabeledNet.build(["a", "b"], {"t": "x", "u": "y"}, [("a", "t"), ("t", "b"), ("b", "u"), ("u", "a")])
        assert structure(n).is_strongly_connected


class TestIsomorphism:
    def test_identity(self, ping):
        psi = isomorphic(ping, ping)
        assert psi == {x: x for x in ping.places | ping.transitions}

    def test_label_mismatch(self, ping):
        other = LabeledNet(ping.places, ping.transitions, ping.flow, {"t1": "req", "t2": "nack"})
        assert isomorphic(ping, other) is None

    def test_renamed_copy(self, ping):
        ren = {x: x.upper() + "_" for x in ping.places | ping.transitions}
        psi = isomorphic(ping, ping.rename(ren))
        assert psi == ren

    def test_symmetric(self, ping):
        ren = {x: x + "2" for x in ping.places | ping.transitions}
        other = ping.rename(ren)
        assert isomorphic(other, ping) is not None

    def test_size_mismatch(self, ping):
        n = LabeledNet.build(["i"], {}, [])
        assert isomorphic(ping, n) is None
