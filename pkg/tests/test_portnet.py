import pytest

from portnets.corpus import ping, portnet, race
from portnets.foundation import structure
from portnets.mirror import derive_full_mirror
from portnets.portnet import (
    CompositionError,
    Direction,
    LabeledPortnet,
    OpenNet,
    PortnetError,
    closure,
    composable,
    compose,
    direction,
    skeleton,
    validate_portnet,
)


def codes(diags):
    return {d.code for d in diags}


class TestDirection:
    def test_ping(self):
        s = ping()
        assert direction(s, "t1") is Direction.RECEIVE
        assert direction(s, "t2") is Direction.SEND

    def test_closure_transition_is_tau(self):
        c = closure(ping())
        (t,) = c.transitions - ping().transitions
        assert direction(c, t) is Direction.TAU

    def test_unknown(self):
        with pytest.raises(KeyError):
            direction(ping(), "nope")


class TestSkeleton:
    def test_ping(self):
        sk = skeleton(ping())
        assert len(sk.transitions) == 2 and len(sk.places) == 3
        assert len(sk.flow) == 4 and not sk.inputs and not sk.outputs
        assert sk.init == {"i"} and sk.fin == {"f"}

    def test_arc_count(self):
        s = ping()
        touching = [a for a in s.flow if set(a) & s.interface]
        assert len(s.flow) == 6
        assert len(skeleton(s).flow) == len(s.flow) - len(touching) == 4

    def test_idempotent(self):
        sk = skeleton(race())
        assert skeleton(sk) == sk


class TestClosure:
    def test_strongly_connected(self):
        assert structure(skeleton(closure(ping())).net).is_strongly_connected

    def test_adds_one_transition_two_arcs(self):
        s = ping()
        c = closure(s)
        assert len(c.transitions) == len(s.transitions) + 1
        assert len(c.flow) == len(s.flow) + 2

    def test_twice_fails(self):
        with pytest.raises(PortnetError) as e:
            closure(closure(ping()))
        assert "CLOSURE-PRE" in codes(e.value.diagnostics)


class TestValidation:
    def test_ping_valid(self):
        assert validate_portnet(ping()) == []

    def test_two_interface_places(self):
        s = ping()
        o = OpenNet.build(
            s.places, {"t1": "req", "t2": "ack"},
            [("i", "t1"), ("in_req", "t1"), ("t1", "p"), ("p", "t2"), ("in_req", "t2"),
             ("t2", "f"), ("t2", "out_ack")],
            inputs=["in_req"], outputs=["out_ack"], init=["i"], fin=["f"],
        )
        diags = validate_portnet(o)
        assert {"LP-COND-2", "OPN-MIXED"} <= codes(diags)
        assert any("t2" in d.nodes for d in diags if d.code == "LP-COND-2")

    def test_same_label_two_places(self):
        o = OpenNet.build(
            ["i", "p", "f"], {"t1": "req", "t2": "req"},
            [("i", "t1"), ("in_a", "t1"), ("t1", "p"), ("p", "t2"), ("in_b", "t2"), ("t2", "f")],
            inputs=["in_a", "in_b"], init=["i"], fin=["f"],
        )
        assert "LP-COND-4" in codes(validate_portnet(o))

    def test_mixed_labels_on_place(self):
        o = OpenNet.build(
            ["i", "p", "f"], {"t1": "a", "t2": "b"},
            [("i", "t1"), ("in_x", "t1"), ("t1", "p"), ("p", "t2"), ("in_x", "t2"), ("t2", "f")],
            inputs=["in_x"], init=["i"], fin=["f"],
        )
        assert "LP-COND-3" in codes(validate_portnet(o))

    def test_not_wfn(self):
        o = OpenNet.build(
            ["i", "p", "f", "z"], {"t1": "a", "t2": "b"},
            [("i", "t1"), ("in_a", "t1"), ("t1", "p"), ("p", "t2"), ("in_b", "t2"), ("t2", "f")],
            inputs=["in_a", "in_b"], init=["i"], fin=["f"],
        )
        assert "LP-COND-1" in codes(validate_portnet(o))

    def test_two_init(self):
        o = OpenNet.build(
            ["i", "j", "f"], {"t1": "a", "t2": "b"},
            [("i", "t1"), ("in_a", "t1"), ("t1", "f"), ("j", "t2"), ("in_b", "t2"), ("t2", "f")],
            inputs=["in_a", "in_b"], init=["i", "j"], fin=["f"],
        )
        assert any(d.code == "LP-COND-1" and "singleton" in d.message for d in validate_portnet(o))

    def test_labeled_portnet_rejects_invalid(self):
        o = OpenNet.build(["i", "f"], {"t": "a"}, [("i", "t"), ("t", "f")], init=["i"], fin=["f"])
        with pytest.raises(PortnetError):
            LabeledPortnet.of(o)

    def test_interface_place_with_preset_rejected(self):
        o = OpenNet.build(
            ["i", "f"], {"t": "a"}, [("i", "t"), ("t", "f"), ("t", "in_a")],
            inputs=["in_a"], init=["i"], fin=["f"],
        )
        assert "OPN-INPUT" in codes(validate_portnet(o))


class TestComposition:
    def test_ping_with_mirror(self):
        s = ping()
        c, _ = derive_full_mirror(s)
        assert composable(s, c) == []
        n = compose([s, c])
        assert not n.inputs and not n.outputs
        assert len(n.places) == 3 + 3 + 2

    def test_disjoint_vacuous(self):
        a = ping()
        b = portnet("x", "y", [("u", "x", "z", "!", "y")])
        assert composable(a, b) == []

    def test_shared_internal_place(self):
        a = ping()
        b = portnet("i", "g", [("u", "i", "z", "!", "g")])
        assert "COMP-SHARED" in codes(composable(a, b))
        with pytest.raises(CompositionError):
            compose([a, b])

    def test_singleton(self):
        s = ping()
        assert compose([s]) is s

    def test_empty(self):
        with pytest.raises(CompositionError):
            compose([])

    def test_not_associative(self):
        def one(p0, p1, t, x_in):
            return OpenNet.build([p0, p1], {t: "x"}, [(p0, t), ("x", t) if x_in else (t, "x"), (t, p1)],
                                 inputs=["x"] if x_in else [], outputs=[] if x_in else ["x"],
                                 init=[p0], fin=[p1])

        a, b, c = one("a0", "a1", "ta", True), one("b0", "b1", "tb", False), one("c0", "c1", "tc", True)
        flat = compose([a, b, c])
        assert "x" in flat.places and not flat.interface
        bc = compose([b, c])
        assert "x" in bc.places
        with pytest.raises(CompositionError):
            compose([a, bc])

    def test_output_invariants(self):
        s = race()
        c, _ = derive_full_mirror(s)
        n = compose([s, c])
        assert all(not n.preset(x) for x in n.inputs)
        assert all(not n.postset(x) for x in n.outputs)
