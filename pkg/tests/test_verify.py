import pytest

import oracles
from conftest import pair_system
from portnets.corpus import loopviol, ping, race
from portnets.foundation import Bag, LabeledNet, NetSystem
from portnets.mirror import derive_full_mirror
from portnets.patterns import unsynchronized_system
from portnets.portnet import skeleton
from portnets.verify import (
    BoundExceeded,
    ContractMisuse,
    ExplorationCaps,
    Inconclusive,
    LinearInvariant,
    StepInfo,
    UnboundedSuspect,
    annotate,
    check_commutation_samples,
    check_linear_invariants,
    check_proper_completion,
    check_weak_termination,
    explore,
    find_deadlocks,
    owner_tags,
    replay,
)


def ping_pair():
    s = ping()
    c, _ = derive_full_mirror(s)
    return s, c, pair_system(s, c)


class TestExplore:
    def test_ping_composition(self):
        _, _, sys_ = ping_pair()
        g = explore(sys_, ExplorationCaps(1000, 4))
        assert (len(g), len(g.edges)) == (5, 4)
        depth, edges = oracles.bfs_depths(sys_.net.transitions, sys_.net.flow, sys_.m0)
        assert len(depth) == 5 and edges == 4
        assert {tuple(sorted(m.items())) for m in g.states} == set(depth)

    def test_ping_skeleton(self):
        assert len(explore(skeleton(ping()).system())) == 3

    def test_state_cap(self):
        _, _, sys_ = ping_pair()
        with pytest.raises(BoundExceeded):
            explore(sys_, ExplorationCaps(2, 4))

    def test_token_cap_reports_place_and_trace(self):
        net = LabeledNet.build(["p", "o"], {"t": "a"}, [("p", "t"), ("t", "p"), ("t", "o")])
        sys_ = NetSystem(net, Bag({"p": 1}), Bag({"p": 1}))
        with pytest.raises(UnboundedSuspect) as e:
            explore(sys_, ExplorationCaps(1000, 3))
        assert e.value.place == "o" and e.value.trace == ["t"] * 4

    def test_caps_positive(self):
        with pytest.raises(ValueError):
            ExplorationCaps(0, 1)

    def test_partial_graph_refuses_verdicts(self):
        _, _, sys_ = ping_pair()
        g = explore(sys_, ExplorationCaps(2, 4), partial=True)
        assert g.truncated
        with pytest.raises(Inconclusive):
            check_weak_termination(g, sys_.mf)

    def test_deterministic(self):
        _, _, sys_ = ping_pair()
        a, b = explore(sys_), explore(sys_)
        assert a.states == b.states and a.edges == b.edges

    def test_edges_consistent_with_firing(self):
        s = race()
        c, _ = derive_full_mirror(s)
        sys_ = pair_system(s, c)
        g = explore(sys_)
        for src, t, dst in g.edges:
            assert replay(NetSystem(sys_.net, g.states[src], sys_.mf), [t]) == g.states[dst]


class TestWeakTermination:
    def test_ping(self):
        _, _, sys_ = ping_pair()
        assert check_weak_termination(explore(sys_), sys_.mf)

    def test_loopviol(self):
        s = loopviol()
        c, _ = derive_full_mirror(s)
        sys_ = pair_system(s, c)
        res = check_weak_termination(explore(sys_), sys_.mf)
        assert not res
        assert replay(sys_, res.trace) == res.bad_state

    def test_empty(self):
        net = LabeledNet.build([], {}, [])
        sys_ = NetSystem(net, Bag(), Bag())
        assert check_weak_termination(explore(sys_), Bag())

    def test_unreachable_final(self):
        _, _, sys_ = ping_pair()
        res = check_weak_termination(explore(sys_), Bag({"p": 1}))
        assert not res and res.trace == ()


class TestDeadlocks:
    def test_ping(self):
        _, _, sys_ = ping_pair()
        assert find_deadlocks(explore(sys_), sys_.mf) == []

    def test_loopviol(self):
        s = loopviol()
        c, _ = derive_full_mirror(s)
        sys_ = pair_system(s, c)
        dead = find_deadlocks(explore(sys_), sys_.mf)
        assert dead
        for d in dead:
            m = replay(sys_, d.trace)
            assert m == d.state and m != sys_.mf
            assert not any(all(m.get(p, 0) for p in sys_.net.preset(t)) for t in sys_.net.transitions)

    def test_unsynchronized_clients(self):
        sys_ = unsynchronized_system(race(), 2)
        dead = find_deadlocks(explore(sys_), sys_.mf)
        assert dead and replay(sys_, dead[0].trace) == dead[0].state


class TestProperCompletion:
    def test_ping(self):
        s, c, sys_ = ping_pair()
        assert check_proper_completion(explore(sys_), ["f", "f_c"])

    def test_leftover_token(self):
        s, c, sys_ = ping_pair()
        base = sys_.net
        net = LabeledNet(base.places | {"spark", "junk"}, base.transitions | {"leak"},
                         base.flow | {("spark", "leak"), ("f", "leak"), ("leak", "f"), ("leak", "junk")},
                         {**base.labeling, "leak": "tau"})
        sys2 = NetSystem(net, sys_.m0 + Bag({"spark": 1}), sys_.mf)
        res = check_proper_completion(explore(sys2), ["f", "f_c"])
        assert not res and res.bad_state.get("junk", 0) + res.bad_state.get("spark", 0) >= 1

    def test_vacuous(self):
        _, _, sys_ = ping_pair()
        assert check_proper_completion(explore(sys_), ["f", "nowhere"])


class TestInvariants:
    def test_violated_at_root(self):
        sk = skeleton(ping())
        (v,) = check_linear_invariants(explore(sk.system()), [LinearInvariant({"i": 1}, "eq", 2)])
        assert not v.ok and v.state == Bag({"i": 1}) and v.trace == ()

    def test_holds(self):
        sk = skeleton(ping())
        inv = LinearInvariant({"i": 1, "p": 1, "f": 1}, "eq", 1)
        assert all(v.ok for v in check_linear_invariants(explore(sk.system()), [inv]))

    def test_needs_terms(self):
        with pytest.raises(ValueError):
            LinearInvariant({}, "eq", 0)


class TestCommutation:
    @pytest.mark.parametrize("make", [ping, race])
    def test_pairs(self, make):
        s = make()
        c, _ = derive_full_mirror(s)
        sys_ = pair_system(s, c)
        g = explore(sys_)
        v = check_commutation_samples(sys_, g, owner_tags({"N": s, "M": c}))
        assert v and v.checked > 0

    def test_mistagged(self):
        s, c, sys_ = ping_pair()
        tags = owner_tags({"N": s, "M": c})
        tags["t2"] = StepInfo("ack", tags["t1"].direction, "N")
        with pytest.raises(ContractMisuse):
            check_commutation_samples(sys_, explore(sys_), tags)


class TestTraces:
    def test_annotate_and_replay(self):
        s, c, sys_ = ping_pair()
        tr = annotate(["t1_c", "t1", "t2", "t2_c"], owner_tags({"Server": s, "Client": c}))
        assert [a.owner for a in tr.annotations] == ["Client", "Server", "Server", "Client"]
        assert replay(sys_, tr.firing) == sys_.mf
