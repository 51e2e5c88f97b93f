import random

import pytest

from oracles import random_lts
from seqcal import ONE, Flavor, Name, parse_process, parse_spec
from seqcal.errors import LimitZero, SpecSyntaxError
from seqcal.lts import (
    Limits, Lts, State, disjoint_union, explore, export_aut, import_aut, read_aut, to_dot, write_aut,
)

FIG = parse_spec("X = a.(X;Y) + b.1\nY = c.1 + 1")


class TestExplore:
    def test_single_prefix(self):
        t = explore(parse_process("a.1"))
        assert len(t) == 2 and t.num_transitions == 1
        assert not t.terminating(0) and t.terminating(1)

    def test_zero_is_one_deadlock(self):
        t = explore(parse_process("0"))
        assert len(t) == 1 and t.num_transitions == 0 and not t.has_frontier

    def test_payloads_are_raw_terms(self):
        t = explore(parse_process("a.1"))
        assert t.states[1].payload is ONE

    def test_deterministic(self):
        a = explore(Name("X"), FIG, limits=Limits(None, 5))
        b = explore(Name("X"), FIG, limits=Limits(None, 5))
        assert a.structure() == b.structure()
        assert [s.payload for s in a.states] == [s.payload for s in b.states]

    def test_depth_bound_marks_frontier(self):
        t = explore(Name("X"), FIG, limits=Limits(None, 2))
        assert t.has_frontier
        assert all(t.depth[i] == 3 for i in range(len(t)) if t.frontier(i))

    def test_state_bound(self):
        t = explore(Name("X"), FIG, limits=Limits(10, None))
        assert len(t) <= 10 and t.has_frontier

    def test_finite_system_has_no_frontier(self):
        t = explore(parse_process("(a + 1) ; (b + 1) ; c"))
        assert not t.has_frontier

    def test_limit_zero(self):
        with pytest.raises(LimitZero):
            Limits(0, 3)
        with pytest.raises(LimitZero):
            Limits(10, 0)

    def test_env_cap(self, monkeypatch):
        monkeypatch.setenv("SEQCAL_MAX_STATES", "7")
        assert Limits.from_env().max_states == 7
        assert Limits.from_env(max_states=3).max_states == 3
        monkeypatch.delenv("SEQCAL_MAX_STATES")
        assert Limits.from_env(max_states=None).max_states == 100_000

    @pytest.mark.parametrize("depth", [4, 8, 12])
    def test_revised_degree_bound(self, depth):
        t = explore(Name("X"), FIG, Flavor.REVISED, Limits(None, depth))
        assert t.max_out_degree() == 2

    def test_standard_degree_grows(self):
        degs = [explore(Name("X"), FIG, Flavor.STANDARD, Limits(None, d)).max_out_degree() for d in (4, 6, 8)]
        assert degs == sorted(degs) and degs[0] < degs[-1]


class TestUnion:
    def test_cardinalities(self):
        rng = random.Random(3)
        for _ in range(20):
            t1, t2 = random_lts(rng), random_lts(rng)
            u, i1, i2 = disjoint_union(t1, t2)
            assert len(u) == len(t1) + len(t2)
            assert u.num_transitions == t1.num_transitions + t2.num_transitions
            assert (i1, i2) == (t1.initial, len(t1) + t2.initial)
            assert all(u.terminating(len(t1) + i) == t2.terminating(i) for i in range(len(t2)))


class TestAut:
    def test_header_and_order(self):
        aut, flags = write_aut(explore(parse_process("(a + 1) ; b")))
        assert aut.splitlines()[0] == "des (0, 2, 3)"
        assert flags.splitlines() == ["term 2"]

    def test_empty_process(self):
        aut, flags = write_aut(explore(parse_process("0")))
        assert aut == "des (0, 0, 1)\n" and flags == ""

    def test_round_trip_bit_exact(self):
        rng = random.Random(11)
        for _ in range(50):
            t = random_lts(rng, labels=("a", "b", "tau", "c!d", "c?d"))
            aut, flags = write_aut(t)
            back = read_aut(aut, flags)
            assert write_aut(back) == (aut, flags)
            assert back.structure() == t.erased().structure()

    def test_frontier_flags_survive(self, tmp_path):
        t = explore(Name("X"), FIG, limits=Limits(None, 3))
        path, _ = export_aut(t, tmp_path / "x.aut")
        back = import_aut(path)
        assert back.structure() == t.structure()

    @pytest.mark.parametrize("text", ["", "des (0, 1, 1)\n", "des (0, 1, 2)\n(0 \"a\" 1)\n", "hello\n"])
    def test_malformed(self, text):
        with pytest.raises(SpecSyntaxError):
            read_aut(text)

    def test_bad_flags(self):
        with pytest.raises(SpecSyntaxError):
            read_aut("des (0, 0, 1)\n", "final 0\n")


class TestLtsObject:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Lts([State(None, False)], [(0, None, 1)])

    def test_closed_drops_frontier(self):
        t = explore(Name("X"), FIG, limits=Limits(None, 2))
        assert not t.closed().has_frontier


def test_dot():
    dot = to_dot(explore(parse_process("a.1")), label=str)
    assert dot.startswith("digraph lts {")
    assert "doublecircle" in dot
    assert '0 -> 1 [label="a"];' in dot
