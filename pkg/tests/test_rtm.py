import itertools

import pytest

from seqcal import Flavor, Interpreter, Name, act, parse_spec, recv, send
from seqcal.equivalence import compare_systems
from seqcal.errors import ChannelCollision, NonRegularShape, SpecSyntaxError
from seqcal.lts import Limits, ProcessSource, explore, explore_source
from seqcal.rtm import (
    CounterSource, RegularSpec, Rtm, RtmConfig, RtmSource, RtmTransition, StackSource, TapeInstance,
    TapeSource, alphabet, control_expr, counter_discipline, decode_word, encode_word, half_counter_expr,
    halfcounter_relation, halfcounter_up_to, head_left, head_right, read_rtm, regular_from_spec,
    regular_to_tcpn, rtm_step, rtm_to_tcpn, stack_expr, tape_expr, write_rtm,
)
from seqcal.equivalence import check_up_to

A, B, C = act("a"), act("b"), act("c")
WRITER = """\
state s0 initial
state s1
trans s0 _ a 1 R s1
trans s1 _ a 1 R s0
"""


def machine(text=WRITER):
    return read_rtm(text)


def walk(prog, labels, limits=Limits(50_000, 60)):
    """Follow visible labels through tau-closures; return the set of reachable terms."""
    it = Interpreter(prog.env)
    def closure(ps):
        seen, todo = set(ps), list(ps)
        while todo:
            p = todo.pop()
            for a, q in it.step(p):
                if a.is_tau and q not in seen:
                    seen.add(q)
                    todo.append(q)
        return seen
    cur = closure({prog.term})
    for lab in labels:
        cur = closure({q for p in cur for a, q in it.step(p) if str(a) == lab})
    return cur, it


class TestTape:
    def test_head_helpers(self):
        assert head_left(("1", "2")) == TapeInstance(("1", "2"), 1)
        assert head_right(("1", "2")) == TapeInstance(("1", "2"), 0)
        assert head_left(()) == TapeInstance(("_",), 0)
        assert head_right(()) == TapeInstance(("_",), 0)

    def test_instance_parts(self):
        t = TapeInstance(("1", "_", "2"), 1)
        assert (t.left, t.current, t.right) == (("1",), "_", ("2",))
        assert str(t) == "1 [_] 2"
        with pytest.raises(ValueError):
            TapeInstance(("1",), 1)

    def test_alphabet(self):
        assert alphabet(3) == ("_", "1", "2")
        with pytest.raises(ValueError):
            alphabet(["1", "_"])


class TestRtmStep:
    def m(self, move, write="1", read="_"):
        return Rtm(("s", "t"), (RtmTransition("s", read, A, write, move, "t"),), "s", frozenset({"t"}))

    def test_right_move_at_edge(self):
        c = RtmConfig("s", TapeInstance(("_",), 0))
        assert rtm_step(self.m("R"), c) == {(A, RtmConfig("t", TapeInstance(("1", "_"), 1)))}

    def test_left_move_at_edge(self):
        c = RtmConfig("s", TapeInstance(("_",), 0))
        assert rtm_step(self.m("L", write="e"), c) == {(A, RtmConfig("t", TapeInstance(("_", "e"), 0)))}

    def test_inner_moves(self):
        c = RtmConfig("s", TapeInstance(("1", "_", "2"), 1))
        assert rtm_step(self.m("L"), c) == {(A, RtmConfig("t", TapeInstance(("1", "1", "2"), 0)))}
        assert rtm_step(self.m("R"), c) == {(A, RtmConfig("t", TapeInstance(("1", "1", "2"), 2)))}

    def test_no_match(self):
        c = RtmConfig("s", TapeInstance(("2",), 0))
        assert rtm_step(self.m("R"), c) == frozenset()

    def test_bad_move(self):
        with pytest.raises(ValueError):
            RtmTransition("s", "_", A, "1", "S", "t")

    def test_writer_graph(self):
        t = explore_source(RtmSource(machine(), max_cells=4), Limits(None, None))
        assert {str(a) for a in t.labels()} == {"a"}
        assert not any(t.terminating(i) for i in range(len(t)))


class TestEncoding:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_equations(self, n):
        assert encode_word((), n) == 0
        for length in range(1, 5):
            for w in itertools.product(range(1, n + 1), repeat=length):
                assert encode_word(w, n) == w[0] + n * encode_word(w[1:], n)
                assert decode_word(encode_word(w, n), n) == w

    def test_bijective_for_small_values(self):
        words = [w for k in range(4) for w in itertools.product((1, 2), repeat=k)]
        assert sorted(encode_word(w, 2) for w in words) == list(range(len(words)))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            encode_word((3,), 2)


class TestHalfCounter:
    def test_shape(self):
        assert str(half_counter_expr()) == str(half_counter_expr())

    def test_bounded_comparison_never_fails(self):
        ref = explore_source(CounterSource(6), Limits(None, 12))
        imp = explore_source(ProcessSource(half_counter_expr(), normalize=True), Limits(None, 12))
        assert not compare_systems(ref, imp, "dpb").fails

    def test_up_to_relation(self):
        assert halfcounter_up_to(12).holds

    def test_up_to_detects_bad_pair(self):
        t, pairs, where = halfcounter_relation(8)
        bad = (where[("C", 1)], where[half_counter_expr()])
        v = check_up_to(t, pairs + [bad])
        assert v.fails

    def test_revised_discipline(self):
        for k in range(4):
            assert counter_discipline(k).holds

    def test_standard_forgets(self):
        v = counter_discipline(2, Flavor.STANDARD)
        assert v.fails and v.witness == ("a", "a", "b", "c")


class TestRegular:
    def reg(self):
        return regular_from_spec(parse_spec("P = a.P + b.1"))

    def test_from_spec(self):
        r = self.reg()
        assert r.summands["P"] == ((A, "P"), (B, None))
        assert not r.has_one["P"]

    def test_non_regular(self):
        with pytest.raises(NonRegularShape):
            regular_from_spec(parse_spec("P = a.(P;P)"))

    def test_unknown_target(self):
        with pytest.raises(NonRegularShape):
            RegularSpec(("P",), {"P": ((A, "Q"),)})

    def test_channel_collision(self):
        r = regular_from_spec(parse_spec("P = c!x.P"))
        with pytest.raises(ChannelCollision):
            regular_to_tcpn(r)

    def test_encoding_never_fails(self):
        r = self.reg()
        ref = explore(Name("P"), r.to_recspec())
        imp = explore(regular_to_tcpn(r), limits=Limits(20_000, 10), normalize=True)
        assert not compare_systems(ref, imp, "dpb").fails

    def test_data_values(self):
        r = regular_from_spec(parse_spec("P = a.Q\nQ = b.P + c.1"))
        imp = explore(regular_to_tcpn(r), limits=Limits(20_000, 12), normalize=True)
        assert not compare_systems(explore(Name("P"), r.to_recspec()), imp, "dpb").fails

    def test_one_summand(self):
        r = regular_from_spec(parse_spec("P = a.Q + 1\nQ = 1"))
        ref = explore(Name("P"), r.to_recspec())
        imp = explore(regular_to_tcpn(r), limits=Limits(20_000, 12), normalize=True)
        assert not compare_systems(ref, imp, "dpb").fails

    def test_as_printed_terminates_too_early(self):
        r = self.reg()
        ref = explore(Name("P"), r.to_recspec())
        imp = explore(regular_to_tcpn(r, as_printed=True), limits=Limits(20_000, 10), normalize=True)
        assert compare_systems(ref, imp, "dpb").fails


class TestStack:
    def test_push_pop_trace(self):
        prog = stack_expr(2)
        states, it = walk(prog, ["push?1", "push?_", "pop!_", "pop!1", "pop!_"])
        assert states

    def test_wrong_pop_is_impossible(self):
        prog = stack_expr(2)
        states, _ = walk(prog, ["push?1", "pop!_"])
        assert not states

    def test_empty_pop(self):
        states, it = walk(stack_expr(2), ["pop!_"])
        assert states and any(it.terminates(p) for p in states)

    def test_bounded_comparison(self):
        prog = stack_expr(2)
        ref = explore_source(StackSource(2, 1), Limits(None, None))
        imp = explore(prog.term, prog.env, limits=Limits(50_000, 30), normalize=True)
        assert not compare_systems(ref, imp, "dpb").fails

    def test_as_printed_deadlocks(self):
        prog = stack_expr(2, as_printed=True)
        ref = explore_source(StackSource(2, 2), Limits(None, None))
        imp = explore(prog.term, prog.env, limits=Limits(50_000, 40), normalize=True)
        assert compare_systems(ref, imp, "dpb").fails

    def test_channel_collision(self):
        with pytest.raises(ChannelCollision):
            stack_expr(2, push="a1")


class TestTapeProcess:
    def test_read_write_read(self):
        states, _ = walk(tape_expr(2), ["r!_", "w?1", "r!1"])
        assert states
        states, _ = walk(tape_expr(2), ["w?1", "r!_"])
        assert not states

    def test_move_and_return(self):
        states, _ = walk(tape_expr(2), ["w?1", "R?m", "r!_", "L?m", "r!1"])
        assert states

    def test_reference(self):
        t = explore_source(TapeSource(2, 1), Limits(None, None))
        assert {str(a) for a in t.labels()} == {"r!_", "r!1", "w?_", "w?1", "L?m", "R?m"}


class TestControl:
    def test_variables(self):
        reg = control_expr(machine())
        assert reg.initial.startswith("VC_s0")
        assert all(len(s) == 1 for x, s in reg.summands.items() if x.startswith(("VW", "VM")))

    def test_no_finals_no_termination(self):
        reg = control_expr(machine())
        assert not any(reg.has_one.values())

    def test_reserved_channel(self):
        m = read_rtm("state s\ntrans s _ w!x 1 R s\n")
        with pytest.raises(ChannelCollision):
            control_expr(m)

    def test_encoding_term_builds(self):
        prog = rtm_to_tcpn(machine())
        assert prog.env


class TestRtmFormat:
    def test_round_trip(self):
        text = write_rtm(machine())
        assert write_rtm(read_rtm(text)) == text

    def test_default_initial(self):
        m = read_rtm("state p\nstate q final\ntrans p _ tau _ L q  # move\n")
        assert m.initial == "p" and m.finals == {"q"}

    @pytest.mark.parametrize("text, line", [
        ("state p\nstate p\n", 2),
        ("state p\ntrans p _ a 1 S p\n", 2),
        ("state p wobbly\n", 1),
        ("state p\nmove p\n", 2),
    ])
    def test_errors(self, text, line):
        with pytest.raises(SpecSyntaxError) as exc:
            read_rtm(text)
        assert exc.value.line == line

    def test_undeclared_state(self):
        with pytest.raises(SpecSyntaxError):
            read_rtm("state p\ntrans p _ a 1 R q\n")
