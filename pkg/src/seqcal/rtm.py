"""Reactive Turing machines and their encoding as a single process term.

The encoding is assembled from four pieces, each usable on its own:

* :func:`half_counter_expr`, a counter that counts up, then back down to zero
* :func:`regular_to_tcpn`, any finite-state process as one closed term
* :func:`stack_expr` built from a regular controller and two half counters
* :func:`tape_expr` built from two stacks

:func:`rtm_to_tcpn` puts a finite control in parallel with the tape.  Each piece
has a matching infinite reference system (``CounterSource``, ``StackSource``,
``TapeSource``, ``RtmSource``) that is generated lazily and cut off at a
caller-chosen size.  States beyond the cut are marked frontier.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .equivalence import FAILS, HOLDS, Verdict, check_up_to, compare_systems
from .errors import ChannelCollision, NonRegularShape, SpecSyntaxError
from .lts import Limits, Lts, ProcessSource, disjoint_union, explore_source
from .semantics import Flavor, Interpreter, normalize
from .syntax import (
    BLANK, ONE, ZERO, Action, Alt, Expr, Name, Nesting, One, Par, Prefix, Program,
    RecSpec, Seq, Star, Zero, act, alt_of, parse_action, recv, send, seq_of,
)

__all__ = [
    "Rtm", "RtmTransition", "TapeInstance", "RtmConfig", "RtmSource",
    "head_left", "head_right", "rtm_step", "read_rtm", "write_rtm",
    "alphabet", "encode_word", "decode_word",
    "half_counter_expr", "CounterSource", "counter_discipline", "halfcounter_relation", "halfcounter_up_to",
    "RegularSpec", "regular_from_spec", "regular_to_tcpn",
    "stack_expr", "StackSource", "tape_expr", "TapeSource",
    "control_expr", "rtm_to_tcpn", "verify_rtm",
]

STACK_CHANNELS = ("a1", "a2", "b1", "b2", "c1", "c2")
TAPE_CHANNELS = ("push1", "pop1", "push2", "pop2")
CONTROL_CHANNELS = ("r", "w", "L", "R")
CONTROL_SYNC = "ctl"


def opt(a: Action) -> Expr:
    """``(a + 1)``, kept literal."""
    return Alt(Prefix(a, ONE), ONE)


def power(p: Expr, n: int) -> Expr:
    return seq_of([p] * n)


def alphabet(symbols: int | Sequence[str]) -> tuple[str, ...]:
    """Tape symbols ``d_1 .. d_N``; ``d_1`` is always the blank."""
    if isinstance(symbols, int):
        if symbols < 1:
            raise ValueError("need at least one symbol")
        return (BLANK,) + tuple(str(k) for k in range(1, symbols))
    out = tuple(symbols)
    if not out or out[0] != BLANK or len(set(out)) != len(out):
        raise ValueError("symbol list must start with the blank and have no repeats")
    return out


# -- word encoding --------------------------------------------------------------------

def encode_word(w: Sequence[int], n: int) -> int:
    """``<ε> = 0``, ``<d_k σ> = k + n·<σ>``; symbols are given by their index ``k`` in ``1..n``."""
    value = 0
    for k in reversed(list(w)):
        if not 1 <= k <= n:
            raise ValueError(f"symbol index {k} outside 1..{n}")
        value = k + n * value
    return value


def decode_word(value: int, n: int) -> tuple[int, ...]:
    if value < 0 or n < 1:
        raise ValueError("value must be non-negative and n positive")
    out = []
    while value:
        k = value % n or n
        out.append(k)
        value = (value - k) // n
    return tuple(out)


# -- machines ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True, order=True)
class RtmTransition:
    src: str
    read: str
    action: Action
    write: str
    move: str
    dst: str

    def __post_init__(self):
        if self.move not in ("L", "R"):
            raise ValueError(f"move must be L or R, not {self.move!r}")


@dataclass(frozen=True)
class Rtm:
    states: tuple[str, ...]
    transitions: tuple[RtmTransition, ...]
    initial: str
    finals: frozenset[str]

    def __post_init__(self):
        known = set(self.states)
        if self.initial not in known:
            raise ValueError(f"initial state {self.initial!r} is not declared")
        for tr in self.transitions:
            if tr.src not in known or tr.dst not in known:
                raise ValueError(f"transition {tr} uses an undeclared state")
        if not self.finals <= known:
            raise ValueError("final states must be declared")

    @property
    def symbols(self) -> tuple[str, ...]:
        used = {BLANK}
        for tr in self.transitions:
            used.update((tr.read, tr.write))
        return (BLANK,) + tuple(sorted(used - {BLANK}))

    def moves(self, s: str, d: str) -> list[RtmTransition]:
        return [tr for tr in self.transitions if tr.src == s and tr.read == d]


@dataclass(frozen=True, slots=True)
class TapeInstance:
    cells: tuple[str, ...]
    head: int

    def __post_init__(self):
        if not 0 <= self.head < len(self.cells):
            raise ValueError("exactly one cell must carry the head")

    @property
    def left(self) -> tuple[str, ...]:
        return self.cells[: self.head]

    @property
    def current(self) -> str:
        return self.cells[self.head]

    @property
    def right(self) -> tuple[str, ...]:
        return self.cells[self.head + 1:]

    def __str__(self):
        return " ".join(f"[{c}]" if i == self.head else c for i, c in enumerate(self.cells))


def head_left(delta: Sequence[str]) -> TapeInstance:
    """Head on the right-most symbol, or on a fresh blank when ``delta`` is empty."""
    delta = tuple(delta)
    return TapeInstance(delta, len(delta) - 1) if delta else TapeInstance((BLANK,), 0)


def head_right(delta: Sequence[str]) -> TapeInstance:
    delta = tuple(delta)
    return TapeInstance(delta, 0) if delta else TapeInstance((BLANK,), 0)


def _join(left: TapeInstance | None, mid: Sequence[str], right: TapeInstance | None) -> TapeInstance:
    cells = (left.cells if left else ()) + tuple(mid) + (right.cells if right else ())
    head = left.head if left else len(mid) + right.head
    return TapeInstance(cells, head)


@dataclass(frozen=True, slots=True)
class RtmConfig:
    state: str
    tape: TapeInstance

    def __str__(self):
        return f"({self.state}, {self.tape})"


def rtm_step(m: Rtm, c: RtmConfig) -> frozenset[tuple[Action, RtmConfig]]:
    tape = c.tape
    out = set()
    for tr in m.moves(c.state, tape.current):
        if tr.move == "L":
            new = _join(head_left(tape.left), (tr.write,) + tape.right, None)
        else:
            new = _join(None, tape.left + (tr.write,), head_right(tape.right))
        out.add((tr.action, RtmConfig(tr.dst, new)))
    return frozenset(out)


class RtmSource:
    """Configuration graph of a machine, starting on a blank tape."""

    def __init__(self, m: Rtm, max_cells: int | None = None):
        self.m = m
        self.max_cells = max_cells
        self.initial = RtmConfig(m.initial, TapeInstance((BLANK,), 0))

    def successors(self, c):
        return rtm_step(self.m, c)

    def terminating(self, c) -> bool:
        return c.state in self.m.finals

    def sort_key(self, c) -> str:
        return str(c)

    def expandable(self, c) -> bool:
        return self.max_cells is None or len(c.tape.cells) <= self.max_cells


def read_rtm(text: str) -> Rtm:
    states: list[str] = []
    finals = set()
    initial = None
    trans = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "state":
                sid = parts[1]
                if sid in states:
                    raise ValueError(f"state {sid} declared twice")
                states.append(sid)
                for flag in parts[2:]:
                    if flag == "final":
                        finals.add(sid)
                    elif flag == "initial":
                        if initial is not None:
                            raise ValueError("more than one initial state")
                        initial = sid
                    else:
                        raise ValueError(f"unknown state flag {flag!r}")
            elif parts[0] == "trans":
                _, s, rd, a, wr, mv, t = parts
                trans.append(RtmTransition(s, rd, parse_action(a), wr, mv, t))
            else:
                raise ValueError(f"unknown record {parts[0]!r}")
        except SpecSyntaxError as exc:
            raise SpecSyntaxError(exc.message, no, 1) from None
        except (ValueError, IndexError) as exc:
            raise SpecSyntaxError(f"bad .rtm line: {exc}", no, 1) from None
    if not states:
        raise SpecSyntaxError("no states declared")
    try:
        return Rtm(tuple(states), tuple(trans), initial or states[0], frozenset(finals))
    except ValueError as exc:
        raise SpecSyntaxError(str(exc)) from None


def write_rtm(m: Rtm) -> str:
    lines = []
    for s in m.states:
        flags = (" final" if s in m.finals else "") + (" initial" if s == m.initial else "")
        lines.append(f"state {s}{flags}")
    for tr in m.transitions:
        lines.append(f"trans {tr.src} {tr.read} {tr.action} {tr.write} {tr.move} {tr.dst}")
    return "\n".join(lines) + "\n"


# -- half counter -----------------------------------------------------------------------

def half_counter_expr(a: Action = act("a"), b: Action = act("b"), c: Action = act("c")) -> Expr:
    return Star(Seq(Nesting(opt(a), opt(b)), opt(c)))


class CounterSource:
    """``C_n = a.C_(n+1) + b.B_n + 1``, ``B_n = a.B_(n-1) + 1``, ``B_0 = c.C_0 + 1``.

    ``C_n`` with ``n >= n_max`` is left unexpanded.
    """

    def __init__(self, n_max: int):
        self.n_max = n_max
        self.initial = ("C", 0)

    def successors(self, s):
        kind, n = s
        if kind == "C":
            return frozenset({(act("a"), ("C", n + 1)), (act("b"), ("B", n))})
        if n:
            return frozenset({(act("a"), ("B", n - 1))})
        return frozenset({(act("c"), ("C", 0))})

    def terminating(self, s) -> bool:
        return True

    def sort_key(self, s) -> str:
        return f"{s[0]}{s[1]}"

    def expandable(self, s) -> bool:
        return s[0] != "C" or s[1] < self.n_max


def _counter_term(kind: str, n: int) -> Expr:
    hc = half_counter_expr()
    tail = [opt(act("a"))] * n + [opt(act("c")), hc]
    if kind == "C":
        if n == 0:
            return hc
        tail = [Nesting(opt(act("a")), opt(act("b")))] + tail
    return normalize(seq_of(tail))


def halfcounter_relation(depth: int = 12) -> tuple[Lts, list[tuple[int, int]], dict]:
    """The counter correspondence on a closed, depth-aligned truncation.

    Both systems are explored to the same depth and then closed, which is
    sound here because the correspondence is a step-for-step isomorphism.
    Returns the union, the relation with its mirror, and a map from
    ``("C", n)`` / ``("B", n)`` or a term to its index in the union.
    """
    limits = Limits(max_states=None, max_depth=depth)
    ref = explore_source(CounterSource(depth + 2), limits).closed()
    imp = explore_source(ProcessSource(half_counter_expr(), normalize=True), limits).closed()
    t, _, off2 = disjoint_union(ref, imp)
    where = {st.payload: i for i, st in enumerate(ref.states)}
    where.update({st.payload: j + off2 for j, st in enumerate(imp.states)})
    pairs = []
    for i, st in enumerate(ref.states):
        j = where.get(_counter_term(*st.payload))
        if j is not None:
            pairs += [(i, j), (j, i)]
    return t, pairs, where


def halfcounter_up_to(depth: int = 12) -> Verdict:
    t, pairs, _ = halfcounter_relation(depth)
    return check_up_to(t, pairs)


def counter_discipline(k: int, flavor=Flavor.REVISED) -> Verdict:
    """After ``a^k b`` the counter must replay exactly ``k`` a-steps before ``c``."""
    interp = Interpreter(None, flavor)
    a, b, c = act("a"), act("b"), act("c")
    layer = {half_counter_expr()}
    for _ in range(k):
        layer = {t for p in layer for x, t in interp.step(p) if x == a}
    for p in sorted(layer, key=str):
        for x, u in sorted(interp.step(p), key=lambda st: str(st[1])):
            if x != b:
                continue
            frontier = {u}
            for i in range(k + 3):
                if i != k and any(y == c for q in frontier for y, _ in interp.step(q)):
                    trace = ("a",) * k + ("b",) + ("a",) * i + ("c",)
                    return Verdict(FAILS, trace, f"c after {i} a-steps instead of {k}")
                if i == k and not any(y == c for q in frontier for y, _ in interp.step(q)):
                    return Verdict(FAILS, ("a",) * k + ("b",) + ("a",) * k, "no c after the replay")
                frontier = {t for q in frontier for y, t in interp.step(q) if y == a}
    return Verdict(HOLDS)


# -- regular processes ------------------------------------------------------------------

@dataclass(frozen=True)
class RegularSpec:
    """``P_i = Σ_j α_ij • P_j + β_i [+ 1]`` with the α, β given as action lists.

    ``summands[X]`` lists ``(action, target)`` where ``target`` is a variable
    or ``None`` for a β-action.
    """

    variables: tuple[str, ...]
    summands: Mapping[str, tuple[tuple[Action, str | None], ...]]
    has_one: Mapping[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        known = set(self.variables)
        for x in self.variables:
            for _, t in self.summands.get(x, ()):
                if t is not None and t not in known:
                    raise NonRegularShape(f"{x} refers to unknown variable {t}")

    @property
    def initial(self) -> str:
        return self.variables[0]

    def actions(self) -> set[Action]:
        return {a for x in self.variables for a, _ in self.summands.get(x, ())}

    def to_recspec(self) -> RecSpec:
        eqs = {}
        for x in self.variables:
            parts = [Prefix(a, Name(t) if t else ONE) for a, t in self.summands.get(x, ())]
            if self.has_one.get(x):
                parts.append(ONE)
            eqs[x] = alt_of(parts)
        return RecSpec(eqs)


def _flat_alt(e: Expr) -> list[Expr]:
    if isinstance(e, Alt):
        return _flat_alt(e.left) + _flat_alt(e.right)
    return [e]


def regular_from_spec(spec: Mapping[str, Expr], initial: str | None = None) -> RegularSpec:
    """Read equations of the form ``a.X + b.1 + 1`` (``a;X`` is accepted too)."""
    names = list(spec)
    if initial is not None:
        names.remove(initial)
        names.insert(0, initial)
    summands, has_one = {}, {}
    for x in names:
        out = []
        has_one[x] = False
        for s in _flat_alt(spec[x]):
            if isinstance(s, Zero):
                continue
            if isinstance(s, One):
                has_one[x] = True
                continue
            if isinstance(s, Seq) and isinstance(s.left, Prefix) and s.left.body is ONE:
                s = Prefix(s.left.action, s.right)
            if isinstance(s, Prefix) and s.body is ONE:
                out.append((s.action, None))
            elif isinstance(s, Prefix) and isinstance(s.body, Name):
                out.append((s.action, s.body.name))
            else:
                raise NonRegularShape(f"summand of {x} is not 'action.Name', 'action.1' or '1'")
        summands[x] = tuple(out)
    return RegularSpec(tuple(names), summands, has_one)


def regular_to_tcpn(reg: RegularSpec, initial: str | None = None, channel: str = "c", *,
                    as_printed: bool = False) -> Expr:
    """The closed term ``[G_i ; M || N]{c}`` for the designated initial variable.

    The hand-over of the next index ``j`` is sent as a plain ``c!j`` (by ``G``
    and by ``O``), so that a state in transit terminates only if its target
    can.  ``as_printed=True`` uses ``(c!j + 1)`` there instead, which makes
    every transit state terminating.

    A variable with a ``1`` summand gets ``+ 1`` in its ``G``; a variable with
    nothing but ``1`` becomes ``(c!0 + 1)``, which drains like a finished β.
    """
    clash = sorted(str(a) for a in reg.actions() if a.channel == channel)
    if clash:
        raise ChannelCollision(f"channel {channel!r} is already used by {', '.join(clash)}")
    index = {x: i for i, x in enumerate(reg.variables, 1)}
    n = len(reg.variables)

    def cs(j):
        return send(channel, str(j))

    def cr(j):
        return recv(channel, str(j))

    def hand_over(j):
        return opt(cs(j)) if as_printed else Prefix(cs(j), ONE)

    def g(x: str) -> Expr:
        by_target: dict[str | None, list[Action]] = {}
        for a, t in reg.summands.get(x, ()):
            by_target.setdefault(t, []).append(a)
        parts = []
        for y in reg.variables:
            if y in by_target:
                parts.append(Seq(alt_of(Prefix(a, ONE) for a in by_target[y]), hand_over(index[y])))
        if None in by_target:
            parts.append(Seq(alt_of(Prefix(a, ONE) for a in by_target[None]), opt(cs(0))))
        if reg.has_one.get(x):
            if not parts:
                return opt(cs(0))
            parts.append(ONE)
        return alt_of(parts)

    q = alt_of([Seq(opt(cr(j)), g(y)) for y, j in index.items()]
               + [Seq(opt(cs(n + 1)), opt(cr(n + 1)))])
    o = alt_of([Seq(opt(cr(j)), hand_over(j) if j <= n else opt(cs(j))) for j in range(1, n + 2)])
    m = Nesting(q, opt(cr(0)))
    nn = Nesting(o, Seq(opt(cr(0)), opt(cs(0))))
    start = initial or reg.initial
    return Par(Seq(g(start), m), nn, frozenset({channel}))


# -- stack --------------------------------------------------------------------------------

def stack_expr(symbols: int | Sequence[str] = 2, push: str = "push", pop: str = "pop", prefix: str = "",
               as_printed: bool = False) -> Program:
    """A stack over ``symbols`` from a regular controller and two half counters.

    The contents ``d_k σ`` live in counter 1 as ``k + N·<σ>``.  With
    ``as_printed=True`` the shift loops use iteration and the test exits skip
    the mode switch of counter 1; that version deadlocks on a second push.
    """
    syms = alphabet(symbols)
    n = len(syms)
    if {push, pop} & set(STACK_CHANNELS) or push == pop:
        raise ChannelCollision(f"interface channels {push}, {pop} clash with the counter channels")

    def x(k):
        return Name(f"{prefix}X{k}")

    def test(k):
        return Name(f"{prefix}Test{k}")

    a1, a2 = opt(recv("a1", "a")), opt(recv("a2", "a"))
    b1, b2 = opt(recv("b1", "b")), opt(recv("b2", "b"))
    c1, c2 = opt(recv("c1", "c")), opt(recv("c2", "c"))
    eqs: dict[str, Expr] = {}
    if as_printed:
        shift12 = seq_of([Star(Seq(a1, a2)), c1, b2])
        nshift21 = seq_of([Star(Seq(a2, power(a1, n))), c2, b1])
        ishift12 = seq_of([Star(Seq(power(a1, n), a2)), c1, b2])
    else:
        shift12, nshift21, ishift12 = (Name(prefix + s) for s in ("Shift12", "NShift21", "IShift12"))
        eqs[shift12.name] = Alt(seq_of([a1, a2, shift12]), Seq(c1, b2))
        eqs[nshift21.name] = Alt(seq_of([a2, power(a1, n), nshift21]), Seq(c2, b1))
        eqs[ishift12.name] = Alt(seq_of([power(a1, n), a2, ishift12]), Seq(c1, b2))

    def push_k(k):
        return seq_of([shift12, power(a1, k), nshift21, x(k)])

    def pop_k(k):
        return seq_of([power(a1, k), ishift12, test(0)])

    eqs[x(0).name] = Star(alt_of(
        [seq_of([opt(recv(push, d)), power(a1, j), b1, x(j)]) for j, d in enumerate(syms, 1)]
        + [Prefix(send(pop, BLANK), ONE)]))
    for k in range(1, n + 1):
        eqs[x(k).name] = alt_of(
            [Seq(opt(recv(push, d)), push_k(j)) for j, d in enumerate(syms, 1)]
            + [Seq(opt(send(pop, syms[k - 1])), pop_k(k))])
    eqs[test(0).name] = Alt(seq_of([a2, a1, test(1)]), Seq(c2, x(0)))
    for i in range(1, n + 1):
        exit_i = Seq(c2, x(i)) if as_printed else seq_of([c2, b1, x(i)])
        eqs[test(i).name] = Alt(seq_of([a2, a1, test(i % n + 1)]), exit_i)

    def counter(j):
        body = Seq(Nesting(opt(send(f"a{j}", "a")), opt(send(f"b{j}", "b"))), opt(send(f"c{j}", "c")))
        return Star(body)

    term = Par(x(0), Par(counter(1), counter(2), frozenset()), frozenset(STACK_CHANNELS))
    return Program(term, RecSpec(eqs))


class StackSource:
    """``S_ε = Σ push?d.S_d + pop!□.S_ε + 1`` and ``S_dδ = pop!d.S_δ + Σ push?e.S_edδ + 1``."""

    def __init__(self, symbols: int | Sequence[str] = 2, max_len: int = 2, push: str = "push", pop: str = "pop"):
        self.syms = alphabet(symbols)
        self.max_len = max_len
        self.push, self.pop = push, pop
        self.initial = ()

    def successors(self, s):
        out = {(recv(self.push, d), (d,) + s) for d in self.syms}
        out.add((send(self.pop, s[0]), s[1:]) if s else (send(self.pop, BLANK), s))
        return frozenset(out)

    def terminating(self, s) -> bool:
        return True

    def sort_key(self, s) -> str:
        return " ".join(s)

    def expandable(self, s) -> bool:
        return len(s) <= self.max_len


# -- tape ----------------------------------------------------------------------------------

def tape_expr(symbols: int | Sequence[str] = 2, prefix: str = "") -> Program:
    """A tape from two stacks; the left stack holds the cells left of the head, nearest on top."""
    syms = alphabet(symbols)
    left = stack_expr(syms, "push1", "pop1", prefix + "S1_")
    right = stack_expr(syms, "push2", "pop2", prefix + "S2_")

    def t(d):
        return Name(f"{prefix}T{syms.index(d) + 1}")

    eqs = {}
    for d in syms:
        move_left = alt_of(seq_of([opt(recv("pop1", e)), opt(send("push2", d)), t(e)]) for e in syms)
        move_right = alt_of(seq_of([opt(recv("pop2", e)), opt(send("push1", d)), t(e)]) for e in syms)
        eqs[t(d).name] = alt_of(
            [Prefix(send("r", d), t(d))]
            + [Prefix(recv("w", e), t(e)) for e in syms]
            + [Prefix(recv("L", "m"), move_left), Prefix(recv("R", "m"), move_right), ONE])
    term = Par(t(BLANK), Par(left.term, right.term, frozenset()), frozenset(TAPE_CHANNELS))
    return Program(term, RecSpec(eqs).merge(left.env).merge(right.env))


class TapeSource:
    """The tape ``T_(δL ď δR)`` with ``r!d``, ``w?e``, ``L?m``, ``R?m`` and ``1``.

    States are ``(δL, d, δR)``; those with more than ``radius`` cells on
    either side are left unexpanded.
    """

    def __init__(self, symbols: int | Sequence[str] = 2, radius: int = 1):
        self.syms = alphabet(symbols)
        self.radius = radius
        self.initial = ((), BLANK, ())

    def successors(self, s):
        lft, d, rgt = s
        out = {(send("r", d), s)}
        out.update((recv("w", e), (lft, e, rgt)) for e in self.syms)
        if lft:
            out.add((recv("L", "m"), (lft[:-1], lft[-1], (d,) + rgt)))
        else:
            out.add((recv("L", "m"), ((), BLANK, (d,) + rgt)))
        if rgt:
            out.add((recv("R", "m"), (lft + (d,), rgt[0], rgt[1:])))
        else:
            out.add((recv("R", "m"), (lft + (d,), BLANK, ())))
        return frozenset(out)

    def terminating(self, s) -> bool:
        return True

    def sort_key(self, s) -> str:
        return f"{''.join(s[0])}[{s[1]}]{''.join(s[2])}"

    def expandable(self, s) -> bool:
        return len(s[0]) <= self.radius and len(s[2]) <= self.radius


# -- finite control ------------------------------------------------------------------------

def _reserved_channels() -> set[str]:
    return set(CONTROL_CHANNELS) | set(TAPE_CHANNELS) | set(STACK_CHANNELS) | {CONTROL_SYNC}


def control_expr(m: Rtm) -> RegularSpec:
    """The finite control as a regular specification over reachable ``(s, d)`` pairs.

    ``C_(s,d) = Σ a.w!e.M!m.Σ_f r?f.C_(t,f) [+ 1]``, split into one variable
    per prefix so that every summand is a single action.
    """
    clash = sorted({str(tr.action) for tr in m.transitions if tr.action.channel in _reserved_channels()})
    if clash:
        raise ChannelCollision(f"machine actions {', '.join(clash)} use channels reserved by the encoding")
    syms = m.symbols
    names: dict[tuple, str] = {}
    summands: dict[str, tuple] = {}
    has_one: dict[str, bool] = {}
    order: list[str] = []
    todo = deque()

    def var(key: tuple) -> str:
        if key not in names:
            names[key] = "_".join(["V" + key[0]] + [str(part) for part in key[1:]])
            order.append(names[key])
            todo.append(key)
        return names[key]

    def c_key(s, d):
        return ("C", s, syms.index(d) + 1)

    var(c_key(m.initial, BLANK))
    while todo:
        key = todo.popleft()
        x = names[key]
        kind = key[0]
        if kind == "C":
            s, d = key[1], syms[key[2] - 1]
            out = []
            for tr in sorted(m.moves(s, d)):
                out.append((tr.action, var(("W", syms.index(tr.write) + 1, tr.move, tr.dst))))
            summands[x] = tuple(out)
            has_one[x] = s in m.finals
        elif kind == "W":
            _, e, mv, t = key
            summands[x] = ((send("w", syms[e - 1]), var(("M", mv, t))),)
        elif kind == "M":
            _, mv, t = key
            summands[x] = ((send(mv, "m"), var(("R", t))),)
        else:
            t = key[1]
            summands[x] = tuple((recv("r", f), var(c_key(t, f))) for f in syms)
    return RegularSpec(tuple(order), summands, has_one)


def rtm_to_tcpn(m: Rtm) -> Program:
    """``[C_(↑,□) || T]{r,w,L,R}`` with the control in closed regular form."""
    control = regular_to_tcpn(control_expr(m), channel=CONTROL_SYNC)
    tape = tape_expr(m.symbols)
    return Program(Par(control, tape.term, frozenset(CONTROL_CHANNELS)), tape.env)


def verify_rtm(m: Rtm, limits: Limits = Limits(max_states=200_000, max_depth=80)) -> Verdict:
    """Bounded divergence-preserving branching comparison of the machine and its encoding."""
    ref = explore_source(RtmSource(m), Limits(max_states=limits.max_states, max_depth=limits.max_depth))
    prog = rtm_to_tcpn(m)
    imp = explore_source(ProcessSource(prog.term, prog.env, normalize=True), limits)
    return compare_systems(ref, imp, "dpb")
