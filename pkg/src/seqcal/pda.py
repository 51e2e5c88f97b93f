"""Pushdown automata and the compiler from Greibach normal form.

A control state ``s_D`` records the set ``D`` of names currently on the stack.
Each name's deepest occurrence is marked (written ``X†``), so that popping a
marked symbol is exactly the moment its name leaves ``D``.  Accepting states
are those whose names can all terminate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .equivalence import FAILS, Verdict, compare_systems
from .errors import SpecSyntaxError
from .lts import Limits, Lts, explore, explore_source
from .semantics import Flavor, Interpreter
from .syntax import ONE, Action, Expr, GnfSpec, Name, Seq, parse_action

__all__ = [
    "Sym", "Pda", "PdaConfig", "PdaSource",
    "length", "get", "suffset", "stack_marking",
    "compile_gnf", "idle_names", "pda_step", "verify_compile", "flatten",
    "write_pda", "read_pda",
]

MARK = "†"


@dataclass(frozen=True, slots=True, order=True)
class Sym:
    name: str
    marked: bool = False

    def __str__(self):
        return self.name + (MARK if self.marked else "")

    @classmethod
    def parse(cls, text: str) -> "Sym":
        if text.endswith(MARK):
            return cls(text[: -len(MARK)], True)
        return cls(text, False)


@dataclass(frozen=True, slots=True)
class PdaConfig:
    state: frozenset
    stack: tuple[Sym, ...]  # top first

    def __str__(self):
        return f"({_dname(self.state)}, {' '.join(map(str, self.stack)) or 'ε'})"


Transition = tuple[frozenset, Sym, Action, tuple[Sym, ...], frozenset]


def _dname(d: Iterable[str]) -> str:
    return "s{" + ",".join(sorted(d)) + "}"


@dataclass(frozen=True)
class Pda:
    states: tuple[frozenset, ...]
    transitions: tuple[Transition, ...]
    initial_state: frozenset
    initial_symbol: Sym
    accepting: frozenset

    def __post_init__(self):
        index: dict[tuple[frozenset, Sym], list] = {}
        for src, sym, a, push, dst in self.transitions:
            index.setdefault((src, sym), []).append((a, push, dst))
        object.__setattr__(self, "_index", index)

    @property
    def input_alphabet(self) -> frozenset[Action]:
        return frozenset(a for _, _, a, _, _ in self.transitions)

    @property
    def stack_alphabet(self) -> frozenset[Sym]:
        out = {self.initial_symbol}
        for _, sym, _, push, _ in self.transitions:
            out.add(sym)
            out.update(push)
        return frozenset(out)

    def state_id(self, d: frozenset) -> int:
        return self.states.index(d)

    def rules(self, state: frozenset, sym: Sym):
        return self._index.get((state, sym), ())

    @property
    def initial(self) -> PdaConfig:
        return PdaConfig(self.initial_state, (self.initial_symbol,))


# helpers over words of names, 1-indexed as in the construction

def length(xi: Sequence[str]) -> int:
    return len(xi)


def get(xi: Sequence[str], i: int) -> str:
    if not 1 <= i <= len(xi):
        raise IndexError(i)
    return xi[i - 1]


def suffset(xi: Sequence[str], i: int) -> frozenset[str]:
    """Names at positions ``i+1 .. length(xi)``."""
    return frozenset(xi[i:])


def stack_marking(xi: Sequence[str]) -> tuple[Sym, ...]:
    """Mark each position whose name does not occur again further down."""
    return tuple(Sym(x, x not in suffset(xi, k)) for k, x in enumerate(xi, 1))


def _push_word(base: frozenset, xi: Sequence[str]) -> tuple[Sym, ...]:
    return tuple(Sym(x, x not in base and x not in suffset(xi, k)) for k, x in enumerate(xi, 1))


def idle_names(g: GnfSpec) -> frozenset[str]:
    """Names whose only summand is ``1``."""
    return frozenset(x for x in g.variables if g.has_one[x] and not g.summands[x])


def _erase(xi: Sequence[str], idle: frozenset) -> tuple[str, ...]:
    return tuple(x for x in xi if x not in idle)


def compile_gnf(g: GnfSpec, erase_idle: bool = False) -> Pda:
    """Build the automaton restricted to the (state, top symbol) pairs that can occur.

    Which pairs occur is found with the usual summary fixpoint for pushdown
    systems: for every head we record the control states in which its symbol
    can eventually be popped.

    An idle name (only a ``1`` summand) that is pushed above other names
    leaves the automaton stuck, while the process skips it.  With
    ``erase_idle=True`` such names are left out of every pushed word.
    """
    idle = idle_names(g) if erase_idle else frozenset()

    def rules(d: frozenset, sym: Sym):
        base = d - {sym.name} if sym.marked else d
        for a, xi in g.summands[sym.name]:
            xi = _erase(xi, idle)
            yield a, _push_word(base, xi), base | frozenset(xi)

    d0 = frozenset({g.initial})
    z = Sym(g.initial, True)
    heads: dict[tuple[frozenset, Sym], list] = {}
    summary: dict[tuple[frozenset, Sym], set[frozenset]] = {}
    order: list[tuple[frozenset, Sym]] = []

    def add_head(h) -> bool:
        if h in heads:
            return False
        heads[h] = list(rules(*h))
        summary[h] = set()
        order.append(h)
        return True

    add_head((d0, z))
    changed = True
    while changed:
        changed = False
        for h in list(order):
            for _, push, d1 in heads[h]:
                current = {d1}
                for sym in push:
                    after: set[frozenset] = set()
                    for c in sorted(current, key=_dname):
                        if add_head((c, sym)):
                            changed = True
                        after |= summary[(c, sym)]
                    current = after
                before = len(summary[h])
                summary[h] |= current
                if len(summary[h]) != before:
                    changed = True

    states: list[frozenset] = [d0]
    for d, _ in order:
        if d not in states:
            states.append(d)
    for h in order:
        for _, _, d1 in heads[h]:
            if d1 not in states:
                states.append(d1)
    transitions = []
    for h in order:
        for a, push, d1 in heads[h]:
            transitions.append((h[0], h[1], a, push, d1))
    accepting = frozenset(d for d in states if all(g.has_one[x] for x in d))
    return Pda(tuple(states), tuple(transitions), d0, z, accepting)


def pda_step(m: Pda, c: PdaConfig) -> frozenset[tuple[Action, PdaConfig]]:
    if not c.stack:
        return frozenset()
    top, rest = c.stack[0], c.stack[1:]
    return frozenset((a, PdaConfig(dst, push + rest)) for a, push, dst in m.rules(c.state, top))


class PdaSource:
    def __init__(self, m: Pda):
        self.m = m
        self.initial = m.initial

    def successors(self, c: PdaConfig):
        return pda_step(self.m, c)

    def terminating(self, c: PdaConfig) -> bool:
        return c.state in self.m.accepting

    def sort_key(self, c: PdaConfig) -> str:
        return str(c)

    def expandable(self, c) -> bool:
        return True


def flatten(p: Expr) -> tuple[str, ...]:
    """The word of names denoted by a sequential composition of names and 1."""
    if isinstance(p, Name):
        return (p.name,)
    if p is ONE:
        return ()
    if isinstance(p, Seq):
        return flatten(p.left) + flatten(p.right)
    raise ValueError(f"not a word of names: {p}")


def expected_config(p: Expr, idle: frozenset = frozenset()) -> PdaConfig:
    xi = _erase(flatten(p), idle)
    return PdaConfig(suffset(xi, 0), stack_marking(xi))


def _pairing(g: GnfSpec, m: Pda, depth: int, max_pairs: int, idle: frozenset = frozenset()) -> str | None:
    """Walk the process and the automaton in lock step; report the first broken pair."""
    interp = Interpreter(g.to_recspec(), Flavor.REVISED)
    start = (Name(g.initial), m.initial)
    seen = {start}
    todo = deque([(start, 0)])
    while todo:
        (p, c), k = todo.popleft()
        want = expected_config(p, idle)
        if c != want:
            return f"term {p} paired with {c}, expected {want}"
        if k >= depth:
            continue
        psteps = interp.step(p)
        csteps = pda_step(m, c)
        for a, p1 in psteps:
            c1 = expected_config(p1, idle)
            if (a, c1) not in csteps:
                return f"{a}-step of {p} to {p1} has no automaton partner {c1}"
            if (p1, c1) not in seen and len(seen) < max_pairs:
                seen.add((p1, c1))
                todo.append(((p1, c1), k + 1))
        for a, c1 in csteps:
            if not any(b == a and expected_config(p1, idle) == c1 for b, p1 in psteps):
                return f"automaton step {a} to {c1} from {c} has no process partner"
        if interp.terminates(p) != (c.state in m.accepting):
            return f"termination differs between {p} and {c}"
    return None


def verify_compile(g: GnfSpec, limits: Limits = Limits(max_states=20_000, max_depth=10), *,
                   erase_idle: bool = False) -> Verdict:
    """Bounded strong bisimilarity of the process and its automaton, plus the pairing check."""
    m = compile_gnf(g, erase_idle)
    spec = g.to_recspec()
    t1 = explore(Name(g.initial), spec, Flavor.REVISED, limits)
    t2 = explore_source(PdaSource(m), limits)
    verdict = compare_systems(t1, t2, "strong")
    if verdict.fails:
        return verdict
    # an idle initial name has no steps, so it never reappears after the start
    idle = idle_names(g) - {g.initial} if erase_idle else frozenset()
    broken = _pairing(g, m, limits.max_depth or 10, limits.max_states or 20_000, idle)
    if broken:
        return Verdict(FAILS, (), f"pairing invariant broken: {broken}")
    return verdict


# -- text format ----------------------------------------------------------------------

def write_pda(m: Pda) -> str:
    ids = {d: i for i, d in enumerate(m.states)}
    lines = []
    for d in m.states:
        acc = " accepting" if d in m.accepting else ""
        lines.append(f"state {ids[d]} D={{{','.join(sorted(d))}}}{acc}")
    lines.append(f"init {ids[m.initial_state]} {m.initial_symbol}")
    for src, sym, a, push, dst in sorted(
        m.transitions, key=lambda tr: (ids[tr[0]], str(tr[1]), str(tr[2]), tuple(map(str, tr[3])), ids[tr[4]])
    ):
        word = ",".join(map(str, push)) if push else "-"
        lines.append(f"trans {ids[src]} {sym} {a} {word} {ids[dst]}")
    return "\n".join(lines) + "\n"


def read_pda(text: str) -> Pda:
    states: dict[int, frozenset] = {}
    order: list[frozenset] = []
    accepting = set()
    init = None
    trans = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "state":
                sid = int(parts[1])
                if not parts[2].startswith("D={") or not parts[2].endswith("}"):
                    raise ValueError("bad D")
                inner = parts[2][3:-1]
                d = frozenset(x for x in inner.split(",") if x)
                states[sid] = d
                order.append(d)
                if len(parts) > 3:
                    if parts[3:] != ["accepting"]:
                        raise ValueError("unexpected trailing field")
                    accepting.add(d)
            elif parts[0] == "init":
                init = (int(parts[1]), Sym.parse(parts[2]))
            elif parts[0] == "trans":
                _, s, sym, a, word, t = parts
                push = () if word == "-" else tuple(Sym.parse(w) for w in word.split(","))
                trans.append((int(s), Sym.parse(sym), parse_action(a), push, int(t)))
            else:
                raise ValueError(f"unknown record {parts[0]!r}")
        except (ValueError, IndexError, KeyError) as exc:
            raise SpecSyntaxError(f"bad .pda line: {exc}", no, 1) from None
    if init is None:
        raise SpecSyntaxError("missing init line")
    try:
        transitions = tuple((states[s], sym, a, push, states[t]) for s, sym, a, push, t in trans)
        return Pda(tuple(order), transitions, states[init[0]], init[1], frozenset(accepting))
    except KeyError as exc:
        raise SpecSyntaxError(f"undeclared state {exc}") from None
