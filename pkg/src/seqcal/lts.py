"""Explicit labelled transition systems and bounded breadth-first exploration.

Anything with an initial state, a successor function and a termination
predicate can be explored: process terms, pushdown configurations, Turing
machine configurations and the lazily generated reference specifications all
go through :func:`explore_source`.  States whose outgoing transitions were not
recorded because a limit was hit carry ``frontier=True``.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Protocol, Sequence

from .errors import LimitZero, SpecSyntaxError
from .semantics import Flavor, Interpreter
from .syntax import Action, Expr, RecSpec, parse_action, pretty

__all__ = [
    "State", "Lts", "Limits", "TransitionSource", "ProcessSource",
    "explore", "explore_source", "disjoint_union",
    "export_aut", "write_aut", "read_aut", "import_aut", "to_dot",
]

DEFAULT_MAX_STATES = 100_000


@dataclass(frozen=True, slots=True)
class State:
    payload: Any
    terminating: bool
    frontier: bool = False


@dataclass(frozen=True, slots=True)
class Limits:
    max_states: int | None = DEFAULT_MAX_STATES
    max_depth: int | None = None

    def __post_init__(self):
        for v in (self.max_states, self.max_depth):
            if v is not None and v <= 0:
                raise LimitZero("exploration limits must be positive")

    @classmethod
    def from_env(cls, max_states: int | None = None, max_depth: int | None = None) -> "Limits":
        cap = os.environ.get("SEQCAL_MAX_STATES")
        if cap:
            cap_n = int(cap)
            max_states = cap_n if max_states is None else min(max_states, cap_n)
        return cls(DEFAULT_MAX_STATES if max_states is None else max_states, max_depth)


class Lts:
    """States are indexed ``0..n-1``; transitions are ``(src, action, dst)`` triples."""

    __slots__ = ("states", "transitions", "initial", "_succ", "_pred", "depth")

    def __init__(self, states: Sequence[State], transitions: Iterable[tuple[int, Action, int]], initial: int = 0,
                 depth: Sequence[int] | None = None):
        self.states = tuple(states)
        self.transitions = tuple(transitions)
        n = len(self.states)
        if not 0 <= initial < n:
            raise ValueError("initial state out of range")
        for s, _, t in self.transitions:
            if not (0 <= s < n and 0 <= t < n):
                raise ValueError(f"transition ({s}, {t}) out of range")
        self.initial = initial
        self.depth = tuple(depth) if depth is not None else None
        self._succ = None
        self._pred = None

    def __len__(self):
        return len(self.states)

    @property
    def num_transitions(self) -> int:
        return len(self.transitions)

    def succ(self, i: int) -> list[tuple[Action, int]]:
        if self._succ is None:
            table: list[list] = [[] for _ in self.states]
            for s, a, t in self.transitions:
                table[s].append((a, t))
            self._succ = table
        return self._succ[i]

    def pred(self, i: int) -> list[tuple[Action, int]]:
        if self._pred is None:
            table: list[list] = [[] for _ in self.states]
            for s, a, t in self.transitions:
                table[t].append((a, s))
            self._pred = table
        return self._pred[i]

    def terminating(self, i: int) -> bool:
        return self.states[i].terminating

    def frontier(self, i: int) -> bool:
        return self.states[i].frontier

    @property
    def has_frontier(self) -> bool:
        return any(s.frontier for s in self.states)

    def out_degree(self, i: int) -> int:
        return len(self.succ(i))

    def max_out_degree(self) -> int:
        return max((len(self.succ(i)) for i in range(len(self))), default=0)

    def labels(self) -> set[Action]:
        return {a for _, a, _ in self.transitions}

    def erased(self) -> "Lts":
        """The same structure with payloads dropped."""
        return Lts([State(None, s.terminating, s.frontier) for s in self.states], self.transitions, self.initial)

    def closed(self) -> "Lts":
        """Treat the explored part as the whole system: frontier states become plain deadlocks."""
        return Lts([State(s.payload, s.terminating, False) for s in self.states], self.transitions, self.initial,
                   self.depth)

    def structure(self) -> tuple:
        return (
            self.initial,
            tuple((s.terminating, s.frontier) for s in self.states),
            tuple(sorted((s, str(a), t) for s, a, t in self.transitions)),
        )

    def __repr__(self):
        return f"<Lts {len(self.states)} states, {len(self.transitions)} transitions, initial {self.initial}>"


class TransitionSource(Protocol):
    initial: Hashable

    def successors(self, state) -> Iterable[tuple[Action, Hashable]]: ...

    def terminating(self, state) -> bool: ...

    def sort_key(self, state) -> str: ...

    def expandable(self, state) -> bool: ...


class ProcessSource:
    """The transition system of a term: states are terms, steps come from the SOS."""

    def __init__(self, term: Expr, env: RecSpec | None = None, flavor=Flavor.REVISED, *,
                 normalize: bool = False, interpreter: Interpreter | None = None):
        self.interp = interpreter or Interpreter(env, flavor, normalize=normalize)
        self.initial = self.interp.norm(term) if self.interp.normalize else term
        self._keys: dict[Expr, str] = {}

    def successors(self, p):
        return self.interp.step(p)

    def terminating(self, p) -> bool:
        return self.interp.terminates(p)

    def sort_key(self, p) -> str:
        k = self._keys.get(p)
        if k is None:
            k = self._keys[p] = pretty(p)
        return k

    def expandable(self, p) -> bool:
        return True


def explore_source(source, limits: Limits = Limits()) -> Lts:
    """Breadth-first closure from ``source.initial``.

    States at distance at most ``max_depth`` are expanded; their successors
    at distance ``max_depth + 1`` are kept and flagged frontier when they have
    steps.  A state is also left unexpanded (frontier) when expanding it would
    exceed ``max_states`` or when the source declines to expand it.
    """
    index: dict[Hashable, int] = {source.initial: 0}
    payloads = [source.initial]
    depth = [0]
    frontier: dict[int, bool] = {}
    transitions: list[tuple[int, Action, int]] = []
    max_states, max_depth = limits.max_states, limits.max_depth
    head = 0
    sort_key = source.sort_key
    while head < len(payloads):
        i = head
        head += 1
        p = payloads[i]
        steps = source.successors(p)
        if not steps:
            continue
        if (max_depth is not None and depth[i] > max_depth) or not source.expandable(p):
            frontier[i] = True
            continue
        fresh = {t for _, t in steps if t not in index}
        if max_states is not None and len(payloads) + len(fresh) > max_states:
            frontier[i] = True
            continue
        ordered = sorted(steps, key=lambda st: str(st[0]))
        # ties on the label are broken by the printed target, computed only when needed
        out = []
        k = 0
        while k < len(ordered):
            j = k + 1
            label = str(ordered[k][0])
            while j < len(ordered) and str(ordered[j][0]) == label:
                j += 1
            group = ordered[k:j]
            if len(group) > 1:
                group = sorted(group, key=lambda st: sort_key(st[1]))
            out.extend(group)
            k = j
        for a, t in out:
            ti = index.get(t)
            if ti is None:
                ti = index[t] = len(payloads)
                payloads.append(t)
                depth.append(depth[i] + 1)
            transitions.append((i, a, ti))
    states = [State(p, bool(source.terminating(p)), frontier.get(i, False)) for i, p in enumerate(payloads)]
    return Lts(states, transitions, 0, depth)


def explore(p: Expr, env: RecSpec | None = None, flavor=Flavor.REVISED, limits: Limits = Limits(), *,
            normalize: bool = False) -> Lts:
    return explore_source(ProcessSource(p, env, flavor, normalize=normalize), limits)


def disjoint_union(t1: Lts, t2: Lts) -> tuple[Lts, int, int]:
    """Place ``t2`` after ``t1``; payloads are tagged ``(1, p)`` and ``(2, p)``."""
    n = len(t1)
    states = [State((1, s.payload), s.terminating, s.frontier) for s in t1.states]
    states += [State((2, s.payload), s.terminating, s.frontier) for s in t2.states]
    trans = list(t1.transitions) + [(s + n, a, t + n) for s, a, t in t2.transitions]
    depth = None
    if t1.depth is not None and t2.depth is not None:
        depth = list(t1.depth) + list(t2.depth)
    return Lts(states, trans, t1.initial, depth), t1.initial, t2.initial + n


# -- Aldebaran export ---------------------------------------------------------

def write_aut(t: Lts) -> tuple[str, str]:
    """Return the ``.aut`` text and the ``.flags`` sidecar text."""
    lines = [f"des ({t.initial}, {len(t.transitions)}, {len(t.states)})"]
    for s, label, d in sorted((s, str(a), d) for s, a, d in t.transitions):
        lines.append(f'({s}, "{label}", {d})')
    flags = []
    for i, st in enumerate(t.states):
        if st.terminating:
            flags.append(f"term {i}")
        if st.frontier:
            flags.append(f"frontier {i}")
    return "\n".join(lines) + "\n", "".join(f + "\n" for f in flags)


def export_aut(t: Lts, path) -> tuple[str, str]:
    path = os.fspath(path)
    aut, flags = write_aut(t)
    flags_path = path + ".flags"
    with open(path, "w", encoding="utf-8") as f:
        f.write(aut)
    with open(flags_path, "w", encoding="utf-8") as f:
        f.write(flags)
    return path, flags_path


_DES = re.compile(r"des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_EDGE = re.compile(r'\(\s*(\d+)\s*,\s*"([^"]*)"\s*,\s*(\d+)\s*\)\s*$')


def read_aut(aut_text: str, flags_text: str = "") -> Lts:
    lines = [ln for ln in aut_text.splitlines() if ln.strip()]
    if not lines:
        raise SpecSyntaxError("empty .aut file")
    m = _DES.match(lines[0].strip())
    if not m:
        raise SpecSyntaxError("bad des header", 1, 1)
    init, ntrans, nstates = map(int, m.groups())
    trans = []
    for no, ln in enumerate(lines[1:], 2):
        e = _EDGE.match(ln.strip())
        if not e:
            raise SpecSyntaxError(f"bad transition line {ln!r}", no, 1)
        trans.append((int(e.group(1)), parse_action(e.group(2)), int(e.group(3))))
    if len(trans) != ntrans:
        raise SpecSyntaxError(f"header announces {ntrans} transitions, found {len(trans)}")
    term, front = set(), set()
    for no, ln in enumerate(flags_text.splitlines(), 1):
        if not ln.strip():
            continue
        kind, _, idx = ln.partition(" ")
        if kind == "term":
            term.add(int(idx))
        elif kind == "frontier":
            front.add(int(idx))
        else:
            raise SpecSyntaxError(f"bad flags line {ln!r}", no, 1)
    states = [State(None, i in term, i in front) for i in range(nstates)]
    return Lts(states, trans, init)


def import_aut(path) -> Lts:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as f:
        aut = f.read()
    flags = ""
    if os.path.exists(path + ".flags"):
        with open(path + ".flags", encoding="utf-8") as f:
            flags = f.read()
    return read_aut(aut, flags)


def to_dot(t: Lts, label: Callable[[Any], str] | None = None) -> str:
    out = ["digraph lts {", "  rankdir=LR;", '  start [shape=point];', f"  start -> {t.initial};"]
    for i, st in enumerate(t.states):
        shape = "doublecircle" if st.terminating else "circle"
        style = ', style=dashed' if st.frontier else ""
        text = str(i) if label is None else label(st.payload).replace('"', '\\"')
        out.append(f'  {i} [shape={shape}, label="{text}"{style}];')
    for s, a, d in sorted((s, str(a), d) for s, a, d in t.transitions):
        out.append(f'  {s} -> {d} [label="{a}"];')
    out.append("}")
    return "\n".join(out) + "\n"
