"""Process terms, their concrete text syntax, and recursive specifications.

Terms are hash-consed: constructing a node whose fields are identical to a
live node returns that node, so equality is identity and hashing is cheap.
This matters because the semantics memoizes per node and explored state
spaces share almost all of their subterms.

Concrete syntax (loosest to tightest)::

    P ::= P + P            alternative, left associative
        | P ; P            sequential composition, right associative
        | a.P              action prefix
        | P*               iteration (postfix)
        | 0 | 1 | a | X | (P) | nest(P, P) | [P || P]{c, d}

A bare action ``a`` in term position abbreviates ``a.1``.  Actions are
``tau``, plain identifiers, ``c!d`` (send) and ``c?d`` (receive).  An
identifier is read as a process name when it is defined in the enclosing
specification or starts with an upper-case letter.
"""

from __future__ import annotations

import re
import weakref
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import (
    DuplicateDefinition,
    NotGnf,
    ReservedWord,
    SpecSyntaxError,
    UndefinedName,
)

__all__ = [
    "Action", "TAU", "act", "send", "recv",
    "Expr", "Zero", "One", "Prefix", "Seq", "Alt", "Par", "Name", "Star", "Nesting",
    "ZERO", "ONE", "alt_of", "seq_of",
    "parse_action", "parse_process", "parse_spec", "pretty",
    "RecSpec", "Program", "GnfSpec", "GuardReport",
    "check_guarded", "validate_gnf", "terminating_names", "names_in",
]

RESERVED = frozenset({"tau", "nest", "0", "1"})
BLANK = "_"


# -- actions -----------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Action:
    """An action label: ``tau``, a plain name, or a send/receive on a channel."""

    kind: str  # "tau" | "plain" | "send" | "recv"
    name: str = ""
    datum: str = ""

    def __post_init__(self):
        if self.kind == "tau":
            if self.name or self.datum:
                raise ValueError("tau carries no name")
        elif self.kind == "plain":
            if not self.name or self.name in RESERVED:
                raise ValueError(f"bad action name {self.name!r}")
        elif self.kind in ("send", "recv"):
            if not self.name or not self.datum or self.name in RESERVED:
                raise ValueError("send/recv need a channel and a datum")
        else:
            raise ValueError(f"unknown action kind {self.kind!r}")

    @property
    def is_tau(self) -> bool:
        return self.kind == "tau"

    @property
    def channel(self) -> str | None:
        return self.name if self.kind in ("send", "recv") else None

    def __str__(self):
        if self.kind == "tau":
            return "tau"
        if self.kind == "plain":
            return self.name
        return f"{self.name}{'!' if self.kind == 'send' else '?'}{self.datum}"

    def __repr__(self):
        return f"Action({str(self)!r})"


TAU = Action("tau")


def act(name: str) -> Action:
    return TAU if name == "tau" else Action("plain", name)


def send(channel: str, datum) -> Action:
    return Action("send", channel, str(datum))


def recv(channel: str, datum) -> Action:
    return Action("recv", channel, str(datum))


# -- terms -------------------------------------------------------------------

_interned: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()


class Expr:
    """Base class of the hash-consed term nodes."""

    __slots__ = ("__weakref__",)
    _fields: tuple[str, ...] = ()

    @classmethod
    def _make(cls, *args):
        key = (cls, *args)
        node = _interned.get(key)
        if node is None:
            node = object.__new__(cls)
            for name, value in zip(cls._fields, args):
                object.__setattr__(node, name, value)
            _interned[key] = node
        return node

    def __setattr__(self, name, value):
        raise AttributeError("process terms are immutable")

    def __reduce__(self):
        return (type(self), tuple(getattr(self, f) for f in self._fields))

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def children(self) -> tuple["Expr", ...]:
        return tuple(getattr(self, f) for f in self._fields if isinstance(getattr(self, f), Expr))

    def __repr__(self):
        inner = ", ".join(repr(getattr(self, f)) for f in self._fields)
        return f"{type(self).__name__}({inner})"

    def __str__(self):
        return pretty(self)


class Zero(Expr):
    __slots__ = ()

    def __new__(cls):
        return cls._make()


class One(Expr):
    __slots__ = ()

    def __new__(cls):
        return cls._make()


class Prefix(Expr):
    __slots__ = ("action", "body")
    _fields = ("action", "body")

    def __new__(cls, action: Action, body: Expr):
        if not isinstance(action, Action) or not isinstance(body, Expr):
            raise TypeError("Prefix(action, body)")
        return cls._make(action, body)


class Seq(Expr):
    __slots__ = ("left", "right")
    _fields = ("left", "right")

    def __new__(cls, left: Expr, right: Expr):
        if not isinstance(left, Expr) or not isinstance(right, Expr):
            raise TypeError("Seq(left, right)")
        return cls._make(left, right)


class Alt(Expr):
    __slots__ = ("left", "right")
    _fields = ("left", "right")

    def __new__(cls, left: Expr, right: Expr):
        if not isinstance(left, Expr) or not isinstance(right, Expr):
            raise TypeError("Alt(left, right)")
        return cls._make(left, right)


class Par(Expr):
    __slots__ = ("left", "right", "channels")
    _fields = ("left", "right", "channels")

    def __new__(cls, left: Expr, right: Expr, channels: Iterable[str] = ()):
        if not isinstance(left, Expr) or not isinstance(right, Expr):
            raise TypeError("Par(left, right, channels)")
        return cls._make(left, right, frozenset(channels))


class Name(Expr):
    __slots__ = ("name",)
    _fields = ("name",)

    def __new__(cls, name: str):
        return cls._make(str(name))


class Star(Expr):
    __slots__ = ("body",)
    _fields = ("body",)

    def __new__(cls, body: Expr):
        if not isinstance(body, Expr):
            raise TypeError("Star(body)")
        return cls._make(body)


class Nesting(Expr):
    __slots__ = ("left", "right")
    _fields = ("left", "right")

    def __new__(cls, left: Expr, right: Expr):
        if not isinstance(left, Expr) or not isinstance(right, Expr):
            raise TypeError("Nesting(left, right)")
        return cls._make(left, right)


ZERO = Zero()
ONE = One()


def alt_of(terms: Iterable[Expr]) -> Expr:
    """Left-nested sum; the empty sum is 0."""
    out = None
    for t in terms:
        out = t if out is None else Alt(out, t)
    return ZERO if out is None else out


def seq_of(terms: Iterable[Expr]) -> Expr:
    """Right-nested sequential composition; the empty sequence is 1."""
    items = list(terms)
    if not items:
        return ONE
    out = items[-1]
    for t in reversed(items[:-1]):
        out = Seq(t, out)
    return out


def names_in(e: Expr) -> set[str]:
    seen: set[str] = set()
    stack = [e]
    visited: set[int] = set()
    while stack:
        node = stack.pop()
        if id(node) in visited:
            continue
        visited.add(id(node))
        if isinstance(node, Name):
            seen.add(node.name)
        stack.extend(node.children())
    return seen


# -- pretty printing -----------------------------------------------------------

_SUM, _SEQ, _PRE, _POST = range(4)


def pretty(e: Expr) -> str:
    """Render a term in the concrete syntax with as few parentheses as parsing allows."""
    return _pp(e, _SUM)


def _pp(e: Expr, level: int) -> str:
    if isinstance(e, Zero):
        return "0"
    if isinstance(e, One):
        return "1"
    if isinstance(e, Name):
        return e.name
    if isinstance(e, Prefix):
        if e.body is ONE:
            return str(e.action)
        text = f"{e.action}.{_pp(e.body, _PRE)}"
        return f"({text})" if level > _PRE else text
    if isinstance(e, Alt):
        text = f"{_pp(e.left, _SUM)} + {_pp(e.right, _SEQ)}"
        return f"({text})" if level > _SUM else text
    if isinstance(e, Seq):
        text = f"{_pp(e.left, _PRE)} ; {_pp(e.right, _SEQ)}"
        return f"({text})" if level > _SEQ else text
    if isinstance(e, Star):
        return f"{_pp(e.body, _POST)}*"
    if isinstance(e, Nesting):
        return f"nest({_pp(e.left, _SUM)}, {_pp(e.right, _SUM)})"
    if isinstance(e, Par):
        chans = ",".join(sorted(e.channels))
        return f"[{_pp(e.left, _SUM)} || {_pp(e.right, _SUM)}]{{{chans}}}"
    raise TypeError(f"not a process term: {e!r}")


# -- tokenizer and parser ------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<ident>[A-Za-z_□][A-Za-z0-9_'□]*)"
    r"|(?P<num>[0-9]+)"
    r"|(?P<op>\|\||[+;.*()\[\]{},!?=])"
    r")"
)


@dataclass(slots=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int = 1) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:]
            if not rest.strip():
                break
            col = pos + (len(rest) - len(rest.lstrip())) + 1
            raise SpecSyntaxError(f"unexpected character {text[col - 1]!r}", line, col)
        kind = m.lastgroup
        if kind is None:  # trailing whitespace only
            break
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), line, start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, n + 1))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok], names: frozenset[str]):
        self.toks = toks
        self.i = 0
        self.names = names

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise SpecSyntaxError(message, tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        tok = self.tok
        if tok.text != text or tok.kind == "ident":
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def parse(self) -> Expr:
        e = self.sum()
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")
        return e

    def sum(self) -> Expr:
        e = self.seq()
        while self.at("+"):
            self.i += 1
            e = Alt(e, self.seq())
        return e

    def seq(self) -> Expr:
        left = self.prefix()
        if self.at(";"):
            self.i += 1
            return Seq(left, self.seq())
        return left

    def prefix(self) -> Expr:
        tok = self.tok
        if tok.kind == "ident" and self.peek().text in ("!", "?", "."):
            nxt = self.peek().text
            if nxt == "." and self._is_name(tok.text):
                self.error(f"process name {tok.text!r} cannot prefix a term")
            action = self.action()
            if self.at("."):
                self.i += 1
                return Prefix(action, self.prefix())
            return self.postfix_tail(Prefix(action, ONE))
        return self.postfix()

    def postfix(self) -> Expr:
        return self.postfix_tail(self.atom())

    def postfix_tail(self, e: Expr) -> Expr:
        while self.at("*"):
            self.i += 1
            e = Star(e)
        return e

    def action(self) -> Action:
        tok = self.tok
        if tok.kind != "ident":
            self.error("expected an action")
        self.i += 1
        if self.at("!") or self.at("?"):
            if tok.text in RESERVED:
                raise ReservedWord(f"{tok.text!r} cannot be a channel", tok.line, tok.col)
            kind = "send" if self.tok.text == "!" else "recv"
            self.i += 1
            d = self.tok
            if d.kind not in ("ident", "num"):
                self.error("expected a datum after the channel")
            if d.text in ("tau", "nest"):
                raise ReservedWord(f"{d.text!r} cannot be a datum", d.line, d.col)
            self.i += 1
            return Action(kind, tok.text, d.text)
        if tok.text == "tau":
            return TAU
        if tok.text == "nest":
            raise ReservedWord("'nest' cannot be an action", tok.line, tok.col)
        return act(tok.text)

    def _is_name(self, ident: str) -> bool:
        return ident in self.names or ident[0].isupper()

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            if tok.text == "0":
                return ZERO
            if tok.text == "1":
                return ONE
            self.error(f"numeral {tok.text!r} is not a process")
        if tok.kind == "op":
            if tok.text == "(":
                self.i += 1
                e = self.sum()
                self.expect(")")
                return e
            if tok.text == "[":
                self.i += 1
                left = self.sum()
                self.expect("||")
                right = self.sum()
                self.expect("]")
                self.expect("{")
                chans = []
                while not self.at("}"):
                    c = self.tok
                    if c.kind != "ident":
                        self.error("expected a channel name")
                    if c.text in RESERVED:
                        raise ReservedWord(f"{c.text!r} cannot be a channel", c.line, c.col)
                    chans.append(c.text)
                    self.i += 1
                    if not self.at("}"):
                        self.expect(",")
                self.expect("}")
                return Par(left, right, chans)
            self.error(f"unexpected {tok.text!r}")
        if tok.kind == "ident":
            if tok.text == "nest" and self.peek().text == "(":
                self.i += 2
                left = self.sum()
                self.expect(",")
                right = self.sum()
                self.expect(")")
                return Nesting(left, right)
            if tok.text == "tau":
                self.i += 1
                return Prefix(TAU, ONE)
            if tok.text == "nest":
                raise ReservedWord("'nest' must be followed by '('", tok.line, tok.col)
            if self._is_name(tok.text):
                self.i += 1
                return Name(tok.text)
            return Prefix(self.action(), ONE)
        self.error("unexpected end of input")


def parse_action(text: str) -> Action:
    p = _Parser(_tokenize(text), frozenset())
    a = p.action()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    return a


def parse_process(text: str, names: Iterable[str] = ()) -> Expr:
    """Parse one term.  ``names`` lists identifiers to read as process names."""
    return _Parser(_tokenize(text), frozenset(names)).parse()


# -- specifications ------------------------------------------------------------

class RecSpec(Mapping[str, Expr]):
    """An immutable, ordered set of defining equations ``Name = term``."""

    __slots__ = ("_eqs",)

    def __init__(self, equations: Mapping[str, Expr] | Iterable[tuple[str, Expr]] = (), *, check: bool = True):
        items = list(equations.items()) if isinstance(equations, Mapping) else list(equations)
        eqs: dict[str, Expr] = {}
        for name, body in items:
            if name in eqs:
                raise DuplicateDefinition(f"{name} is defined twice")
            if name in RESERVED:
                raise ReservedWord(f"{name!r} cannot be defined")
            eqs[name] = body
        object.__setattr__(self, "_eqs", eqs)
        if check:
            for name, body in eqs.items():
                missing = sorted(names_in(body) - eqs.keys())
                if missing:
                    raise UndefinedName(f"{missing[0]} (used in {name}) has no defining equation")

    def __setattr__(self, name, value):
        raise AttributeError("RecSpec is immutable")

    def __getitem__(self, name: str) -> Expr:
        try:
            return self._eqs[name]
        except KeyError:
            raise UndefinedName(f"{name} has no defining equation") from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._eqs)

    def __len__(self) -> int:
        return len(self._eqs)

    def __contains__(self, name) -> bool:
        return name in self._eqs

    def __hash__(self):
        return hash(tuple((k, id(v)) for k, v in self._eqs.items()))

    def __eq__(self, other):
        if not isinstance(other, RecSpec):
            return NotImplemented
        return list(self._eqs.items()) == list(other._eqs.items())

    def merge(self, other: "RecSpec") -> "RecSpec":
        clash = set(self) & set(other)
        for n in clash:
            if self[n] is not other[n]:
                raise DuplicateDefinition(f"{n} is defined differently in both specifications")
        return RecSpec([*self._eqs.items(), *((k, v) for k, v in other.items() if k not in clash)])

    def to_text(self) -> str:
        return "".join(f"{k} = {pretty(v)}\n" for k, v in self._eqs.items())

    def __repr__(self):
        return f"RecSpec({self._eqs!r})"


EMPTY_SPEC = RecSpec()


@dataclass(frozen=True)
class Program:
    """A term together with the equations for the names it mentions."""

    term: Expr
    env: RecSpec = EMPTY_SPEC


def parse_spec(text: str) -> RecSpec:
    """Parse ``Name = term`` lines; ``#`` starts a comment."""
    lines: list[tuple[int, str, str, int]] = []
    defined: list[str] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            col = len(line) - len(line.lstrip()) + 1
            raise SpecSyntaxError("expected 'Name = term'", lineno, col)
        lhs, rhs = line.split("=", 1)
        name = lhs.strip()
        col = len(lhs) - len(lhs.lstrip()) + 1
        if name in RESERVED:
            raise ReservedWord(f"{name!r} cannot be defined", lineno, col)
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", name):
            raise SpecSyntaxError(f"bad process name {name!r}", lineno, col)
        if name in seen:
            raise DuplicateDefinition(f"{name} is defined twice (line {lineno})")
        seen.add(name)
        defined.append(name)
        lines.append((lineno, name, rhs, len(lhs) + 1))
    names = frozenset(defined)
    eqs = []
    for lineno, name, rhs, offset in lines:
        toks = _tokenize(rhs, lineno)
        for t in toks:
            t.col += offset
        eqs.append((name, _Parser(toks, names).parse()))
    return RecSpec(eqs)


# -- termination and guardedness ---------------------------------------------------

def terminating_names(spec: Mapping[str, Expr]) -> dict[str, bool]:
    """Least fixpoint of the termination predicate over all defined names.

    Computing it as a fixpoint (rather than by unfolding) keeps it total on
    specifications whose names refer to each other through terminating positions.
    """
    table = {n: False for n in spec}
    changed = True
    while changed:
        changed = False
        for n, body in spec.items():
            if not table[n] and _term(body, table, {}):
                table[n] = True
                changed = True
    return table


def _term(e: Expr, table: Mapping[str, bool], memo: dict) -> bool:
    key = e
    hit = memo.get(key)
    if hit is not None:
        return hit
    if isinstance(e, (One, Star)):
        r = True
    elif isinstance(e, (Zero, Prefix)):
        r = False
    elif isinstance(e, Alt):
        r = _term(e.left, table, memo) or _term(e.right, table, memo)
    elif isinstance(e, (Seq, Par)):
        r = _term(e.left, table, memo) and _term(e.right, table, memo)
    elif isinstance(e, Nesting):
        r = _term(e.right, table, memo)
    elif isinstance(e, Name):
        if e.name not in table:
            raise UndefinedName(f"{e.name} has no defining equation")
        r = table[e.name]
    else:
        raise TypeError(e)
    memo[key] = r
    return r


def _surely_active(e: Expr) -> bool:
    """True when ``e`` has an outgoing step whatever the names in it stand for."""
    if isinstance(e, Prefix):
        return True
    if isinstance(e, (Alt, Nesting)):
        return _surely_active(e.left) or _surely_active(e.right)
    if isinstance(e, Seq):
        return _surely_active(e.left)
    if isinstance(e, Star):
        return _surely_active(e.body)
    return False


@dataclass(frozen=True)
class GuardReport:
    """Names whose right-hand side exposes a process name outside any prefix.

    ``unguarded`` lists every such name.  ``cyclic`` is the subset that can
    reach itself through exposed positions; only those make the step
    relation ill-defined.  ``note`` records how sequential composition was
    treated, since that part of the analysis is an over-approximation.
    """

    unguarded: tuple[str, ...] = ()
    cyclic: tuple[str, ...] = ()
    exposes: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    note: str = ""

    @property
    def ok(self) -> bool:
        return not self.unguarded


def _exposed(e: Expr, table, revised: bool, out: set[str]) -> None:
    if isinstance(e, Name):
        out.add(e.name)
    elif isinstance(e, (Alt, Nesting, Par)):
        _exposed(e.left, table, revised, out)
        _exposed(e.right, table, revised, out)
    elif isinstance(e, Star):
        _exposed(e.body, table, revised, out)
    elif isinstance(e, Seq):
        _exposed(e.left, table, revised, out)
        if _term(e.left, table, {}) and not (revised and _surely_active(e.left)):
            _exposed(e.right, table, revised, out)


def check_guarded(spec: RecSpec, flavor="revised") -> GuardReport:
    revised = str(getattr(flavor, "value", flavor)) == "revised"
    table = terminating_names(spec)
    exposes: dict[str, tuple[str, ...]] = {}
    for n, body in spec.items():
        out: set[str] = set()
        _exposed(body, table, revised, out)
        exposes[n] = tuple(sorted(out))
    cyclic = []
    for n in spec:
        seen: set[str] = set()
        todo = list(exposes[n])
        while todo:
            m = todo.pop()
            if m in seen:
                continue
            seen.add(m)
            todo.extend(exposes.get(m, ()))
        if n in seen:
            cyclic.append(n)
    note = (
        "the right operand of ';' counts as exposed when the left operand can terminate"
        + (" and is not certain to have a step (names are assumed idle)" if revised else "")
    )
    return GuardReport(
        unguarded=tuple(n for n in spec if exposes[n]),
        cyclic=tuple(cyclic),
        exposes=exposes,
        note=note,
    )


# -- Greibach normal form ---------------------------------------------------------------

@dataclass(frozen=True)
class GnfSpec:
    """Equations ``X = sum_i a_i . xi_i (+ 1)`` with each ``xi_i`` a word of names.

    ``variables[0]`` is the initial name.  ``summands[X]`` lists the pairs
    ``(action, tail)`` in source order.
    """

    variables: tuple[str, ...]
    summands: Mapping[str, tuple[tuple[Action, tuple[str, ...]], ...]]
    has_one: Mapping[str, bool]

    def __post_init__(self):
        vs = set(self.variables)
        if len(vs) != len(self.variables) or not self.variables:
            raise ValueError("variables must be distinct and non-empty")
        for x in self.variables:
            for _, tail in self.summands.get(x, ()):
                for y in tail:
                    if y not in vs:
                        raise UndefinedName(f"{y} (in a tail of {x}) is not a variable")

    @property
    def initial(self) -> str:
        return self.variables[0]

    def to_recspec(self) -> RecSpec:
        eqs = []
        for x in self.variables:
            terms = [Prefix(a, seq_of(Name(y) for y in tail)) for a, tail in self.summands.get(x, ())]
            if self.has_one.get(x, False):
                terms.append(ONE)
            eqs.append((x, alt_of(terms)))
        return RecSpec(eqs)


def _summands(e: Expr) -> list[Expr]:
    if isinstance(e, Alt):
        return _summands(e.left) + _summands(e.right)
    return [e]


def _tail(e: Expr) -> tuple[str, ...] | None:
    if isinstance(e, One):
        return ()
    if isinstance(e, Name):
        return (e.name,)
    if isinstance(e, Seq):
        left, right = _tail(e.left), _tail(e.right)
        if left is None or right is None or not left:
            return None
        return left + right
    return None


def validate_gnf(spec: RecSpec) -> GnfSpec:
    summands: dict[str, tuple] = {}
    has_one: dict[str, bool] = {}
    for x, body in spec.items():
        items = []
        one = False
        for s in _summands(body):
            if isinstance(s, One):
                one = True
            elif isinstance(s, Zero):
                continue
            elif isinstance(s, Prefix) and (tail := _tail(s.body)) is not None:
                items.append((s.action, tail))
            else:
                raise NotGnf(x, pretty(s))
        summands[x] = tuple(items)
        has_one[x] = one
    if not spec:
        raise NotGnf("<empty>", "")
    return GnfSpec(tuple(spec), summands, has_one)
