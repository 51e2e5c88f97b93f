"""Structural operational semantics under the standard and revised rules.

The two flavors differ only in when the right operand of ``P ; Q`` may move.
Under the standard rules it may move whenever ``P`` can terminate.  Under the
revised rules ``P`` must additionally have no step of its own, which stops a
terminating-but-active left operand from being skipped.
"""

from __future__ import annotations

import enum
import sys
from typing import Mapping

from .errors import Unguarded, UndefinedName
from .syntax import (
    ONE,
    Action,
    Alt,
    Expr,
    Name,
    Nesting,
    One,
    Par,
    Prefix,
    RecSpec,
    Seq,
    Star,
    Zero,
    _term,
    terminating_names,
)

__all__ = ["Flavor", "Interpreter", "terminates", "step", "normalize", "Step"]

Step = tuple[Action, Expr]


class Flavor(enum.Enum):
    STANDARD = "standard"
    REVISED = "revised"

    @classmethod
    def of(cls, value) -> "Flavor":
        return value if isinstance(value, cls) else cls(str(value).lower())


def _ensure_recursion(limit: int = 20000) -> None:
    # terms produced by nesting grow deep along one spine
    if sys.getrecursionlimit() < limit:
        sys.setrecursionlimit(limit)


class Interpreter:
    """Step and termination oracle for one environment and flavor.

    Results are memoized per (interned) term, so one interpreter should be
    reused for a whole exploration.  With ``normalize=True`` every step
    target is passed through :func:`normalize`.
    """

    def __init__(self, env: Mapping[str, Expr] | None = None, flavor=Flavor.REVISED, *, normalize: bool = False):
        self.env: Mapping[str, Expr] = env if env is not None else RecSpec()
        self.flavor = Flavor.of(flavor)
        self.normalize = normalize
        self._names_term = terminating_names(self.env)
        self._term_memo: dict[Expr, bool] = {}
        self._step_memo: dict[Expr, frozenset[Step]] = {}
        self._active: set[str] = set()
        self._norm_memo: dict[Expr, Expr] = {}
        _ensure_recursion()

    def terminates(self, p: Expr) -> bool:
        return _term(p, self._names_term, self._term_memo)

    def step(self, p: Expr) -> frozenset[Step]:
        hit = self._step_memo.get(p)
        if hit is not None:
            return hit
        out = self._compute(p)
        if self.normalize:
            out = frozenset((a, self.norm(t)) for a, t in out)
        self._step_memo[p] = out
        return out

    def _raw(self, p: Expr) -> frozenset[Step]:
        # steps without normalizing targets; used for subterms
        if not self.normalize:
            return self.step(p)
        key = ("raw", p)
        hit = self._step_memo.get(key)
        if hit is None:
            hit = self._compute(p)
            self._step_memo[key] = hit
        return hit

    def _compute(self, p: Expr) -> frozenset[Step]:
        if isinstance(p, (Zero, One)):
            return frozenset()
        if isinstance(p, Prefix):
            return frozenset({(p.action, p.body)})
        if isinstance(p, Alt):
            return self._raw(p.left) | self._raw(p.right)
        if isinstance(p, Seq):
            left = self._raw(p.left)
            out = {(a, Seq(t, p.right)) for a, t in left}
            if self.terminates(p.left) and (self.flavor is Flavor.STANDARD or not left):
                out.update(self._raw(p.right))
            return frozenset(out)
        if isinstance(p, Star):
            return frozenset((a, Seq(t, p)) for a, t in self._raw(p.body))
        if isinstance(p, Nesting):
            out = {(a, Seq(t, Seq(p, p.left))) for a, t in self._raw(p.left)}
            out.update(self._raw(p.right))
            return frozenset(out)
        if isinstance(p, Par):
            return self._par(p)
        if isinstance(p, Name):
            if p.name not in self.env:
                raise UndefinedName(f"{p.name} has no defining equation")
            if p.name in self._active:
                raise Unguarded(f"{p.name} depends on its own initial steps (unguarded recursion)")
            self._active.add(p.name)
            try:
                return self._raw(self.env[p.name])
            finally:
                self._active.discard(p.name)
        raise TypeError(f"not a process term: {p!r}")

    def _par(self, p: Par) -> frozenset[Step]:
        left, right, chans = self._raw(p.left), self._raw(p.right), p.channels
        out: set[Step] = set()
        for a, t in left:
            if a.channel not in chans:
                out.add((a, Par(t, p.right, chans)))
        for a, t in right:
            if a.channel not in chans:
                out.add((a, Par(p.left, t, chans)))
        if left and right:
            recv_right: dict[tuple[str, str], list[Expr]] = {}
            send_right: dict[tuple[str, str], list[Expr]] = {}
            for a, t in right:
                if a.kind == "recv":
                    recv_right.setdefault((a.name, a.datum), []).append(t)
                elif a.kind == "send":
                    send_right.setdefault((a.name, a.datum), []).append(t)
            tau = Action("tau")
            for a, t in left:
                if a.kind == "send":
                    partners = recv_right.get((a.name, a.datum), ())
                elif a.kind == "recv":
                    partners = send_right.get((a.name, a.datum), ())
                else:
                    continue
                for u in partners:
                    out.add((tau, Par(t, u, chans)))
        return frozenset(out)

    def norm(self, p: Expr) -> Expr:
        hit = self._norm_memo.get(p)
        if hit is None:
            hit = normalize(p, self._norm_memo)
        return hit


def normalize(p: Expr, memo: dict | None = None) -> Expr:
    """Drop literal ``1`` left operands of ``;`` and right-nest ``;`` chains.

    Both rewrites preserve strong bisimilarity under either flavor.
    """
    memo = {} if memo is None else memo
    return _norm(p, memo)


def _norm(p: Expr, memo: dict) -> Expr:
    hit = memo.get(p)
    if hit is not None:
        return hit
    if isinstance(p, Seq):
        left = _norm(p.left, memo)
        right = _norm(p.right, memo)
        r = _seq_norm(left, right)
    elif isinstance(p, Prefix):
        r = Prefix(p.action, _norm(p.body, memo))
    elif isinstance(p, Alt):
        r = Alt(_norm(p.left, memo), _norm(p.right, memo))
    elif isinstance(p, Par):
        r = Par(_norm(p.left, memo), _norm(p.right, memo), p.channels)
    elif isinstance(p, Star):
        r = Star(_norm(p.body, memo))
    elif isinstance(p, Nesting):
        r = Nesting(_norm(p.left, memo), _norm(p.right, memo))
    else:
        r = p
    memo[p] = r
    return r


def _seq_norm(left: Expr, right: Expr) -> Expr:
    # both operands already normal
    if left is ONE:
        return right
    if isinstance(left, Seq):
        return Seq(left.left, _seq_norm(left.right, right))
    return Seq(left, right)


_default: dict[tuple, Interpreter] = {}


def _interp(env, flavor) -> Interpreter:
    env = env if env is not None else RecSpec()
    key = (id(env), Flavor.of(flavor))
    it = _default.get(key)
    if it is None or it.env is not env:
        if len(_default) > 16:
            _default.clear()
        it = _default[key] = Interpreter(env, flavor)
    return it


def terminates(p: Expr, env: Mapping[str, Expr] | None = None) -> bool:
    return _interp(env, Flavor.REVISED).terminates(p)


def step(p: Expr, env: Mapping[str, Expr] | None = None, flavor=Flavor.REVISED) -> frozenset[Step]:
    return _interp(env, flavor).step(p)
