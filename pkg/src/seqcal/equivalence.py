"""Strong, branching and divergence-preserving branching bisimilarity.

Two families of procedures live here.

* Partition refinement on complete (frontier-free) systems: :func:`strong_partition`,
  :func:`branching_bisim`, :func:`divergence_refine`.
* A pair-based greatest fixpoint restricted to the pairs reachable from the two
  states being compared (:func:`compare`).  It is exact on complete systems and
  handles truncated ones twice: once treating frontier states as wildcards (so a
  failure is real) and once excluding them (so success is real).  When the two
  runs disagree the verdict is ``unknown``.

Termination follows the convention used throughout the package: a terminating
state must be matched by a state that can reach termination through internal
steps for branching variants, and by a terminating state for strong
bisimilarity.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import FrontierPresent
from .lts import Lts
from .syntax import Action

__all__ = [
    "Verdict", "Partition",
    "strong_partition", "branching_bisim", "divergence_refine", "dpb_partition",
    "strong_bisim", "compare", "rooted_check", "check_up_to", "compare_systems",
    "HOLDS", "FAILS", "UNKNOWN",
]

HOLDS, FAILS, UNKNOWN = "holds", "fails", "unknown"
EXIT_CODES = {HOLDS: 0, FAILS: 1, UNKNOWN: 2}


@dataclass(frozen=True)
class Verdict:
    result: str
    witness: tuple[str, ...] = ()
    reason: str = ""
    pair: tuple[int, int] | None = None

    @property
    def holds(self) -> bool:
        return self.result == HOLDS

    @property
    def fails(self) -> bool:
        return self.result == FAILS

    @property
    def unknown(self) -> bool:
        return self.result == UNKNOWN

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.result]

    def __str__(self):
        if self.result == HOLDS:
            return "Holds"
        if self.result == UNKNOWN:
            return "UnknownFrontier" + (f" ({self.reason})" if self.reason else "")
        trace = " ".join(self.witness) if self.witness else "<empty trace>"
        return f"Fails: {trace}" + (f" ({self.reason})" if self.reason else "")


@dataclass(frozen=True)
class Partition:
    block_of: tuple[int, ...]
    divergent: tuple[bool, ...] | None = None
    rounds: int = 0

    def same(self, i: int, j: int) -> bool:
        return self.block_of[i] == self.block_of[j]

    @property
    def num_blocks(self) -> int:
        return len(set(self.block_of))

    def blocks(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for i, b in enumerate(self.block_of):
            out.setdefault(b, []).append(i)
        return [out[b] for b in sorted(out)]

    def refines(self, other: "Partition") -> bool:
        """Every block of ``self`` lies inside a block of ``other``."""
        seen: dict[int, int] = {}
        for b, c in zip(self.block_of, other.block_of):
            if seen.setdefault(b, c) != c:
                return False
        return True


def _canonical(keys: Sequence) -> tuple[int, ...]:
    ids: dict = {}
    return tuple(ids.setdefault(k, len(ids)) for k in keys)


def _check_index(t: Lts, *idx: int) -> None:
    for i in idx:
        if not 0 <= i < len(t):
            raise IndexError(f"state {i} out of range")


# -- partition refinement ---------------------------------------------------------

def strong_partition(t: Lts) -> Partition:
    """Coarsest strong bisimulation, by signature refinement from the termination split."""
    n = len(t)
    block = _canonical([(st.terminating, i if st.frontier else -1) for i, st in enumerate(t.states)])
    rounds = 0
    while True:
        sigs = [
            (block[i], frozenset((a, block[j]) for a, j in t.succ(i)))
            for i in range(n)
        ]
        new = _canonical(sigs)
        rounds += 1
        if max(new, default=-1) == max(block, default=-1):
            return Partition(new, rounds=rounds)
        block = new


def _tau_succ(t: Lts) -> list[list[int]]:
    return [[j for a, j in t.succ(i) if a.is_tau] for i in range(len(t))]


def _sccs(nodes: Iterable[int], edges) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components come out in reverse topological order."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(edges(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(edges(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def _can_terminate(t: Lts, tau: list[list[int]], optimistic_frontier: bool = False) -> list[bool]:
    """States that reach a terminating state through internal steps only."""
    n = len(t)
    rev: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in tau[i]:
            rev[j].append(i)
    good = [t.states[i].terminating or (optimistic_frontier and t.states[i].frontier) for i in range(n)]
    todo = [i for i in range(n) if good[i]]
    while todo:
        j = todo.pop()
        for i in rev[j]:
            if not good[i]:
                good[i] = True
                todo.append(i)
    return good


def _branching_refine(t: Lts, block: tuple[int, ...], tau: list[list[int]]) -> tuple[tuple[int, ...], int]:
    n = len(t)
    rounds = 0
    while True:
        rounds += 1
        inert = lambda i: [j for j in tau[i] if block[j] == block[i]]  # noqa: E731
        comps = _sccs(range(n), inert)
        sig: list[frozenset | None] = [None] * n
        for comp in comps:  # successors' components are finished first
            members = set(comp)
            acc: set = set()
            for i in comp:
                for a, j in t.succ(i):
                    if a.is_tau and block[j] == block[i]:
                        if j not in members:
                            acc |= sig[j]
                    else:
                        acc.add((a, block[j]))
            frozen = frozenset(acc)
            for i in comp:
                sig[i] = frozen
        new = _canonical([(block[i], sig[i]) for i in range(n)])
        if max(new, default=-1) == max(block, default=-1):
            return new, rounds
        block = new


def branching_bisim(t: Lts) -> Partition:
    """Coarsest branching bisimulation of a complete system.

    The initial split separates states that can reach termination through
    internal steps from those that cannot; the refinement then uses the usual
    signatures over inert internal paths.
    """
    if t.has_frontier:
        raise FrontierPresent("branching_bisim needs a complete system; use compare() for truncated ones")
    tau = _tau_succ(t)
    canterm = _can_terminate(t, tau)
    block, rounds = _branching_refine(t, _canonical(canterm), tau)
    return Partition(block, rounds=rounds)


def _divergent(t: Lts, block: Sequence[int], tau: list[list[int]]) -> list[bool]:
    """States with an infinite internal path that never leaves their own block."""
    n = len(t)
    inert = lambda i: [j for j in tau[i] if block[j] == block[i]]  # noqa: E731
    div = [False] * n
    for comp in _sccs(range(n), inert):
        if len(comp) > 1 or comp[0] in inert(comp[0]):
            for i in comp:
                div[i] = True
    rev: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in inert(i):
            rev[j].append(i)
    todo = [i for i in range(n) if div[i]]
    while todo:
        j = todo.pop()
        for i in rev[j]:
            if not div[i]:
                div[i] = True
                todo.append(i)
    return div


def divergence_refine(t: Lts, p: Partition) -> Partition:
    """Split a branching partition by divergence and re-refine until stable."""
    if t.has_frontier:
        raise FrontierPresent("divergence_refine needs a complete system")
    tau = _tau_succ(t)
    block = p.block_of
    rounds = p.rounds
    while True:
        div = _divergent(t, block, tau)
        split = _canonical([(block[i], div[i]) for i in range(n)] if (n := len(t)) else [])
        refined, r = _branching_refine(t, split, tau)
        rounds += r
        if max(refined, default=-1) == max(block, default=-1):
            return Partition(refined, tuple(_divergent(t, refined, tau)), rounds)
        block = refined


def dpb_partition(t: Lts) -> Partition:
    return divergence_refine(t, branching_bisim(t))


# -- pair game ---------------------------------------------------------------------

class _PairGame:
    """Greatest fixpoint over the pairs reachable from one root pair.

    ``kind`` is ``strong``, ``branching`` or ``dpb``.  With ``optimistic`` set,
    any pair involving a frontier state is taken to be related and is never
    removed; otherwise such pairs are excluded from the start.
    """

    def __init__(self, t: Lts, kind: str, optimistic: bool):
        self.t = t
        self.kind = kind
        self.optimistic = optimistic
        self.weak = kind != "strong"
        n = len(t)
        self.frontier = [st.frontier for st in t.states]
        self.term = [st.terminating for st in t.states]
        self.tau = _tau_succ(t)
        self.tau_pred: list[list[int]] = [[] for _ in range(n)]
        for i in range(n):
            for j in self.tau[i]:
                self.tau_pred[j].append(i)
        self.canterm = _can_terminate(t, self.tau, optimistic) if self.weak else None
        self.partners: dict[int, set[int]] = {}
        self.reason: dict[tuple[int, int], tuple] = {}

    def wild(self, i: int) -> bool:
        return self.optimistic and self.frontier[i]

    def related(self, x: int, y: int) -> bool:
        if self.optimistic and (self.frontier[x] or self.frontier[y]):
            return True
        ps = self.partners.get(x)
        return ps is not None and y in ps

    def moves(self, x: int, y: int):
        t = self.t
        if self.weak:
            for j in self.tau[x]:
                yield ("tau", x, None), (j, y)
            for j in self.tau[y]:
                yield ("tau", None, y), (x, j)
        by_label: dict[Action, list[int]] = {}
        for a, j in t.succ(y):
            by_label.setdefault(a, []).append(j)
        for a, i in t.succ(x):
            for j in by_label.get(a, ()):
                yield (a, x, y), (i, j)

    def build(self, s1: int, s2: int) -> None:
        seen = {(s1, s2), (s2, s1)}
        todo = deque(seen)
        excluded = lambda x, y: not self.optimistic and (self.frontier[x] or self.frontier[y])  # noqa: E731
        while todo:
            x, y = todo.popleft()
            if excluded(x, y):
                continue
            self.partners.setdefault(x, set()).add(y)
            if self.frontier[x] or self.frontier[y]:
                continue
            for _, (i, j) in self.moves(x, y):
                if (i, j) not in seen:
                    seen.add((i, j))
                    seen.add((j, i))
                    todo.append((i, j))
                    todo.append((j, i))

    # clause checks for "x's behaviour is matched by y"

    def check(self, x: int, y: int):
        if self.frontier[x] or self.frontier[y]:
            return None
        t = self.t
        if self.term[x]:
            if self.weak:
                if not self.canterm[y]:
                    return ("term",)
            elif not self.term[y]:
                return ("term",)
        if not self.weak:
            by_label: dict[Action, list[int]] = {}
            for a, j in t.succ(y):
                by_label.setdefault(a, []).append(j)
            for a, i in t.succ(x):
                if not any(self.related(i, j) for j in by_label.get(a, ())):
                    return ("move", a, i)
            return None
        for a, i in t.succ(x):
            if a.is_tau and self.related(i, y):
                continue
            if not self._weak_match(x, y, a, i):
                return ("move", a, i)
        return None

    def _weak_match(self, x: int, y: int, a: Action, i: int) -> bool:
        seen = {y}
        todo = [y]
        t = self.t
        while todo:
            v = todo.pop()
            if self.wild(v):
                return True
            for b, j in t.succ(v):
                if b == a and self.related(i, j):
                    return True
            for j in self.tau[v]:
                if j not in seen and self.related(x, j):
                    seen.add(j)
                    todo.append(j)
        return False

    def _remove(self, x: int, y: int, reason) -> list[tuple[int, int]]:
        removed = []
        for (p, q), why in (((x, y), reason), ((y, x), ("mirror",))):
            ps = self.partners.get(p)
            if ps is not None and q in ps:
                ps.discard(q)
                removed.append((p, q))
                self.reason.setdefault((p, q), why)
        return removed

    def _affected(self, x: int, y: int):
        t = self.t
        ps = {x}
        ps.update(j for _, j in t.pred(x))
        base = {y}
        base.update(j for _, j in t.pred(y))
        closure = None
        for p in ps:
            cand = self.partners.get(p)
            if not cand:
                continue
            if not self.weak:
                for q in cand:
                    if q in base:
                        yield p, q
                continue
            if closure is None:
                closure = set(base)
                todo = list(base)
                while todo:
                    v = todo.pop()
                    for u in self.tau_pred[v]:
                        if u not in closure:
                            closure.add(u)
                            todo.append(u)
            for q in cand:
                if q in closure:
                    yield p, q

    def solve(self) -> None:
        work = deque((p, q) for p, qs in self.partners.items() for q in qs)
        queued = set(work)
        while True:
            while work:
                p, q = work.popleft()
                queued.discard((p, q))
                if q not in self.partners.get(p, ()):
                    continue
                why = self.check(p, q)
                if why is None:
                    continue
                for x, y in self._remove(p, q, why):
                    for pair in self._affected(x, y):
                        if pair not in queued:
                            queued.add(pair)
                            work.append(pair)
            if self.kind != "dpb":
                return
            bad = self._divergence_violations()
            if not bad:
                return
            for p, q in bad:
                for x, y in self._remove(p, q, ("div",)):
                    for pair in self._affected(x, y):
                        if pair not in queued:
                            queued.add(pair)
                            work.append(pair)

    def _divergence_violations(self) -> list[tuple[int, int]]:
        """Pairs (s, t) where s diverges among t's partners and t cannot follow."""
        if not any(self.tau):
            return []
        # which states lie on or reach an internal cycle at all
        n = len(self.t)
        cyc = [False] * n
        for comp in _sccs(range(n), lambda i: self.tau[i]):
            if len(comp) > 1 or comp[0] in self.tau[comp[0]]:
                for i in comp:
                    cyc[i] = True
        if not any(cyc):
            return []
        by_right: dict[int, set[int]] = {}
        for p, qs in self.partners.items():
            for q in qs:
                by_right.setdefault(q, set()).add(p)
        bad = []
        for t_state, lefts in by_right.items():
            if self.frontier[t_state]:
                continue
            # tau+ successors of t_state
            plus: set[int] = set()
            todo = list(self.tau[t_state])
            reach_wild = False
            while todo:
                v = todo.pop()
                if v in plus:
                    continue
                plus.add(v)
                if self.wild(v):
                    reach_wild = True
                todo.extend(self.tau[v])
            if reach_wild:
                continue
            covered = {p for p in lefts if any(self.related(p, v) for v in plus)}
            y_set = lefts - covered
            if not y_set:
                continue
            inside = lambda i: [j for j in self.tau[i] if j in y_set]  # noqa: E731
            div = set()
            for comp in _sccs(sorted(y_set), inside):
                if len(comp) > 1 or comp[0] in inside(comp[0]):
                    div.update(comp)
            if not div:
                continue
            todo = list(div)
            while todo:
                j = todo.pop()
                for i in self.tau_pred[j]:
                    if i in y_set and i not in div:
                        div.add(i)
                        todo.append(i)
            bad.extend((s, t_state) for s in div)
        return bad

    # witnesses

    def witness(self, s1: int, s2: int) -> tuple[tuple[str, ...], str]:
        """Shortest path through removed pairs to a pair whose failure is local."""
        start = (s1, s2) if self._failed(s1, s2) else (s2, s1)
        parent: dict[tuple[int, int], tuple] = {start: None}
        todo = deque([start])
        best = start
        while todo:
            pair = todo.popleft()
            if self._local(pair):
                best = pair
                break
            x, y = pair
            for (a, *_), nxt in self.moves(x, y):
                for cand in (nxt, nxt[::-1]):
                    if self._failed(*cand) and cand not in parent:
                        parent[cand] = (pair, a)
                        todo.append(cand)
        trace: list[str] = []
        node = best
        while parent[node] is not None:
            prev, a = parent[node]
            if not (self.weak and (a == "tau" or (isinstance(a, Action) and a.is_tau))):
                trace.append(str(a))
            node = prev
        trace.reverse()
        why = self.reason[best]
        if why[0] == "move":
            trace.append(str(why[1]))
            text = f"{why[1]} from state {best[0]} has no match from state {best[1]}"
        elif why[0] == "term":
            text = f"state {best[0]} terminates, state {best[1]} cannot"
        else:
            text = f"state {best[0]} diverges, state {best[1]} cannot"
        return tuple(trace), text

    def _failed(self, x: int, y: int) -> bool:
        why = self.reason.get((x, y))
        return why is not None and why[0] != "mirror"

    def _local(self, pair) -> bool:
        why = self.reason[pair]
        if why[0] != "move":
            return True
        x, y = pair
        a = why[1]
        seen = {y}
        todo = [y]
        while todo:
            v = todo.pop()
            if any(b == a for b, _ in self.t.succ(v)) or self.wild(v):
                return False
            if self.weak:
                for j in self.tau[v]:
                    if j not in seen:
                        seen.add(j)
                        todo.append(j)
        return True


def _game(t: Lts, s1: int, s2: int, kind: str, optimistic: bool) -> _PairGame:
    g = _PairGame(t, kind, optimistic)
    g.build(s1, s2)
    g.solve()
    return g


def compare(t: Lts, s1: int, s2: int, equiv: str = "dpb") -> Verdict:
    """Decide ``s1 ~ s2`` for ``equiv`` in ``strong``, ``branching``, ``dpb``.

    On a truncated system the answer is ``unknown`` unless the frontier
    cannot affect it.
    """
    _check_index(t, s1, s2)
    kind = {"strong": "strong", "branching": "branching", "dpb": "dpb", "divergence": "dpb"}[equiv]
    if s1 == s2:
        return Verdict(HOLDS)
    opt = _game(t, s1, s2, kind, optimistic=True)
    if not opt.related(s1, s2):
        trace, why = opt.witness(s1, s2)
        return Verdict(FAILS, trace, why, (s1, s2))
    if not t.has_frontier:
        return Verdict(HOLDS)
    pess = _game(t, s1, s2, kind, optimistic=False)
    if pess.related(s1, s2):
        return Verdict(HOLDS)
    return Verdict(UNKNOWN, reason="no distinction found before the frontier")


def strong_bisim(t: Lts, s1: int, s2: int) -> Verdict:
    return compare(t, s1, s2, "strong")


def compare_systems(t1: Lts, t2: Lts, equiv: str = "dpb", rooted: bool = False) -> Verdict:
    from .lts import disjoint_union

    u, i1, i2 = disjoint_union(t1, t2)
    if rooted:
        return rooted_compare(u, i1, i2, equiv)
    return compare(u, i1, i2, equiv)


def rooted_check(t: Lts, s1: int, s2: int, p: Partition) -> Verdict:
    """Root condition: initial steps matched exactly into equivalent states, same termination."""
    _check_index(t, s1, s2)
    if t.terminating(s1) != t.terminating(s2):
        who = s1 if t.terminating(s1) else s2
        return Verdict(FAILS, (), f"only state {who} terminates at the root", (s1, s2))
    for x, y in ((s1, s2), (s2, s1)):
        for a, i in t.succ(x):
            if not any(b == a and p.same(i, j) for b, j in t.succ(y)):
                return Verdict(FAILS, (str(a),), f"{a} from state {x} has no rooted match from state {y}", (x, y))
    return Verdict(HOLDS)


def rooted_compare(t: Lts, s1: int, s2: int, equiv: str = "dpb") -> Verdict:
    """Rooted variant of :func:`compare`; on complete systems it uses :func:`rooted_check`."""
    _check_index(t, s1, s2)
    if not t.has_frontier:
        if equiv == "strong":
            return compare(t, s1, s2, "strong")
        p = dpb_partition(t) if equiv == "dpb" else branching_bisim(t)
        return rooted_check(t, s1, s2, p)
    if t.terminating(s1) != t.terminating(s2):
        return Verdict(FAILS, (), "termination differs at the root", (s1, s2))
    verdicts = []
    for x, y in ((s1, s2), (s2, s1)):
        for a, i in t.succ(x):
            best = FAILS
            for b, j in t.succ(y):
                if b != a:
                    continue
                v = compare(t, i, j, equiv)
                if v.holds:
                    best = HOLDS
                    break
                if v.unknown:
                    best = UNKNOWN
            if best == FAILS:
                return Verdict(FAILS, (str(a),), f"{a} from state {x} has no rooted match", (x, y))
            verdicts.append(best)
    if all(v == HOLDS for v in verdicts):
        return Verdict(HOLDS)
    return Verdict(UNKNOWN, reason="root successors undecided before the frontier")


# -- bisimulation up to branching bisimilarity -------------------------------------

def check_up_to(t: Lts, r: Iterable[tuple[int, int]], partition: Partition | None = None) -> Verdict:
    """Check the four clauses of a bisimulation up to branching bisimilarity, literally.

    The relation is not symmetrised.  ``x (≈b∘R) y`` means some ``z`` with
    ``x ≈b z`` and ``z R y``.
    """
    if t.has_frontier:
        raise FrontierPresent("check_up_to needs a complete system")
    pairs = sorted(set(r))
    _check_index(t, *[i for pq in pairs for i in pq])
    p = partition or branching_bisim(t)
    blk = p.block_of
    tau = _tau_succ(t)
    canterm = _can_terminate(t, tau)
    left_blocks: dict[int, set[int]] = {}
    for z, y in pairs:
        left_blocks.setdefault(y, set()).add(blk[z])

    def comp(x: int, y: int) -> bool:
        return blk[x] in left_blocks.get(y, ())

    def inert_closure(s: int) -> list[int]:
        seen = {s}
        todo = [s]
        while todo:
            v = todo.pop()
            for j in tau[v]:
                if j not in seen and blk[j] == blk[s]:
                    seen.add(j)
                    todo.append(j)
        return sorted(seen)

    for s1, s2 in pairs:
        succ2 = t.succ(s2)
        # clause 1
        for u in inert_closure(s1):
            for a, v in t.succ(u):
                if a.is_tau and blk[v] == blk[s1]:
                    continue
                if not (comp(u, s2) and any(b == a and comp(v, w) for b, w in succ2)):
                    return Verdict(FAILS, (str(a),), f"clause 1 fails for pair ({s1}, {s2})", (s1, s2))
        # clause 2
        closure1 = inert_closure(s1)
        for a, w in succ2:
            if not any(b == a and comp(v, w) for u in closure1 for b, v in t.succ(u)):
                return Verdict(FAILS, (str(a),), f"clause 2 fails for pair ({s1}, {s2})", (s1, s2))
        # clauses 3 and 4
        if t.terminating(s1) and not canterm[s2]:
            return Verdict(FAILS, (), f"clause 3 fails for pair ({s1}, {s2})", (s1, s2))
        if t.terminating(s2) and not canterm[s1]:
            return Verdict(FAILS, (), f"clause 4 fails for pair ({s1}, {s2})", (s1, s2))
    return Verdict(HOLDS)
