"""Random inputs shared by several test modules."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from seqcal.syntax import (
    ONE, ZERO, Alt, GnfSpec, Name, Nesting, Par, Prefix, Seq, Star, TAU, act, recv, send,
)

ACTIONS = [act("a"), act("b"), TAU, send("c", "d"), recv("c", "d")]


def random_gnf(rng: random.Random, max_vars: int = 3, max_summands: int = 2, max_tail: int = 2,
               allow_idle: bool = False) -> GnfSpec:
    """A random GNF specification.

    Every variable gets between one and ``max_summands`` action summands; with
    ``allow_idle`` a variable may instead have none, in which case it gets a
    ``1`` summand.
    """
    names = [f"X{i}" for i in range(rng.randint(1, max_vars))]
    summands, has_one = {}, {}
    for x in names:
        low = 0 if allow_idle else 1
        k = rng.randint(low, max_summands)
        summands[x] = tuple(
            (rng.choice([act("a"), act("b"), act("c")]),
             tuple(rng.choice(names) for _ in range(rng.randint(0, max_tail))))
            for _ in range(k))
        has_one[x] = k == 0 or rng.random() < 0.4
    return GnfSpec(tuple(names), summands, has_one)


def _leaf():
    return st.sampled_from([ZERO, ONE, Name("X"), Name("Y")])


def _extend(children):
    return st.one_of(
        st.builds(Prefix, st.sampled_from(ACTIONS), children),
        st.builds(Seq, children, children),
        st.builds(Alt, children, children),
        st.builds(Star, children),
        st.builds(Nesting, children, children),
        st.builds(lambda l, r, c: Par(l, r, c), children, children,
                  st.frozensets(st.sampled_from(["c", "e"]), max_size=2)),
    )


exprs = st.recursive(_leaf(), _extend, max_leaves=12)

# finite, name-free terms for congruence sampling
closed_exprs = st.recursive(
    st.sampled_from([ZERO, ONE]),
    lambda ch: st.one_of(
        st.builds(Prefix, st.sampled_from([act("a"), act("b"), TAU]), ch),
        st.builds(Seq, ch, ch),
        st.builds(Alt, ch, ch),
    ),
    max_leaves=6,
)
