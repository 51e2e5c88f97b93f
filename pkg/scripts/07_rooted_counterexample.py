# %% [markdown]
# # A rooted branching counterexample
#
# `τ.1` and `(τ.1)*` behave alike after the first step, but only the second
# can terminate at once. That difference already separates them at the root,
# and a following `a.1` makes it visible as behaviour.

# %%
from seqcal import Seq, parse_process
from seqcal.equivalence import compare_systems
from seqcal.lts import explore

p1, p2, q = (parse_process(s) for s in ("tau.1", "(tau.1)*", "a.1"))
print("(P1, P2)    ", compare_systems(explore(p1), explore(p2), "dpb", rooted=True))
print("(P1;Q, P2;Q)", compare_systems(explore(Seq(p1, q)), explore(Seq(p2, q)), "dpb", rooted=True))
