# %% [markdown]
# # Counters, stacks and tapes from sequential composition
#
# The half counter is a single iterated term. Two of them plus a finite
# controller give a stack, and two stacks give a tape.

# %%
from seqcal import Flavor
from seqcal.equivalence import compare_systems
from seqcal.lts import Limits, ProcessSource, explore, explore_source
from seqcal import rtm

hc = rtm.half_counter_expr()
ref = explore_source(rtm.CounterSource(6), Limits(None, 12))
imp = explore_source(ProcessSource(hc, normalize=True), Limits(None, 12))
print("half counter vs counter:", compare_systems(ref, imp, "dpb"))
print("up-to relation         :", rtm.halfcounter_up_to(12))

# %% [markdown]
# Under the standard rules the counter forgets how far it counted.

# %%
print("revised :", rtm.counter_discipline(2))
print("standard:", rtm.counter_discipline(2, Flavor.STANDARD))

# %% [markdown]
# Stack contents `d_k σ` are held as the number `k + N·<σ>`.

# %%
print([rtm.encode_word(w, 2) for w in [(), (1,), (2,), (1, 1), (2, 1), (1, 2)]])

# %%
stack = rtm.stack_expr(2)
ref = explore_source(rtm.StackSource(2, 2), Limits(200_000, 40))
imp = explore(stack.term, stack.env, limits=Limits(200_000, 40), normalize=True)
print(f"stack ({len(imp)} states explored):", compare_systems(ref, imp, "dpb"))

printed = rtm.stack_expr(2, as_printed=True)
imp = explore(printed.term, printed.env, limits=Limits(200_000, 40), normalize=True)
print("stack with iterated shift loops:", compare_systems(ref, imp, "dpb"))
