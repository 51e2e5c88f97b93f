# %% [markdown]
# # From Greibach normal form to a pushdown automaton
#
# Each control state records which names are on the stack; the deepest copy of
# each name carries a mark so that popping it tells the automaton the name is
# gone.

# %%
from seqcal import parse_spec, validate_gnf
from seqcal.lts import Limits
from seqcal.pda import compile_gnf, idle_names, stack_marking, verify_compile, write_pda

g = validate_gnf(parse_spec(open("data/fig.spec").read()))
print(write_pda(compile_gnf(g)))
print("marking of X Y X:", " ".join(map(str, stack_marking(("X", "Y", "X")))))

# %% [markdown]
# The compiled automaton is compared with the process it came from.

# %%
print(verify_compile(g, Limits(20_000, 10)))

# %% [markdown]
# A name whose only summand is `1` never pops itself. Left on the stack it
# keeps its name in the control state, so the automaton disagrees with the
# process. Erasing such names from pushed words repairs this.

# %%
g2 = validate_gnf(parse_spec("X = a.(Y;Z)\nY = 1\nZ = b.1"))
print("idle names:", sorted(idle_names(g2)))
print("literal   ", verify_compile(g2))
print("erased    ", verify_compile(g2, erase_idle=True))
