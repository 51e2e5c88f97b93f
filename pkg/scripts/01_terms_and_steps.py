# %% [markdown]
# # Terms and single steps
#
# Process terms are parsed from text and stepped with the structural rules.
# The revised sequential composition lets the right operand act only once the
# left operand has terminated *and* has nothing left to do.

# %%
from seqcal import Flavor, parse_process, parse_spec, pretty, step, terminates

p = parse_process("(a + 1) ; b.1")
print("term:", pretty(p), "| terminates:", terminates(p))

# %%
for flavor in Flavor:
    moves = sorted(f"{a} -> {pretty(t)}" for a, t in step(p, flavor=flavor))
    print(flavor.name.lower(), moves)

# %% [markdown]
# Recursive names come from a specification of equations.

# %%
env = parse_spec(open("data/fig.spec").read())
for a, t in sorted(step(parse_process("X", env.keys()), env), key=str):
    print(a, "->", pretty(t))

# %% [markdown]
# Iteration and nesting: the half counter counts up with `a`, switches with
# `b`, counts down with `a` and resets with `c`.

# %%
hc = parse_process("(nest(a + 1, b + 1) ; (c + 1))*")
for a, t in sorted(step(hc), key=str):
    print(a, "->", pretty(t))
