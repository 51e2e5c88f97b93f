# %% [markdown]
# # Equivalence checking
#
# Strong, branching and divergence-preserving branching bisimilarity, plus
# their rooted variants. Verdicts are `Holds`, `Fails` with a witness trace,
# or `UnknownFrontier` when a truncated exploration cannot settle the question.

# %%
from seqcal import parse_process, parse_spec
from seqcal.equivalence import compare_systems
from seqcal.lts import Limits, explore


def both(left, right, env=None, depth=None):
    names = env.keys() if env else ()
    limits = Limits(50_000, depth)
    return (explore(parse_process(left, names), env, limits=limits),
            explore(parse_process(right, names), env, limits=limits))


# %% [markdown]
# Sequential composition does not distribute over choice.

# %%
print(compare_systems(*both("(a + 1) ; b.1", "a.b.1 + 1;b.1"), "strong"))

# %% [markdown]
# Internal steps are invisible to branching bisimilarity, except at the root
# for the rooted variant, and except for divergence in the
# divergence-preserving variant.

# %%
print("branching      ", compare_systems(*both("a.tau.1", "a.1"), "branching"))
print("rooted dpb     ", compare_systems(*both("tau.a.1", "a.1"), "dpb", rooted=True))
env = parse_spec("D = tau.D + a.1")
print("branching loop ", compare_systems(*both("D", "a.1", env), "branching"))
print("dpb loop       ", compare_systems(*both("D", "a.1", env), "dpb"))

# %% [markdown]
# A truncated infinite system gives an honest `UnknownFrontier`.

# %%
env = parse_spec("X = a.X\nY = a.(Y;Y)")
print(compare_systems(*both("X", "Y", env, depth=4), "dpb"))
