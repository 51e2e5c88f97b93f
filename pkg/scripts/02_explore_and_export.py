# %% [markdown]
# # State spaces
#
# Exploration is breadth-first and deterministic. A depth or state bound
# leaves frontier states behind, which are reported as such.

# %%
import tempfile
from pathlib import Path

from seqcal import Flavor, Name, parse_spec
from seqcal.lts import Limits, explore, export_aut, import_aut, to_dot

env = parse_spec(open("data/fig.spec").read())

# %% [markdown]
# Under the standard rules the example branches more with every level; under
# the revised rules no state ever has more than two successors.

# %%
for flavor in Flavor:
    degrees = [explore(Name("X"), env, flavor, Limits(None, d)).max_out_degree() for d in range(1, 13)]
    print(f"{flavor.name.lower():9s}", degrees)

# %% [markdown]
# Export to the Aldebaran format with a `.flags` sidecar for termination and
# frontier marks, and to Graphviz.

# %%
t = explore(Name("X"), env, limits=Limits(None, 3))
with tempfile.TemporaryDirectory() as tmp:
    aut, flags = export_aut(t, Path(tmp) / "fig.aut")
    print(open(aut).read())
    print(open(flags).read())
    back = import_aut(aut)
    print("round trip preserves structure:", back.structure() == t.structure())
print(to_dot(t)[:200], "...")
