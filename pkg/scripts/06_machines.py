# %% [markdown]
# # Reactive Turing machines
#
# Machines are read from a small text format, stepped on a blank tape, and
# encoded as a process: a finite control in parallel with a two-stack tape.

# %%
from seqcal import rtm
from seqcal.lts import Limits, explore_source

m = rtm.read_rtm(open("data/three.rtm").read())
t = explore_source(rtm.RtmSource(m), Limits(None, 6))
for s, a, d in t.transitions:
    print(t.states[s].payload, f"-{a}->", t.states[d].payload)

# %% [markdown]
# The encoding, printed as equations:

# %%
prog = rtm.rtm_to_tcpn(rtm.read_rtm(open("data/writer.rtm").read()))
print(len(prog.env), "equations")

# %% [markdown]
# Bounded comparison of each machine with its encoding.

# %%
for name in ("writer", "three"):
    m = rtm.read_rtm(open(f"data/{name}.rtm").read())
    print(name, rtm.verify_rtm(m, Limits(200_000, 80)))
