"""Command-line interface: ``seqcal <command> ...``.

Exit codes: 0 holds, 1 fails, 2 unknown because of the exploration frontier,
64 usage error, 65 unreadable input, 70 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

from . import rtm as rtm_mod
from .equivalence import Verdict, compare_systems
from .errors import SeqcalError, SpecSyntaxError, Unguarded
from .lts import Limits, Lts, ProcessSource, explore, explore_source, to_dot, write_aut
from .pda import compile_gnf, verify_compile, write_pda
from .semantics import Flavor, Interpreter
from .syntax import EMPTY_SPEC, Name, Program, RecSpec, check_guarded, parse_process, parse_spec, pretty, validate_gnf

EX_USAGE, EX_DATAERR, EX_SOFTWARE = 64, 65, 70

FIG_SPEC = "X = a.(X ; Y) + b.1\nY = c.1 + 1\n"
WRITER_RTM = "state s initial\nstate t final\ntrans s _ a 1 R t\n"
THREE_RTM = """\
state s0 initial
state s1
state s2 final
trans s0 _ a 1 L s1
trans s1 _ b 1 R s2
trans s2 1 c _ R s2
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _spec(args) -> RecSpec:
    if not args.spec:
        return EMPTY_SPEC
    spec = parse_spec(_read(args.spec))
    report = check_guarded(spec)
    if not report.ok:
        raise Unguarded(f"unguarded recursion in {', '.join(report.unguarded)} ({report.note})")
    return spec


def _limits(args) -> Limits:
    return Limits.from_env(args.max_states, args.max_depth)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _emit_lts(t: Lts, args, label=str) -> None:
    aut, flags = write_aut(t)
    if args.out:
        _write(args.out + ".aut", aut)
        _write(args.out + ".aut.flags", flags)
        if args.dot:
            _write(args.out + ".dot", to_dot(t, label))
        print(f"{len(t)} states, {t.num_transitions} transitions, frontier: {'yes' if t.has_frontier else 'no'}")
    elif args.dot:
        sys.stdout.write(to_dot(t, label))
    else:
        sys.stdout.write(aut)
        sys.stdout.write(flags)


def _print_verdict(v: Verdict) -> int:
    print(v)
    return v.exit_code


# -- commands --------------------------------------------------------------------------

def cmd_step(args) -> int:
    env = _spec(args)
    p = parse_process(args.term, env.keys())
    interp = Interpreter(env, args.flavor)
    for a, t in sorted(interp.step(p), key=lambda st: (str(st[0]), pretty(st[1]))):
        print(f"{a} -> {pretty(t)}")
    if interp.terminates(p):
        print("(terminates)")
    return 0


def cmd_explore(args) -> int:
    env = _spec(args)
    p = parse_process(args.term, env.keys())
    t = explore(p, env, args.flavor, _limits(args), normalize=args.normalize)
    _emit_lts(t, args, pretty)
    return 0


def cmd_compare(args) -> int:
    env = _spec(args)
    limits = _limits(args)
    left = explore(parse_process(args.left, env.keys()), env, args.flavor, limits, normalize=args.normalize)
    right = explore(parse_process(args.right, env.keys()), env, args.flavor, limits, normalize=args.normalize)
    rooted = args.equiv.startswith("rooted-")
    return _print_verdict(compare_systems(left, right, args.equiv.removeprefix("rooted-"), rooted=rooted))


def cmd_compile_pda(args) -> int:
    text = write_pda(compile_gnf(validate_gnf(_spec(args))))
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify_pda(args) -> int:
    g = validate_gnf(_spec(args))
    return _print_verdict(verify_compile(g, Limits.from_env(args.max_states, args.depth)))


def _machine(args) -> rtm_mod.Rtm:
    return rtm_mod.read_rtm(_read(args.rtm))


def cmd_rtm_step(args) -> int:
    m = _machine(args)
    c = rtm_mod.RtmSource(m).initial
    for a, d in sorted(rtm_mod.rtm_step(m, c), key=lambda st: (str(st[0]), str(st[1]))):
        print(f"{a} -> {d}")
    return 0


def cmd_rtm_explore(args) -> int:
    t = explore_source(rtm_mod.RtmSource(_machine(args)), _limits(args))
    _emit_lts(t, args, str)
    return 0


def program_text(prog: Program, main: str = "Main") -> str:
    if main in prog.env:
        raise SeqcalError(f"name {main} is already defined")
    return f"{main} = {pretty(prog.term)}\n" + prog.env.to_text()


def cmd_rtm_encode(args) -> int:
    text = program_text(rtm_mod.rtm_to_tcpn(_machine(args)))
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_rtm_verify(args) -> int:
    return _print_verdict(rtm_mod.verify_rtm(_machine(args), Limits.from_env(args.max_states, args.depth)))


# -- corpus ------------------------------------------------------------------------------

def _degree_profile(flavor, depths) -> tuple[list[int], int]:
    env = parse_spec(FIG_SPEC)
    out, size = [], 0
    for d in depths:
        t = explore(Name("X"), env, flavor, Limits(None, d))
        out.append(t.max_out_degree())
        size = len(t)
    return out, size


def case_fig_unbounded():
    degrees, size = _degree_profile(Flavor.STANDARD, range(1, 13))
    ok = degrees[5] == 5 and degrees[-1] > degrees[5]
    return ("Holds" if ok else f"Fails: out-degrees {degrees}"), size, 12, ok


def case_fig_bounded():
    degrees, size = _degree_profile(Flavor.REVISED, range(1, 13))
    ok = max(degrees) == 2
    return ("Holds" if ok else f"Fails: out-degrees {degrees}"), size, 12, ok


def _bounded(source, prog: Program, depth: int, cap: int, equiv: str = "dpb"):
    limits = Limits(cap, depth)
    ref = explore_source(source, limits)
    imp = explore_source(ProcessSource(prog.term, prog.env, normalize=True), limits)
    return compare_systems(ref, imp, equiv), len(ref) + len(imp)


def case_lemma_halfcounter():
    v, size = _bounded(rtm_mod.CounterSource(6), Program(rtm_mod.half_counter_expr(), EMPTY_SPEC), 12, 200_000)
    up_to = rtm_mod.halfcounter_up_to(12)
    forget = rtm_mod.counter_discipline(2, Flavor.STANDARD)
    keeps = rtm_mod.counter_discipline(5, Flavor.REVISED)
    ok = not v.fails and up_to.holds and forget.fails and keeps.holds
    return str(v), size, 12, ok


def case_lemma_stack():
    v, size = _bounded(rtm_mod.StackSource(2, 2), rtm_mod.stack_expr(2), 40, 200_000)
    return str(v), size, 40, not v.fails


def case_lemma_tape():
    v, size = _bounded(rtm_mod.TapeSource(2, 1), rtm_mod.tape_expr(2), 60, 200_000)
    return str(v), size, 60, not v.fails


def case_lemma_control():
    verdicts, size = [], 0
    for text in (WRITER_RTM, THREE_RTM):
        m = rtm_mod.read_rtm(text)
        prog = rtm_mod.rtm_to_tcpn(m)
        v, n = _bounded(rtm_mod.RtmSource(m), prog, 80, 200_000)
        verdicts.append(v)
        size += n
    worst = next((v for v in verdicts if v.fails), None) or next((v for v in verdicts if v.unknown), verdicts[0])
    return str(worst), size, 80, not any(v.fails for v in verdicts)


def case_lemma_cfp_pda():
    g = validate_gnf(parse_spec(FIG_SPEC))
    limits = Limits(20_000, 10)
    v = verify_compile(g, limits)
    size = len(explore(Name("X"), g.to_recspec(), Flavor.REVISED, limits))
    return str(v), size, 10, not v.fails


def _pair(env_text: str, left: str, right: str, equiv: str, rooted: bool):
    env = parse_spec(env_text) if env_text else EMPTY_SPEC
    t1 = explore(parse_process(left, env.keys()), env, Flavor.REVISED)
    t2 = explore(parse_process(right, env.keys()), env, Flavor.REVISED)
    return compare_systems(t1, t2, equiv, rooted=rooted), len(t1) + len(t2)


def case_conclusion_counterexamples():
    dist, n1 = _pair("", "(a + 1) ; b.1", "a.b.1 + 1 ; b.1", "strong", False)
    seq, n2 = _pair("", "tau.1 ; a.1", "(tau.1)* ; a.1", "dpb", True)
    ok = dist.fails and len(dist.witness) <= 2 and seq.fails
    return f"{dist}; {seq}", n1 + n2, None, ok


def case_conclusion_rooted_base():
    # the claimed equivalence of the two left operands; recorded as observed
    v, n = _pair("", "tau.1", "(tau.1)*", "dpb", True)
    return str(v), n, None, v.holds


CASES: dict[str, Callable] = {
    "fig-unbounded": case_fig_unbounded,
    "fig-bounded": case_fig_bounded,
    "lemma-halfcounter": case_lemma_halfcounter,
    "lemma-stack": case_lemma_stack,
    "lemma-tape": case_lemma_tape,
    "lemma-control": case_lemma_control,
    "lemma-cfp-pda": case_lemma_cfp_pda,
    "conclusion-counterexamples": case_conclusion_counterexamples,
    "conclusion-rooted-base": case_conclusion_rooted_base,
}


def run_case(case_id: str) -> dict:
    start = time.perf_counter()
    verdict, states, depth, ok = CASES[case_id]()
    return {
        "case_id": case_id,
        "verdict": verdict,
        "states_explored": states,
        "depth": depth,
        "wall_ms": round((time.perf_counter() - start) * 1000),
        "green": bool(ok),
    }


def corpus_report(cases=None, jobs: int = 1, timing: bool = True) -> dict:
    ids = list(cases or CASES)
    unknown = [c for c in ids if c not in CASES]
    if unknown:
        raise UsageError(f"unknown corpus case(s): {', '.join(unknown)}")
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            entries = list(pool.map(run_case, ids))
    else:
        entries = [run_case(c) for c in ids]
    if not timing:
        for e in entries:
            e["wall_ms"] = 0
    return {"cases": entries, "all_green": all(e["green"] for e in entries)}


def cmd_corpus(args) -> int:
    report = corpus_report(args.case, args.jobs, timing=not args.no_timing)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write(args.out, text)
        for e in report["cases"]:
            print(f"{'green' if e['green'] else 'RED  '}  {e['case_id']}: {e['verdict']}")
    else:
        sys.stdout.write(text)
    return 0 if report["all_green"] else 1


# -- argument parsing ------------------------------------------------------------------------

def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _flavor(text: str) -> Flavor:
    try:
        return Flavor.of(text)
    except ValueError:
        raise argparse.ArgumentTypeError("flavor is 'revised' or 'standard'") from None


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="seqcal", description="Process terms with revised sequential composition.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, term=True):
        p.add_argument("--spec", help="file of 'Name = expr' equations")
        p.add_argument("--flavor", type=_flavor, default=Flavor.REVISED, help="revised (default) or standard")
        if term:
            p.add_argument("--term", required=True)

    def limits(p, depth_flag="--max-depth"):
        p.add_argument("--max-states", type=_positive)
        p.add_argument(depth_flag, dest=depth_flag.lstrip("-").replace("-", "_"), type=_positive)

    def output(p):
        p.add_argument("--out", help="base name for .aut/.aut.flags (and .dot) files")
        p.add_argument("--dot", action="store_true", help="emit Graphviz")

    p = sub.add_parser("step", help="print the one-step transitions of a term")
    common(p)
    p.set_defaults(func=cmd_step)

    p = sub.add_parser("explore", help="explore the transition system of a term")
    common(p)
    limits(p)
    output(p)
    p.add_argument("--normalize", action="store_true")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("compare", help="compare two terms")
    common(p, term=False)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--equiv", default="dpb",
                   choices=["strong", "branching", "dpb", "rooted-strong", "rooted-branching", "rooted-dpb"])
    p.add_argument("--normalize", action="store_true")
    limits(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("compile-pda", help="compile a GNF specification to a pushdown automaton")
    p.add_argument("--spec", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compile_pda)

    p = sub.add_parser("verify-pda", help="check a GNF specification against its compiled automaton")
    p.add_argument("--spec", required=True)
    p.add_argument("--depth", type=_positive, default=10)
    p.add_argument("--max-states", type=_positive, default=20_000)
    p.set_defaults(func=cmd_verify_pda)

    rp = sub.add_parser("rtm", help="reactive Turing machines")
    rsub = rp.add_subparsers(dest="rtm_command", required=True, parser_class=_Parser)
    p = rsub.add_parser("step", help="steps from the initial configuration")
    p.add_argument("--rtm", required=True)
    p.set_defaults(func=cmd_rtm_step)
    p = rsub.add_parser("explore", help="configuration graph")
    p.add_argument("--rtm", required=True)
    limits(p)
    output(p)
    p.set_defaults(func=cmd_rtm_explore)
    p = rsub.add_parser("encode", help="print the machine as a process specification (equation Main)")
    p.add_argument("--rtm", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rtm_encode)
    p = rsub.add_parser("verify", help="bounded comparison of the machine with its encoding")
    p.add_argument("--rtm", required=True)
    p.add_argument("--depth", type=_positive, default=80)
    p.add_argument("--max-states", type=_positive, default=200_000)
    p.set_defaults(func=cmd_rtm_verify)

    p = sub.add_parser("corpus", help="run the example suite and emit a JSON report")
    p.add_argument("--out")
    p.add_argument("--case", action="append", choices=sorted(CASES))
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--no-timing", action="store_true", help="report wall_ms as 0")
    p.set_defaults(func=cmd_corpus)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EX_USAGE
    except SpecSyntaxError as exc:
        print(f"seqcal: syntax error at {exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
        return EX_DATAERR
    except SeqcalError as exc:
        print(f"seqcal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_DATAERR
    except RecursionError:
        print("seqcal: term too deep", file=sys.stderr)
        return EX_SOFTWARE
    except Exception as exc:  # noqa: BLE001
        print(f"seqcal: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())
