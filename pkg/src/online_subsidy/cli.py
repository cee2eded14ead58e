"""Command-line driver.

Subcommands: ``run``, ``adversary``, ``verify``, ``sweep``, ``validate``.
Exit codes: 0 ok, 1 invariant violation, 2 usage or input error,
3 brute-force cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction
from typing import Optional, Sequence

from online_subsidy import adversaries, allocators, generators, oracles
from online_subsidy.envy_graph import build, subsidy_report
from online_subsidy.model import Allocation, CapabilityError, InputError, Transcript
from online_subsidy.rational import format_rational, parse_rational
from online_subsidy.valuations import Valuation, from_json, validate

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_CAPABILITY = 0, 1, 2, 3

DEFAULT_POLICY = {
    "additive": "max-marginal",
    "splc": "max-marginal",
    "k-demand": "max-singleton",
    "k-valued": "type-round-robin",
    "rank-one": "rank-one",
    "restricted-additive": "greedy-min-value",
    "binary-additive": "greedy-min-value",
    "identical-monotone": "min-value",
}

STATIC_GENERATORS = ("table2", "rank-one-hard", "rank-one-hard-capped", "identical-hard")


def _lossy(x: Optional[Fraction]) -> str:
    return "" if x is None else repr(float(x))


def _fmt(x: Optional[Fraction]) -> str:
    return "" if x is None else format_rational(x)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def generate(args: argparse.Namespace) -> Valuation:
    gen = args.gen
    if gen == "table2":
        return adversaries.additive_table2(args.n, args.m, args.epsilon)
    if gen in ("rank-one-hard", "rank-one-hard-capped"):
        return adversaries.rank_one_hard(args.n, args.epsilon, capped=gen.endswith("capped"))
    if gen == "identical-hard":
        return adversaries.identical_monotone_hard(args.n)
    if gen.startswith("random-"):
        if args.seed is None:
            raise InputError("random generators require --seed")
        return generators.random_instance(gen[len("random-") :], args.n, args.m, random.Random(args.seed), k=args.k)
    raise InputError(f"unknown generator {gen!r}")


def transcript_csv(transcript: Transcript) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "item", "agent", "le", "total_subsidy", "total_subsidy_float_lossy", "bound", "slack"])
    for t, s in enumerate(transcript.steps, start=1):
        total = s.report.total
        w.writerow([t, s.item, s.agent, int(s.le), _fmt(total), _lossy(total), _fmt(s.bound), _fmt(s.slack)])
    return buf.getvalue()


def step_invariants_hold(transcript: Transcript) -> bool:
    return all(s.le and (s.slack is None or s.slack >= 0) for s in transcript.steps)


def cmd_run(args: argparse.Namespace) -> int:
    if (args.instance is None) == (args.gen is None):
        raise InputError("give exactly one of --instance or --gen")
    valuation = from_json(_load_json(args.instance)) if args.instance else generate(args)
    bad = validate(valuation)
    if bad is not None and not args.allow_invalid:
        print(f"invalid instance: {bad.kind}: {bad.detail}", file=sys.stderr)
        return EXIT_VIOLATION
    name = args.policy or DEFAULT_POLICY.get(valuation.class_tag)
    if name is None:
        raise InputError(f"no default policy for class {valuation.class_tag!r}; pass --policy")
    info = allocators.get_policy(name)
    if not info.proven(valuation) and not args.allow_unproven:
        raise InputError(f"policy {name} is not proven for {valuation.class_tag}; pass --allow-unproven")
    transcript = allocators.run_policy(valuation, name)
    out = transcript.to_jsonl() if args.format == "jsonl" else transcript_csv(transcript)
    _emit(out, args.out)
    final = transcript.final_report
    summary = {"policy": name, "proven": transcript.proven, "items": len(transcript), **final.to_json()}
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return EXIT_OK if step_invariants_hold(transcript) else EXIT_VIOLATION


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _named_policy(name: str):
    if name.startswith("always-"):
        return allocators.always(int(name.split("-", 1)[1]))
    return allocators.get_policy(name).choose


def cmd_adversary(args: argparse.Namespace) -> int:
    cls = args.adversary_class
    if cls == "restricted-additive":
        if args.policy == "exhaustive":
            raise InputError("the restricted-additive adversary plays one policy at a time")
        outcome = adversaries.restricted_additive_adversary(_named_policy(args.policy), args.n)
        _emit(json.dumps(outcome.to_json(), sort_keys=True, indent=1) + "\n", args.out)
        return EXIT_OK
    fn, depth = adversaries.IMPOSSIBILITY_ADVERSARIES[cls]
    kwargs = {}
    if cls == "budget-additive" and args.epsilon is not None:
        kwargs["epsilon"] = parse_rational(args.epsilon)
    if args.policy == "exhaustive":
        results = adversaries.exhaustive(lambda p: fn(p, **kwargs), depth)
        body = {
            "class": cls,
            "branches": len(results),
            "defeated": sum(o.defeated for _, o in results),
            "results": [
                {
                    "choices": list(seq),
                    "kind": o.kind,
                    "case": o.case,
                    "items": len(o.transcript),
                    "witness": list(o.witness) if o.witness else None,
                    "welfare_before": _fmt(o.welfare_before),
                    "welfare_after": _fmt(o.welfare_after),
                }
                for seq, o in results
            ],
        }
    else:
        body = fn(_named_policy(args.policy), **kwargs).to_json()
    _emit(json.dumps(body, sort_keys=True, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    valuation = from_json(_load_json(args.instance))
    allocation = Allocation.from_json(_load_json(args.allocation))
    report = subsidy_report(valuation, allocation)
    oracle = oracles.brute_force_le(valuation, allocation)
    if (oracle is None) != report.locally_efficient:
        raise AssertionError("envy-graph and permutation checks disagree")
    body = {
        "locally_efficient": report.locally_efficient,
        "envy_graph": json.loads(build(valuation, allocation).to_json()),
        **report.to_json(),
    }
    if oracle is not None:
        body["welfare_before"] = format_rational(oracles.welfare(valuation, allocation))
        body["welfare_after"] = format_rational(oracles.welfare(valuation, allocation, report.witness))
    print(json.dumps(body, sort_keys=True, indent=1))
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def cmd_sweep(args: argparse.Namespace) -> int:
    cls = args.sweep_class
    policy = args.policy or DEFAULT_POLICY.get(cls)
    if policy is None:
        raise InputError(f"no default policy for class {cls!r}")
    info = allocators.get_policy(policy)
    rows = []
    ok = True
    for n in _int_list(args.n):
        for m in _int_list(args.m):
            for trial in range(args.trials):
                if args.gen == "table2":
                    valuation = adversaries.additive_table2(n, m, args.epsilon)
                else:
                    # one independent stream per cell keeps rows reproducible in any order
                    rng = random.Random(f"{args.seed}:{cls}:{n}:{m}:{trial}")
                    valuation = generators.random_instance(cls, n, m, rng, k=args.k)
                transcript = allocators.run_policy(valuation, policy)
                if args.verify:
                    for t in range(1, len(transcript) + 1):
                        if oracles.brute_force_le(valuation, transcript.allocation(t)) is not None:
                            ok = False
                total = transcript.final_report.total
                bound = info.bound(valuation, m)
                ok = ok and step_invariants_hold(transcript)
                rows.append((valuation.class_tag, n, m, trial, total, bound, transcript.all_le))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "n", "m", "trial", "subsidy", "subsidy_float_lossy", "bound", "le"])
    for c, n, m, trial, total, bound, le in rows:
        w.writerow([c, n, m, trial, _fmt(total), _lossy(total), _fmt(bound), int(le)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_validate(args: argparse.Namespace) -> int:
    valuation = from_json(_load_json(args.instance))
    bad = validate(valuation)
    if bad is None:
        print(json.dumps({"valid": True, "class": valuation.class_tag, "n": valuation.n, "m": valuation.m}))
        return EXIT_OK
    print(json.dumps({"valid": False, "class": valuation.class_tag, "violation": bad.to_json()}))
    return EXIT_VIOLATION


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="online-subsidy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a policy on an instance file or generated instance")
    run.add_argument("--instance")
    run.add_argument("--gen", help=f"one of {', '.join(STATIC_GENERATORS)} or random-<class>")
    run.add_argument("--n", type=int, default=2)
    run.add_argument("--m", type=int, default=4)
    run.add_argument("--k", type=int, default=2)
    run.add_argument("--epsilon", default="1/2")
    run.add_argument("--seed", type=int)
    run.add_argument("--policy", help=f"one of {', '.join(allocators.POLICIES)}")
    run.add_argument("--allow-unproven", action="store_true")
    run.add_argument("--allow-invalid", action="store_true", help="run even if the instance fails validation")
    run.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    run.add_argument("--out")
    run.set_defaults(func=cmd_run)

    adv = sub.add_parser("adversary", help="play an adaptive adversary against a policy")
    adv.add_argument(
        "--class", dest="adversary_class", required=True, choices=(*adversaries.IMPOSSIBILITY_ADVERSARIES, "restricted-additive")
    )
    adv.add_argument("--n", type=int, default=4)
    adv.add_argument("--epsilon")
    adv.add_argument("--policy", required=True, help="policy name, always-<agent>, or exhaustive")
    adv.add_argument("--out")
    adv.set_defaults(func=cmd_adversary)

    ver = sub.add_parser("verify", help="check local efficiency and minimum subsidy of an allocation")
    ver.add_argument("--instance", required=True)
    ver.add_argument("--allocation", required=True)
    ver.set_defaults(func=cmd_verify)

    sw = sub.add_parser("sweep", help="tabulate final subsidies over a grid of sizes")
    sw.add_argument("--class", dest="sweep_class", required=True, choices=generators.RANDOM_CLASSES)
    sw.add_argument("--n", default="2", help="comma list or range, e.g. 2,3 or 2-4")
    sw.add_argument("--m", default="2,4,8")
    sw.add_argument("--trials", type=int, default=1)
    sw.add_argument("--seed", type=int, required=True)
    sw.add_argument("--gen", choices=("random", "table2"), default="random")
    sw.add_argument("--epsilon", default="1/2")
    sw.add_argument("--k", type=int, default=2)
    sw.add_argument("--policy")
    sw.add_argument("--verify", action="store_true", help="check every prefix with the permutation oracle")
    sw.add_argument("--out")
    sw.set_defaults(func=cmd_sweep)

    val = sub.add_parser("validate", help="check an instance file against its class invariants")
    val.add_argument("--instance", required=True)
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
