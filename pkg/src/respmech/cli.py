"""Command-line front end.

Subcommands: ``analyze`` (responsibility verdict for one profile),
``classify`` (class membership report), ``orders`` (memberships for every
decision order), ``export`` (QDIMACS for a class formula), ``generate``
(mechanism from a quantified-sentence reduction).

Exit codes: 0 success, 1 usage or input error, 2 enumeration budget
exceeded, 3 brute/formula divergence.  The ``RESPMECH_QBF_SOLVER``
environment variable supplies a default external solver command.
"""

import argparse
import itertools
import json
import os
import sys

from .classifier import (
    CLASSES,
    METHODS,
    ClassificationReport,
    Witness,
    classify,
    diffusion_free_formula,
    gap_diffusion_free_formula,
    gap_free_formula,
    responsibility_free_formula,
)
from .formula import BudgetExceededError, parse, substitute
from .mechanism import DEFAULT_MAX_BITS, Mechanism, MechanismError, load_mechanism
from .qdimacs import SolverError, build_cnf, format_qdimacs, run_external
from .reductions import ReductionInstance, df_instance, gdf_instance, gf_instance
from .responsibility import DivergenceError, responsible_agents

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2
EXIT_DIVERGENCE = 3

SOLVER_ENV = "RESPMECH_QBF_SOLVER"


def _parse_agent_token(mechanism: Mechanism, index: int, token: str) -> tuple[int, ...]:
    agent = mechanism.agents[index]
    if agent.actions is not None and token in agent.actions:
        return agent.actions[token]
    if token and all(c in "01" for c in token):
        bits = tuple(int(c) for c in token)
        if len(bits) == len(agent.vars):
            return bits
    if agent.actions is not None:
        raise MechanismError(
            f"agent {agent.name!r}: {token!r} is neither a known label "
            f"({', '.join(agent.actions)}) nor a {len(agent.vars)}-bit string"
        )
    raise MechanismError(
        f"agent {agent.name!r}: {token!r} is not a {len(agent.vars)}-bit string"
    )


def _parse_profile(mechanism: Mechanism, text: str):
    tokens = [t.strip() for t in text.split(",")] if text else []
    if text == "" and mechanism.n == 0:
        tokens = []
    if len(tokens) != mechanism.n:
        raise MechanismError(
            f"profile {text!r} has {len(tokens)} entries for {mechanism.n} agents"
        )
    return tuple(_parse_agent_token(mechanism, i, t) for i, t in enumerate(tokens))


def _witness_text(mechanism: Mechanism, witness: Witness | None) -> str:
    if witness is None:
        return ""
    labels = mechanism.profile_labels(witness.profile)
    profile = " ".join(
        f"{agent.name}={label}" for agent, label in zip(mechanism.agents, labels)
    )
    blamed = ", ".join(mechanism.agents[i].name for i in witness.agents) or "none"
    return f"profile [{profile}] responsible: {blamed}"


def _cmd_analyze(args) -> int:
    mechanism = load_mechanism(args.mechanism)
    profile = _parse_profile(mechanism, args.profile)
    verdict = responsible_agents(mechanism, profile)
    names = [mechanism.agents[i].name for i in verdict.responsible]
    witnesses = {
        mechanism.agents[i].name: mechanism.agents[i].label_for(t)
        or "".join(map(str, t))
        for i, t in verdict.witnesses.items()
    }
    if args.format == "json":
        print(
            json.dumps(
                {
                    "profile": [list(t) for t in verdict.profile],
                    "labels": list(mechanism.profile_labels(verdict.profile)),
                    "violates": verdict.violates,
                    "responsible": names,
                    "witnesses": witnesses,
                },
                indent=2,
            )
        )
        return EXIT_OK
    labels = mechanism.profile_labels(verdict.profile)
    shown = " ".join(
        f"{agent.name}={label}" for agent, label in zip(mechanism.agents, labels)
    )
    print(f"profile: {shown}" if shown else "profile: (empty)")
    print(f"constraint: {'violated' if verdict.violates else 'satisfied'}")
    if not names:
        print("responsible: none")
    else:
        parts = [f"{name} (could have played {witnesses[name]})" for name in names]
        print(f"responsible: {', '.join(parts)}")
    return EXIT_OK


def _cmd_classify(args) -> int:
    mechanism = load_mechanism(args.mechanism)
    report = classify(mechanism, method=args.method, max_bits=args.budget)
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
        return EXIT_OK
    for name in CLASSES:
        result = report.results[name]
        line = f"{name + ':':5} {'yes' if result.member else 'no'}"
        if result.witness is not None:
            line += f"   witness {_witness_text(mechanism, result.witness)}"
        print(line)
    return EXIT_OK


def _cmd_orders(args) -> int:
    mechanism = load_mechanism(args.mechanism)
    if mechanism.n > 8:
        raise BudgetExceededError(
            f"{mechanism.n}! orders is over the permutation budget (8 agents)"
        )
    rows = []
    for perm in itertools.permutations(range(mechanism.n)):
        reordered = mechanism.reorder(perm)
        report = classify(reordered, method=args.method, max_bits=args.budget)
        row = {
            "order": [mechanism.agents[i].name for i in perm],
            **{name: report.results[name].member for name in CLASSES},
        }
        if args.target:
            row["target"] = report.results[args.target].member
        rows.append(row)
    if args.format == "json":
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    width = max((len(", ".join(r["order"])) for r in rows), default=5)
    header = f"{'order':{width}}  " + "  ".join(f"{c:3}" for c in CLASSES)
    print(header + ("  target" if args.target else ""))
    for row in rows:
        cells = "  ".join(f"{'yes' if row[c] else 'no':3}" for c in CLASSES)
        mark = "  <==" if args.target and row["target"] else ""
        print(f"{', '.join(row['order']):{width}}  {cells}{mark}")
    return EXIT_OK


def _property_formula(mechanism: Mechanism, spec: str, prefix_text: str | None):
    name, _, k_text = spec.partition(":")
    if name == "df" and not k_text:
        return diffusion_free_formula(mechanism)
    if name == "gf" and not k_text:
        return gap_free_formula(mechanism)
    if name == "gdf" and not k_text:
        return gap_diffusion_free_formula(mechanism)
    if name == "rf":
        k = int(k_text) if k_text else 0
        formula = responsibility_free_formula(mechanism, k)
        if k == 0:
            return formula
        if prefix_text is None:
            raise MechanismError(
                f"rf:{k} has free variables; pass --prefix with the first {k} agents' actions"
            )
        head = Mechanism(mechanism.agents[:k], parse("T"))
        prefix = _parse_profile(head, prefix_text)
        bits = [b for t in prefix for b in t]
        names = [v for agent in mechanism.agents[:k] for v in agent.vars]
        return substitute(formula, bits, names)
    raise MechanismError(f"unknown property {spec!r} (expected df, gf, rf[:k], gdf)")


def _cmd_export(args) -> int:
    mechanism = load_mechanism(args.mechanism)
    formula = _property_formula(mechanism, args.property, args.prefix)
    instance = build_cnf(formula)
    text = format_qdimacs(instance)
    with open(args.output, "w", encoding="utf-8") as handle:
        handle.write(text)
    print(
        f"{args.output}: {instance.num_vars} variables, "
        f"{len(instance.clauses)} clauses"
    )
    if args.solve:
        command = args.solver or os.environ.get(SOLVER_ENV)
        if not command:
            raise SolverError(
                f"--solve needs --solver or the {SOLVER_ENV} environment variable"
            )
        verdict = run_external(text, command, timeout=args.timeout)
        print(f"solver verdict: {'TRUE' if verdict else 'FALSE'}")
    return EXIT_OK


def _split_names(text: str | None) -> tuple[str, ...]:
    if not text:
        return ()
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _cmd_generate(args) -> int:
    phi = parse(args.formula)
    x = _split_names(args.forall)
    y = _split_names(args.exists)
    if args.reduction == "df":
        instance = df_instance(phi, x, y)
    elif args.reduction == "gdf":
        instance = gdf_instance(phi, x, y)
    else:
        instance = gf_instance(phi, x, y, _split_names(args.forall2))
    base, ext = os.path.splitext(args.output)
    sidecar_path = f"{base}.expected{ext or '.json'}"
    with open(args.output, "w", encoding="utf-8") as handle:
        json.dump(instance.mechanism.to_dict(), handle, indent=2)
        handle.write("\n")
    with open(sidecar_path, "w", encoding="utf-8") as handle:
        json.dump(instance.sidecar(), handle, indent=2)
        handle.write("\n")
    print(f"mechanism: {args.output}")
    print(f"sidecar:   {sidecar_path}")
    print(f"expected:  {'member' if instance.expected else 'non-member'}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="respmech",
        description="Verify responsibility gaps and diffusion in sequential "
        "decision-making mechanisms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, method_default="both"):
        p.add_argument("mechanism", help="mechanism JSON file")
        p.add_argument(
            "--format", choices=("human", "json"), default="human", help="output format"
        )
        p.add_argument(
            "--budget",
            type=int,
            default=DEFAULT_MAX_BITS,
            help="enumeration budget in total variable bits",
        )
        p.add_argument(
            "--method",
            choices=METHODS,
            default=method_default,
            help="decision method",
        )

    p = sub.add_parser("analyze", help="responsibility verdict for one profile")
    p.add_argument("mechanism", help="mechanism JSON file")
    p.add_argument(
        "--profile",
        required=True,
        help="comma-separated action per agent: a label or a 0/1 bit string",
    )
    p.add_argument("--format", choices=("human", "json"), default="human")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("classify", help="class membership report")
    common(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("orders", help="memberships under every decision order")
    common(p, method_default="brute")
    p.add_argument("--target", choices=CLASSES, help="class to highlight")
    p.set_defaults(func=_cmd_orders)

    p = sub.add_parser("export", help="export a class formula as QDIMACS")
    p.add_argument("mechanism", help="mechanism JSON file")
    p.add_argument(
        "--property",
        required=True,
        help="df, gf, gdf, or rf[:k] (k>0 needs --prefix to close the formula)",
    )
    p.add_argument("--prefix", help="first k agents' actions, like --profile")
    p.add_argument("--output", required=True, help="QDIMACS output path")
    p.add_argument("--solve", action="store_true", help="also run the external solver")
    p.add_argument("--solver", help=f"solver command (default ${SOLVER_ENV})")
    p.add_argument("--timeout", type=float, default=60.0, help="solver timeout (s)")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("generate", help="mechanism from a reduction construction")
    p.add_argument("--reduction", required=True, choices=("df", "gf", "gdf"))
    p.add_argument("--formula", required=True, help="quantifier-free source formula")
    p.add_argument("--forall", help="comma-separated outer universal variables")
    p.add_argument("--exists", help="comma-separated existential variables")
    p.add_argument("--forall2", help="inner universal variables (gf only)")
    p.add_argument("--output", required=True, help="mechanism JSON output path")
    p.set_defaults(func=_cmd_generate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return EXIT_OK if code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ValueError, OSError, IndexError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
