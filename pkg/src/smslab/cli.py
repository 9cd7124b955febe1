"""Command-line entry point.

Exit codes: 0 when every requested check is verified (or a value was
computed), 1 when a check is refuted or a precondition failed, 2 on usage
or parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from .constructors import PROPS, construct_eps0
from .divergence import ALIASES
from .errors import ScenarioError, SmsError
from .report import jsonable
from .scenario import RunReport, digest, load_scenario, run_check, serialize_scenario
from .search import ABLATIONS, counterexample_search


class UsageError(Exception):
    pass


def _json_arg(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise UsageError(f"--{what}: not valid JSON ({err.msg})") from None


def _common(p: argparse.ArgumentParser, scenario: bool = True) -> None:
    if scenario:
        p.add_argument("--scenario", required=True, metavar="PATH")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--divergence", choices=sorted(ALIASES))
    p.add_argument("--epsilon", type=float)
    p.add_argument("--tol")
    p.add_argument("--no-embed-check", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smslab", description="Exact checks for stochastic mathematical systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate the SMS tables of a scenario")
    _common(p)

    p = sub.add_parser("dist", help="superset (or exact) probability of a claim set at a step")
    _common(p)
    p.add_argument("--step", type=int)
    p.add_argument("--set", default="[]")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--sms", choices=("sms1", "sms2"), default="sms1")

    p = sub.add_parser("limit", help="limit superset probability of a claim set")
    _common(p)
    p.add_argument("--set", default="[]")

    p = sub.add_parser("respond", help="response distribution of question(s) given a claim set")
    _common(p)
    p.add_argument("--questions", required=True, help="comma-separated question ids")
    p.add_argument("--set", default="[]")
    p.add_argument("--step", help="an integer step or 'limit'")
    p.add_argument("--sms", choices=("sms1", "sms2"), default="sms1")

    p = sub.add_parser("calibrate", help="calibration score of the predictor at a state")
    _common(p)
    p.add_argument("--q", required=True)
    p.add_argument("--state", default="[]")
    p.add_argument("--embedded", action="store_true")

    p = sub.add_parser("embed", help="check the embedding identity")
    _common(p)

    p = sub.add_parser("evidence", help="evidence-collection, non-thwarting or derivation checks")
    _common(p)
    p.add_argument("--question", required=True, help="comma-separated question ids")
    p.add_argument("--target", required=True, help="comma-separated answers")
    p.add_argument("--paths", required=True, help="JSON array of claim sets")
    p.add_argument("--beta", default="[]")
    p.add_argument("--base", choices=("limit", "step", "F", "F-embedded"), default="limit")
    p.add_argument("--mode", choices=("collection", "nonthwarting", "derive"), default="collection")
    p.add_argument("--all-orders", action="store_true")

    p = sub.add_parser("abduct", help="abduction premise and implication factors")
    _common(p)
    for name in ("q-star", "v-star", "q-dagger", "v-dagger"):
        p.add_argument(f"--{name}", required=True)
    p.add_argument("--state", default="[]")
    p.add_argument("--sms", choices=("sms1", "sms2"), default="sms1")

    p = sub.add_parser("verify", help="run the proposition checks listed in the scenario")
    _common(p)
    p.add_argument("--prop", choices=PROPS)
    p.add_argument("--sweep", action="store_true", help="also bisect the largest passing Psi perturbation")

    p = sub.add_parser("construct", help="emit an epsilon-0 scenario for a proposition")
    _common(p, scenario=False)
    p.add_argument("--prop", choices=PROPS, required=True)
    p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("search", help="counterexample search with one hypothesis ablated")
    _common(p, scenario=False)
    p.add_argument("--prop", choices=PROPS, required=True)
    p.add_argument("--ablate", choices=sorted(ABLATIONS), default="none")
    p.add_argument("--trials", type=int, default=10_000)
    return parser


def _apply_overrides(scn, args) -> None:
    if args.divergence:
        scn.divergence = ALIASES[args.divergence]
    if args.epsilon is not None:
        scn.epsilon = args.epsilon
    if args.no_embed_check:
        scn.embed_check = False


def _requests(scn, args) -> list:
    cmd = args.command
    if cmd == "validate":
        return [{"check": "validate"}]
    if cmd == "dist":
        req = {"check": "dist", "set": _json_arg(args.set, "set"), "sms": args.sms, "exact": args.exact}
        if args.step is not None:
            req["step"] = args.step
        return [req]
    if cmd == "limit":
        req = {"check": "limit", "set": _json_arg(args.set, "set")}
        if args.tol is not None:
            req["tol"] = args.tol
        return [req]
    if cmd == "respond":
        req = {"check": "respond", "questions": args.questions.split(","), "set": _json_arg(args.set, "set"),
               "sms": args.sms}
        if args.step is not None:
            req["step"] = args.step if args.step == "limit" else int(args.step)
        return [req]
    if cmd == "calibrate":
        return [{"check": "calibrate", "q": args.q, "state": _json_arg(args.state, "state"), "embedded": args.embedded}]
    if cmd == "embed":
        return [{"check": "embed"}]
    if cmd == "evidence":
        return [{
            "check": "evidence", "question": args.question.split(","), "target": args.target.split(","),
            "paths": _json_arg(args.paths, "paths"), "beta": _json_arg(args.beta, "beta"), "base": args.base,
            "mode": args.mode, "all_orders": args.all_orders,
        }]
    if cmd == "abduct":
        return [{"check": "abduct", "q_star": args.q_star, "v_star": args.v_star, "q_dagger": args.q_dagger,
                 "v_dagger": args.v_dagger, "state": _json_arg(args.state, "state"), "sms": args.sms}]
    if cmd == "verify":
        found = [c for c in scn.checks if c["check"] == "verify" and (args.prop is None or c.get("prop") == args.prop)]
        if not found:
            raise UsageError(f"the scenario lists no verify check{' for ' + args.prop if args.prop else ''}")
        return found
    raise UsageError(f"unknown command {cmd!r}")


def _emit_value(rep) -> str:
    value = rep.conclusion.lhs if rep.conclusion is not None else None
    if isinstance(value, dict):
        return "\n".join(f"{'|'.join(k)}\t{v}" for k, v in value.items())
    return str(jsonable(value))


def _run_checks(args) -> int:
    scn = load_scenario(args.scenario)
    _apply_overrides(scn, args)
    reports = []
    for req in _requests(scn, args):
        reports.append((req, run_check(scn, req, sweep=getattr(args, "sweep", False))))
    if args.format == "json":
        out = []
        for req, rep in reports:
            d = rep.to_dict()
            d["request"] = jsonable(req)
            out.append(d)
        print(RunReport(digest(scn), args.seed, out).to_json())
    else:
        for _, rep in reports:
            if args.command in ("dist", "limit", "respond") and rep.ok:
                print(_emit_value(rep))
            else:
                print(rep.text())
    return 0 if all(rep.ok for _, rep in reports) else 1


def _construct(args) -> int:
    scn = construct_eps0(args.prop, args.seed)
    _apply_overrides(scn, args)
    text = serialize_scenario(scn)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _search(args) -> int:
    res = counterexample_search(args.prop, args.ablate, args.trials, args.seed)
    if args.format == "json":
        print(json.dumps(jsonable(res.to_dict()), indent=1))
    else:
        print(f"found={res.found} trials={res.trials} hypotheses_held={res.hypotheses_held}")
        if res.report is not None:
            print(res.report.text())
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if args.command == "construct":
            return _construct(args)
        if args.command == "search":
            return _search(args)
        return _run_checks(args)
    except (UsageError, ScenarioError) as err:
        print(f"smslab: error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"smslab: error: {err}", file=sys.stderr)
        return 2
    except (SmsError, ValueError) as err:
        print(f"smslab: error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
