"""Scenario files: JSON parsing, serialization and running the requested checks.

Rationals are written as "a/b" strings; integers and decimal strings or
numbers are also accepted and converted exactly.  Claims are
``[question, answer]`` pairs and vectors are arrays of claims.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .calibration import PsiInterp, PsiMap, calibration_score
from .claims import canonical, claim
from .dist import limit_prob, prob_exact, prob_superset, response_dist
from .divergence import kind_of
from .embedding import EmbeddingMap, check_projection, embed_calibration_score, projection_map, verify_embedding
from .errors import ScenarioError, SmsError
from .report import CheckReport, Conclusion, Precondition, jsonable, simple_check
from .sms import KERNEL, PER_STEP, SmsSpec, check_backward_consistent, check_nonrepeating, validate

VERSION = 1


@dataclass
class Scenario:
    sms1: SmsSpec
    sms2: Optional[SmsSpec] = None
    psi: Optional[PsiMap] = None
    Psi: Optional[PsiInterp] = None
    E: Optional[EmbeddingMap] = None
    divergence: str = "kl"
    epsilon: float = 0.0
    step: int = 1
    embed_check: bool = True
    checks: list = field(default_factory=list)
    version: int = VERSION


# -- parsing -------------------------------------------------------------------


def _rational(x, where) -> Fraction:
    if isinstance(x, bool):
        raise ScenarioError(f"expected a rational, got {x!r}", where)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise ScenarioError(f"expected a rational like \"1/3\", got {x!r}", where)


def _claim(x, where):
    if not (isinstance(x, list) and len(x) == 2 and all(isinstance(t, (str, int)) for t in x)):
        raise ScenarioError(f"a claim is a [question, answer] pair, got {x!r}", where)
    return claim(x[0], x[1])


def _vector(x, where) -> tuple:
    if not isinstance(x, list):
        raise ScenarioError("a vector is an array of claims", where)
    return tuple(_claim(c, f"{where}[{i}]") for i, c in enumerate(x))


def _claims(x, where) -> frozenset:
    return frozenset(_vector(x or [], where))


def _rows(x, where) -> dict:
    if not isinstance(x, list):
        raise ScenarioError("a table is an array of {vector, p} rows", where)
    out: dict = {}
    for i, row in enumerate(x):
        w = f"{where}[{i}]"
        if not isinstance(row, dict) or "p" not in row or not ("vector" in row or "set" in row):
            raise ScenarioError("table rows look like {\"vector\": [...], \"p\": \"1/3\"}", w)
        key = "vector" if "vector" in row else "set"
        v = _vector(row[key], f"{w}.{key}")
        if key == "set":
            v = tuple(canonical(v))
        if v in out:
            raise ScenarioError(f"vector {list(v)} listed twice", w)
        out[v] = _rational(row["p"], f"{w}.p")
    return out


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ScenarioError(f"missing key {key!r}", where)
    return obj[key]


def _sms(obj, where) -> SmsSpec:
    qs = [str(q) for q in _require(obj, "questions", where)]
    vs = [str(v) for v in _require(obj, "answers", where)]
    mode = obj.get("mode", PER_STEP)
    kappa = obj.get("kappa")
    if mode == PER_STEP:
        steps = _require(obj, "steps", where)
        tables = [_rows(t, f"{where}.steps[{i}]") for i, t in enumerate(steps)]
        spec = SmsSpec.per_step(qs, vs, tables, kappa)
    elif mode == KERNEL:
        init = _rows(_require(obj, "init", where), f"{where}.init")
        kernel = {}
        for i, row in enumerate(_require(obj, "kernel", where)):
            w = f"{where}.kernel[{i}]"
            src = _vector(_require(row, "from", w), f"{w}.from")
            kernel[src] = _rows(_require(row, "to", w), f"{w}.to")
        spec = SmsSpec.markov(qs, vs, int(_require(obj, "horizon", where)), init, kernel, kappa)
    else:
        raise ScenarioError(f"mode must be {PER_STEP!r} or {KERNEL!r}", f"{where}.mode")
    rep = validate(spec)
    if not rep.valid:
        raise ScenarioError("; ".join(rep.violations), where)
    return spec


def _psi(obj, sms1, sms2) -> PsiMap:
    src = sms2 or sms1
    for q, qt in obj.items():
        if q not in src.questions:
            raise ScenarioError(f"psi references unknown question {q!r}", f"psi.{q}")
        for t in qt:
            if t not in sms1.questions:
                raise ScenarioError(f"psi maps {q!r} to unknown question {t!r}", f"psi.{q}")
    return PsiMap({q: tuple(map(str, qt)) for q, qt in obj.items()})


def _Psi(rows, sms1) -> PsiInterp:
    table = {}
    for i, row in enumerate(rows):
        w = f"Psi[{i}]"
        qt = tuple(map(str, _require(row, "questions", w)))
        v = str(_require(row, "answer", w))
        dist = {}
        for j, cell in enumerate(_require(row, "dist", w)):
            a = tuple(map(str, _require(cell, "answers", f"{w}.dist[{j}]")))
            if len(a) != len(qt) or any(x not in sms1.answers for x in a):
                raise ScenarioError(f"answer tuple {list(a)} does not fit {list(qt)}", f"{w}.dist[{j}]")
            dist[a] = _rational(_require(cell, "p", f"{w}.dist[{j}]"), f"{w}.dist[{j}].p")
        if sum(dist.values()) != 1:
            raise ScenarioError(f"Psi({list(qt)}, {v}) sums to {sum(dist.values())}", w)
        table[(qt, v)] = dist
    return PsiInterp(table)


def _E(obj, sms1) -> EmbeddingMap:
    if "table" in obj:
        table = {}
        for i, row in enumerate(obj["table"]):
            w = f"E.table[{i}]"
            table[_claims(_require(row, "set", w), f"{w}.set")] = _claims(_require(row, "image", w), f"{w}.image")
        return EmbeddingMap(table)
    if "project" in obj:
        rename = {}
        for i, pair in enumerate(obj.get("rename", [])):
            rename[_claim(pair[0], f"E.rename[{i}][0]")] = _claim(pair[1], f"E.rename[{i}][1]")
        return projection_map(sms1, [str(q) for q in obj["project"]], rename)
    raise ScenarioError("E needs either \"table\" or \"project\"", "E")


def parse_scenario(text: str) -> Scenario:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioError(f"syntax error: {err.msg}", f"line {err.lineno} column {err.colno}") from None
    if not isinstance(obj, dict):
        raise ScenarioError("a scenario is a JSON object", "top level")
    sms1 = _sms(_require(obj, "sms1", "top level"), "sms1")
    sms2 = _sms(obj["sms2"], "sms2") if obj.get("sms2") is not None else None
    psi = _psi(obj["psi"], sms1, sms2) if obj.get("psi") is not None else None
    Psi = _Psi(obj["Psi"], sms1) if obj.get("Psi") is not None else None
    E = None
    if obj.get("E") is not None:
        if sms2 is None:
            raise ScenarioError("an embedding map needs two SMSs", "E")
        E = _E(obj["E"], sms1)
    try:
        kind = kind_of(obj.get("divergence", "kl"))
    except ValueError as err:
        raise ScenarioError(str(err), "divergence") from None
    checks = obj.get("checks", [])
    if not isinstance(checks, list) or not all(isinstance(c, dict) and "check" in c for c in checks):
        raise ScenarioError("checks is an array of {\"check\": name, ...} objects", "checks")
    return Scenario(
        sms1, sms2, psi, Psi, E, kind, float(obj.get("epsilon", 0.0)), int(obj.get("step", 1)),
        bool(obj.get("embed_check", True)), checks, int(obj.get("version", VERSION)),
    )


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# -- serialization ---------------------------------------------------------------


def _claim_out(c):
    return [c[0], c[1]]


def _rows_out(table: dict) -> list:
    return [{"vector": [_claim_out(c) for c in v], "p": str(p)} for v, p in sorted(table.items())]


def sms_to_dict(spec: SmsSpec) -> dict:
    out = {"questions": list(spec.questions), "answers": list(spec.answers), "mode": spec.mode}
    if spec.mode == PER_STEP:
        out["steps"] = [_rows_out(t) for t in spec.steps]
    else:
        out["horizon"] = spec.horizon
        out["init"] = _rows_out(spec.init)
        out["kernel"] = [{"from": [_claim_out(c) for c in v], "to": _rows_out(row)} for v, row in sorted(spec.kernel.items())]
    if spec.kappa is not None:
        out["kappa"] = spec.kappa
    return out


def scenario_to_dict(scn: Scenario) -> dict:
    out: dict = {"version": scn.version, "sms1": sms_to_dict(scn.sms1)}
    if scn.sms2 is not None:
        out["sms2"] = sms_to_dict(scn.sms2)
    if scn.psi is not None:
        out["psi"] = {q: list(t) for q, t in sorted(scn.psi.mapping.items())}
    if scn.Psi is not None:
        out["Psi"] = [
            {"questions": list(qt), "answer": v,
             "dist": [{"answers": list(a), "p": str(p)} for a, p in sorted(d.items())]}
            for (qt, v), d in sorted(scn.Psi.table.items())
        ]
    if scn.E is not None:
        if scn.E.rule is not None:
            out["E"] = scn.E.rule
        else:
            out["E"] = {"table": [
                {"set": [_claim_out(c) for c in canonical(s)], "image": [_claim_out(c) for c in canonical(y)]}
                for s, y in sorted(scn.E.table.items(), key=lambda kv: canonical(kv[0]))
            ]}
    out.update({
        "divergence": scn.divergence,
        "epsilon": scn.epsilon,
        "step": scn.step,
        "embed_check": scn.embed_check,
        "checks": scn.checks,
    })
    return out


def serialize_scenario(scn: Scenario) -> str:
    return json.dumps(scenario_to_dict(scn), indent=1)


def digest(scn: Scenario) -> str:
    text = json.dumps(scenario_to_dict(scn), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


# -- running checks ----------------------------------------------------------------


@dataclass
class RunReport:
    digest: str
    seed: int
    checks: list
    timing: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {"version": VERSION, "digest": self.digest, "seed": self.seed, "checks": self.checks}
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @property
    def ok(self) -> bool:
        return all(c["verdict"] == "verified" for c in self.checks)


def parse_report(text: str) -> RunReport:
    obj = json.loads(text)
    return RunReport(obj["digest"], obj["seed"], obj["checks"], obj.get("timing"))


def _arg_claims(args, key):
    return _claims(args.get(key, []), key)


def _need(scn: Scenario, *names):
    missing = [n for n in names if getattr(scn, n) is None]
    if missing:
        raise ScenarioError(f"this check needs {', '.join(missing)} in the scenario", "checks")


def _step_arg(scn, args):
    return args.get("step", scn.step)


def verify_prop(scn: Scenario, prop: str, args: dict, sweep: bool = False) -> CheckReport:
    """Run one of the proposition verifiers with arguments from a check entry."""
    from .abduction import verify_abduction_math, verify_abduction_sci_expect, verify_abduction_sci_project
    from .evidence import verify_evidence_math, verify_evidence_sci, verify_evidence_sci_flipped

    _need(scn, "sms2", "psi", "Psi")
    n, eps, kind = _step_arg(scn, args), args.get("epsilon", scn.epsilon), scn.divergence
    common = (scn.sms1, scn.sms2, scn.psi, scn.Psi)
    if prop in ("p73", "p74", "p75"):
        beta = _arg_claims(args, "beta")
        paths = [_claims(p, f"paths[{i}]") for i, p in enumerate(_require(args, "paths", "check"))]
        target = tuple(map(str, _require(args, "target", "check")))
        q = str(_require(args, "q", "check"))
        if prop == "p73":
            return verify_evidence_math(*common, n, q, beta, paths, target, eps, kind, sweep=sweep)
        _need(scn, "E")
        fn = verify_evidence_sci if prop == "p74" else verify_evidence_sci_flipped
        return fn(*common, scn.E, n, q, beta, paths, target, eps, kind, embed_check=scn.embed_check, sweep=sweep)
    if prop in ("p81", "p82", "p83"):
        keys = [str(_require(args, k, "check")) for k in ("q_star", "v_star", "q_dagger", "v_dagger")]
        state = _arg_claims(args, "state")
        if prop == "p81":
            return verify_abduction_math(*common, n, *keys, eps, state, kind, sweep=sweep)
        _need(scn, "E")
        fn = verify_abduction_sci_expect if prop == "p82" else verify_abduction_sci_project
        return fn(*common, scn.E, n, *keys, eps, state, kind, embed_check=scn.embed_check, sweep=sweep)
    if prop == "projection":
        _need(scn, "E")
        return check_projection(*common, scn.E, n, str(_require(args, "q", "check")), _arg_claims(args, "state"),
                                kind, embed_check=scn.embed_check)
    raise ScenarioError(f"unknown proposition {prop!r}", "checks")


def _value_check(name, value, **details) -> CheckReport:
    return CheckReport(name, (), Conclusion(True, value, None, None), dict(details))


def run_check(scn: Scenario, args: dict, sweep: bool = False) -> CheckReport:
    name = args["check"]
    try:
        if name == "validate":
            reps = [("sms1", validate(scn.sms1))]
            if scn.sms2 is not None:
                reps.append(("sms2", validate(scn.sms2)))
            bad = {k: list(r.violations) for k, r in reps if not r.valid}
            return simple_check("validate", not bad, bad or None)
        if name == "backward":
            spec = scn.sms2 if args.get("sms") == "sms2" else scn.sms1
            return check_backward_consistent(spec, args.get("kappa"))
        if name == "nonrepeating":
            return check_nonrepeating(scn.sms1, int(args.get("k", 0)))
        if name == "dist":
            spec = scn.sms2 if args.get("sms") == "sms2" else scn.sms1
            s, n = _arg_claims(args, "set"), _step_arg(scn, args)
            fn = prob_exact if args.get("exact") else prob_superset
            return _value_check("dist", fn(spec, n, s), step=n, set=s)
        if name == "limit":
            lv = limit_prob(scn.sms1, _arg_claims(args, "set"), args.get("tol"))
            return _value_check("limit", lv.value, lower=lv.lower, upper=lv.upper, exact=lv.exact)
        if name == "respond":
            spec = scn.sms2 if args.get("sms") == "sms2" else scn.sms1
            n = args.get("step", scn.step)
            r = response_dist(spec, n, [str(q) for q in _require(args, "questions", "check")], _arg_claims(args, "set"))
            return _value_check("respond", r.dist, sure=r.sure)
        if name == "calibrate":
            _need(scn, "sms2", "psi", "Psi")
            q, s = str(_require(args, "q", "check")), _arg_claims(args, "state")
            n = _step_arg(scn, args)
            if args.get("embedded"):
                _need(scn, "E")
                score = embed_calibration_score(scn.sms1, scn.sms2, scn.psi, scn.Psi, scn.E, n, q, s, scn.divergence)
            else:
                score = calibration_score(scn.sms1, scn.sms2, scn.psi, scn.Psi, n, q, s, scn.divergence)
            eps = args.get("epsilon", scn.epsilon)
            return CheckReport("calibrate", (), Conclusion(score <= eps, score, eps, eps - score), {"score": score})
        if name == "embed":
            _need(scn, "sms2", "E")
            return verify_embedding(scn.sms1, scn.sms2, scn.E, _step_arg(scn, args))
        if name == "evidence":
            return _evidence_check(scn, args)
        if name == "abduct":
            return _abduct_check(scn, args)
        if name == "verify":
            return verify_prop(scn, str(_require(args, "prop", "check")), args, sweep or bool(args.get("sweep")))
    except (SmsError, ValueError) as err:
        if isinstance(err, ScenarioError):
            raise
        return CheckReport(name, (Precondition("evaluation", False, f"{type(err).__name__}: {err}"),), None)
    raise ScenarioError(f"unknown check {name!r}", "checks")


def _evidence_check(scn, args) -> CheckReport:
    from .calibration import PredictionDistribution
    from .dist import law_for
    from .embedding import embedded_event
    from .evidence import EvidenceScenario, FBase, LawBase, derive_monotone, is_evidence_collection, is_nonthwarting

    base = args.get("base", "limit")
    if base == "limit":
        b = LawBase(law_for(scn.sms1, None))
    elif base == "step":
        b = LawBase(law_for(scn.sms1, _step_arg(scn, args)))
    elif base in ("F", "F-embedded"):
        _need(scn, "sms2", "psi", "Psi")
        event = {}
        if base == "F-embedded":
            _need(scn, "E")
            event = {"event": embedded_event(scn.E)}
        b = FBase(PredictionDistribution(scn.sms1, scn.sms2, scn.psi, scn.Psi, _step_arg(scn, args), **event))
    else:
        raise ScenarioError(f"unknown evidence base {base!r}", "checks")
    es = EvidenceScenario(
        b, _arg_claims(args, "beta"), [_claims(p, "paths") for p in _require(args, "paths", "check")],
        tuple(map(str, _require(args, "question", "check"))), tuple(map(str, _require(args, "target", "check"))),
    )
    mode = args.get("mode", "collection")
    if mode == "collection":
        return is_evidence_collection(es, bool(args.get("all_orders")))
    if mode == "nonthwarting":
        return is_nonthwarting(es)
    if mode == "derive":
        return derive_monotone(es)
    raise ScenarioError(f"unknown evidence mode {mode!r}", "checks")


def _abduct_check(scn, args) -> CheckReport:
    from .abduction import abduction_alpha
    from .dist import law_for

    spec = scn.sms2 if args.get("sms") == "sms2" else scn.sms1
    n = args.get("step", None if spec.is_kernel else scn.step)
    keys = [str(_require(args, k, "check")) for k in ("q_star", "v_star", "q_dagger", "v_dagger")]
    res = abduction_alpha(law_for(spec, n), *keys, _arg_claims(args, "state"))
    holds = res.equal if res.both_sure else True
    return CheckReport(
        "abduct", (), Conclusion(holds, res.premise, res.implication, res.premise - res.implication),
        {"both_sure": res.both_sure, "premise_holds": res.premise > 1},
    )


def run_scenario(scn: Scenario, seed: int = 0, sweep: bool = False, timing: bool = False) -> RunReport:
    """Run every requested check in order.  Without ``timing`` the report is
    a pure function of (scenario, seed), so repeated runs are byte-identical."""
    import time

    out, times = [], []
    for args in scn.checks:
        t0 = time.perf_counter()
        rep = run_check(scn, args, sweep)
        times.append(time.perf_counter() - t0)
        d = rep.to_dict()
        d["request"] = jsonable(args)
        out.append(d)
    return RunReport(digest(scn), seed, out, {"seconds": times} if timing else None)
