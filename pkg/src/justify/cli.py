"""Command-line frontend.

Every command prints one JSON report on stdout and a one-line summary on
stderr. Exit status: 0 pass or fit, 1 violation or rejection, 2 input or
usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import forward, oracle
from .axioms import (
    check_isa,
    check_iua,
    check_optimization,
    enumeration_limit,
    fit_known_preference,
)
from .core import (
    ChoiceDataset,
    DatasetError,
    Defect,
    DominanceRelation,
    WeakOrder,
    all_menus,
    validate_dataset,
)
from .eucase import (
    EUModel,
    IdentificationError,
    LotteryDataset,
    UnsupportedSizeError,
    check_eu_axioms,
    compare_strictness,
    construct_polytope,
    eu_choose,
    joint_prediction,
    observed_sample,
    recover_true_preference,
)
from .eucase.checks import all_violations
from .eucase.lottery import Lottery
from .revealed import check_iea, fit
from .twosetting import PairedDataset, check_irea, fit_two_setting

AXIOMS = ("opt", "iua", "isa", "iea", "irea")
FROM_DATA = ""  # --true-pref / --dominance given without a value


class InputError(Exception):
    def __init__(self, defects: list[Defect]):
        super().__init__("; ".join(str(d) for d in defects))
        self.defects = defects


def _usage(message: str) -> InputError:
    return InputError([Defect("usage", None, message)])


@dataclass
class CommandResult:
    exit_code: int
    report: dict[str, Any]
    summary: str = ""

    def dumps(self) -> str:
        return json.dumps(self.report, sort_keys=True, indent=2) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise _usage(message)


# ----------------------------------------------------------------- loading


def _read(path: str) -> Any:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError([Defect("unreadable file", None, f"{path}: {exc.strerror}")]) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError([Defect("malformed JSON", None, f"{path}: {exc.msg} at line {exc.lineno}")]) from None


def _dataset(path: str) -> ChoiceDataset:
    try:
        return ChoiceDataset.from_json(_read(path))
    except DatasetError as exc:
        raise InputError(list(exc.defects)) from None


def _eu_dataset(path: str) -> LotteryDataset:
    try:
        return LotteryDataset.from_json(_read(path))
    except DatasetError as exc:
        raise InputError(list(exc.defects)) from None


def _eu_model(path: str) -> EUModel:
    return EUModel.from_json(_read(path))


def _lotteries(text: str) -> list[Lottery]:
    try:
        raw = json.loads(text)
        return [Lottery(tuple(float(x) for x in a)) for a in raw]
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise _usage(f"cannot read lotteries from {text!r}: {exc}") from None


def _parse_dominance(text: str) -> DominanceRelation:
    pairs = []
    for chunk in text.split(","):
        parts = [s.strip() for s in chunk.split(">")]
        if len(parts) != 2 or not all(parts):
            raise _usage(f"cannot parse dominance pair {chunk!r}; use x>y")
        pairs.append((parts[0], parts[1]))
    return DominanceRelation(frozenset(pairs))


def _resolve(flag: str | None, stored: Any, parse, name: str) -> Any:
    """Flag absent: use the dataset. Flag without value: require the dataset.
    Flag with value: use it, unless the dataset says otherwise."""
    if flag is None:
        return stored
    if flag == FROM_DATA:
        if stored is None:
            raise _usage(f"--{name} given without a value but the dataset has none")
        return stored
    value = parse(flag)
    if stored is not None and value != stored:
        raise InputError([Defect("conflict", None, f"--{name} differs from the value in the dataset")])
    return value


def _pref(args, data: ChoiceDataset) -> WeakOrder | None:
    pref = _resolve(args.true_pref, data.true_preference, WeakOrder.parse, "true-pref")
    if pref is not None and pref.domain != frozenset(data.domain):
        raise InputError([Defect("true preference does not cover the domain")])
    return pref


def _dominance(args, data: ChoiceDataset) -> DominanceRelation | None:
    return _resolve(args.dominance, data.dominance, _parse_dominance, "dominance")


def _violations_json(vs) -> list[dict[str, Any]]:
    return [v.to_json() for v in vs]


def _verdict(ok: bool, report: dict[str, Any], what: str) -> CommandResult:
    return CommandResult(0 if ok else 1, report, what)


# ---------------------------------------------------------------- commands


def cmd_validate(args) -> CommandResult:
    report = validate_dataset(_read(args.data))
    out = report.to_json()
    if report.ok:
        return CommandResult(0, out, "dataset is valid")
    out["violations"] = [{"axiom": "validation", "witness": d.to_json(), "message": str(d)} for d in report.defects]
    return CommandResult(1, out, f"{len(report.defects)} defects")


def cmd_check(args) -> CommandResult:
    data = _dataset(args.data)
    wanted = [a.strip() for a in args.axioms.split(",") if a.strip()]
    unknown = sorted(set(wanted) - set(AXIOMS))
    if unknown or not wanted:
        raise _usage(f"unknown axioms {unknown}; choose from {','.join(AXIOMS)}")
    pref = _pref(args, data)
    dom = _dominance(args, data)
    results = {}
    for name in AXIOMS:
        if name not in wanted:
            continue
        if name in ("opt", "iua", "isa") and pref is None:
            raise _usage(f"axiom {name} needs a true preference")
        if name == "opt":
            results[name] = check_optimization(data, pref)
        elif name == "iua":
            results[name] = check_iua(data, pref)
        elif name == "isa":
            results[name] = check_isa(data, pref, dom)
        elif name == "iea":
            results[name] = check_iea(data)
        else:
            if args.high is None:
                raise _usage("axiom irea needs --high <data>")
            results[name] = check_irea(PairedDataset(data, _dataset(args.high)))
    violations = [v for name in results for v in results[name]]
    report = {
        "axioms": {k: {"violations": _violations_json(f), "coverage": f.coverage()} for k, f in results.items()},
        "violations": _violations_json(violations),
        "status": "fail" if violations else "pass",
    }
    return _verdict(not violations, report, f"{len(violations)} violations in {','.join(results)}")


def cmd_fit(args) -> CommandResult:
    if args.two_setting:
        low, high = (_dataset(p) for p in args.two_setting)
        res = fit_two_setting(PairedDataset(low, high))
        return _verdict(res.status == "fit", res.to_json(), f"two-setting fit: {res.status}")
    if args.data is None:
        raise _usage("fit needs a dataset or --two-setting <low> <high>")
    data = _dataset(args.data)
    pref = _pref(args, data)
    res = fit_known_preference(data, pref, _dominance(args, data)) if pref is not None else fit(data)
    summary = f"fitted {res.true_preference}" if res.ok else f"rejected, {len(res.violations)} violations"
    return _verdict(res.ok, res.to_json(), summary)


def cmd_predict(args) -> CommandResult:
    model = forward.JustifiabilityModel.from_json(_read(args.model))
    menu = [x.strip() for x in args.menu.split(",") if x.strip()]
    justified = model.justified_set(menu)
    chosen = model.true_preference.best(justified)
    report = {"menu": sorted(menu), "justified": sorted(justified), "choice": sorted(chosen)}
    return CommandResult(0, report, "choice: " + ",".join(sorted(chosen)))


def cmd_enumerate(args) -> CommandResult:
    data = _dataset(args.data)
    limit = args.limit if args.limit is not None else enumeration_limit()
    if len(data.domain) > limit:
        raise _usage(f"domain has {len(data.domain)} items, above the enumeration limit {limit}")
    pref = _pref(args, data)
    res = fit_known_preference(data, pref, _dominance(args, data), limit) if pref is not None else fit(data, limit)
    report = res.to_json()
    if res.ok:
        report["justifications"] = [list(o.ranking) for o in res.model.justifications]
    return _verdict(res.ok, report, f"{report['justification_count']} justifications" if res.ok else "fit rejected")


def _menus_from_spec(spec: str, domain: list[str], seed: int) -> list[frozenset[str]]:
    if spec == "all":
        return all_menus(domain)
    if spec == "pairs":
        return [m for m in all_menus(domain) if len(m) == 2]
    kind, _, value = spec.partition("=")
    if kind == "size" and value.isdigit():
        return [m for m in all_menus(domain) if len(m) == int(value)]
    if kind == "random" and value.isdigit():
        menus = all_menus(domain)
        rng = np.random.default_rng(seed)
        picks = rng.choice(len(menus), size=min(int(value), len(menus)), replace=False)
        return [menus[i] for i in sorted(picks)]
    raw = _read(spec)
    if not isinstance(raw, list) or not all(isinstance(m, list) for m in raw):
        raise _usage("a menu file must hold a JSON list of item lists")
    return [frozenset(m) for m in raw]


def cmd_gen(args) -> CommandResult:
    model = forward.JustifiabilityModel.from_json(_read(args.model))
    menus = _menus_from_spec(args.menus, sorted(model.domain), args.seed)
    data = forward.generate_dataset(model, menus, include_preference=args.with_preference)
    return CommandResult(0, data.to_json(), f"{len(data.observations)} observations")


def cmd_sweep(args) -> CommandResult:
    if args.theorem == 1 and args.n == 3:
        rep = oracle.sweep_iua_equivalence()
    elif args.theorem == 4 and args.n == 3:
        rep = oracle.sweep_iea_equivalence()
    elif args.theorem == 4 and args.n == 4:
        rep = oracle.sweep_random_fit(args.count, 4, args.seed)
    else:
        raise _usage("supported sweeps: --theorem 1 --n 3, --theorem 4 --n 3, --theorem 4 --n 4")
    return _verdict(rep.ok, rep.to_json(), f"{rep.agreements}/{rep.instances_checked} agree")


# --------------------------------------------------------------- EU commands


def _findings_report(results) -> dict[str, Any]:
    return {
        "axioms": {k: {"violations": _violations_json(f), "coverage": f.coverage()} for k, f in sorted(results.items())},
        "violations": _violations_json(all_violations(results)),
    }


def cmd_eu_check(args) -> CommandResult:
    data = _eu_dataset(args.data)
    u = None if args.true_utility is None else json.loads(args.true_utility)
    results = check_eu_axioms(data, u)
    report = _findings_report(results)
    n = len(report["violations"])
    return _verdict(n == 0, report, f"{n} EU violations")


def _recover(args, data: LotteryDataset):
    anchor = None if args.anchor is None else _lotteries(f"[{args.anchor}]")[0]
    return recover_true_preference(data, anchor, seed=args.seed)


def _identification_failure(exc: IdentificationError) -> CommandResult:
    v = {"axiom": "identification", "witness": {}, "message": str(exc)}
    return CommandResult(1, {"status": "reject", "violations": [v]}, "true utility not identified")


def cmd_eu_recover(args) -> CommandResult:
    try:
        rec = _recover(args, _eu_dataset(args.data))
    except IdentificationError as exc:
        return _identification_failure(exc)
    kind = "unique" if rec.unique else "family"
    return CommandResult(0, rec.to_json(), f"recovered a {kind} true utility")


def cmd_eu_fit(args) -> CommandResult:
    data = _eu_dataset(args.data)
    try:
        rec = _recover(args, data)
    except IdentificationError as exc:
        return _identification_failure(exc)
    u = data.true_utility if data.true_utility is not None else rec.direction
    sample = observed_sample(data, rec.anchor, u)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        model = construct_polytope(sample, u, data.prizes)
    bad = [(m, c) for m, c in data.observations if eu_choose(model, m) != c]
    violations = [
        {"axiom": "reproduction", "witness": {"A": [a.to_json() for a in m]}, "message": "fitted polytope does not reproduce the choice"}
        for m, _ in bad
    ]
    report = {
        "status": "reject" if bad else "fit",
        "model": model.to_json(),
        "anchor": rec.anchor.to_json(),
        "sample_size": len(sample.classified),
        "violations": violations,
        "notes": sorted({str(w.message) for w in caught}),
    }
    summary = f"{len(model.vertices)} vertices" if not bad else f"{len(bad)} menus not reproduced"
    return _verdict(not bad, report, summary)


def cmd_eu_compare(args) -> CommandResult:
    m1, m2 = _eu_model(args.model1), _eu_model(args.model2)
    res = compare_strictness(m1, m2, _lotteries(f"[{args.anchor}]")[0])
    return CommandResult(0, res.to_json(), res.relation)


def cmd_eu_predict(args) -> CommandResult:
    model = _eu_model(args.model)
    menu = _lotteries(args.menu)
    if args.menu_b is None:
        chosen = sorted(eu_choose(model, menu))
        return CommandResult(0, {"choice": [a.to_json() for a in chosen]}, f"{len(chosen)} chosen")
    pairs = sorted(joint_prediction(model, menu, _lotteries(args.menu_b)))
    report = {"joint_choice": [[x.to_json(), y.to_json()] for x, y in pairs]}
    return CommandResult(0, report, f"{len(pairs)} chosen pairs")


# ------------------------------------------------------------------ parser


def _pref_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--true-pref", nargs="?", const=FROM_DATA, default=None, help="e.g. a>b=c>d; bare flag reads the dataset")
    p.add_argument("--dominance", nargs="?", const=FROM_DATA, default=None, help="e.g. x>y,y>z; bare flag reads the dataset")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="justify", description="Fit and test justifiability models of choice.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a dataset file")
    p.add_argument("data")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check", help="test axioms on a dataset")
    p.add_argument("data")
    p.add_argument("--axioms", required=True, help="comma list of " + ",".join(AXIOMS))
    p.add_argument("--high", help="high-pressure dataset for irea")
    _pref_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fit", help="fit a representation")
    p.add_argument("data", nargs="?")
    p.add_argument("--two-setting", nargs=2, metavar=("LOW", "HIGH"))
    _pref_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="choice of a model from a menu")
    p.add_argument("--model", required=True)
    p.add_argument("--menu", required=True, help="comma-separated items")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("enumerate", help="list the justifications of the fitted model")
    p.add_argument("--data", required=True)
    p.add_argument("--limit", type=int)
    _pref_flags(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("gen", help="generate a dataset from a model")
    p.add_argument("--model", required=True)
    p.add_argument("--menus", default="all", help="all, pairs, size=K, random=N or a JSON file of menus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--with-preference", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sweep", help="brute-force equivalence sweeps")
    p.add_argument("--theorem", type=int, choices=(1, 4), required=True)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sweep)

    eu = sub.add_parser("eu", help="expected-utility commands").add_subparsers(dest="eu_command", required=True)
    p = eu.add_parser("check")
    p.add_argument("data")
    p.add_argument("--true-utility", help="JSON list; defaults to the dataset's")
    p.set_defaults(func=cmd_eu_check)
    for name, func in (("fit", cmd_eu_fit), ("recover", cmd_eu_recover)):
        p = eu.add_parser(name)
        p.add_argument("data")
        p.add_argument("--anchor", help="JSON lottery, e.g. [0.2,0.3,0.5]")
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)
    p = eu.add_parser("compare")
    p.add_argument("--model1", required=True)
    p.add_argument("--model2", required=True)
    p.add_argument("--anchor", required=True)
    p.set_defaults(func=cmd_eu_compare)
    p = eu.add_parser("predict")
    p.add_argument("--model", required=True)
    p.add_argument("--menu", required=True, help="JSON list of lotteries")
    p.add_argument("--menu-b", help="second menu for the joint prediction")
    p.set_defaults(func=cmd_eu_predict)
    return parser


def run(argv: Sequence[str] | None = None) -> CommandResult:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except InputError as exc:
        defects = exc.defects
    except (ValueError, UnsupportedSizeError) as exc:
        defects = [Defect("input", None, str(exc))]
    report = {"status": "error", "defects": [d.to_json() for d in defects]}
    return CommandResult(2, report, "error: " + "; ".join(str(d) for d in defects))


def main(argv: Sequence[str] | None = None) -> int:
    result = run(argv)
    sys.stdout.write(result.dumps())
    if result.summary:
        print(result.summary, file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
