"""Scenario runner.

    cbmkit verify scenario.json [--out report.json] [--csv report.csv]
                                [--oracle-h H] [--grid N] [--dump-masks]
    cbmkit fixtures DIR
    cbmkit profile scenario.json

Exit codes: 0 when every assert-mode check passes, 1 on an assert failure,
2 on a configuration or schema error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from importlib import resources
from typing import Any, Optional

import jsonschema
import numpy as np

from . import __version__
from .geometry import CoStar, body_from_literal, make_grid
from .measures import check_homogeneity, measure_from_literal
from .onedim import IntervalUnion, law_from_literal, ocbm_1d
from .report import IneqReport, _jsonable
from .sobolev import RadialFunction, StepFunction, check_sobolev, functional_cbm_1d
from .verifiers import (bonnesen_concavity, check_bm, check_cbm, check_iso_warped, check_isoperimetry,
                        check_ocbm_nd, closure_suite, equality_diagnostics, profile_search)

CSV_COLUMNS = ("check", "name", "lhs", "rhs", "slack", "pass")


class ScenarioError(Exception):
    """Configuration problem, reported with a JSON pointer."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"
        self.message = message


def load_schema() -> dict:
    return json.loads(resources.files("cbmkit").joinpath("scenario.schema.json").read_text())


def _pointer(path) -> str:
    return "".join(f"/{p}" for p in path)


def validate(scenario: Any) -> None:
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(scenario), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        # the deepest error usually names the offending field
        e = max(errors, key=lambda e: len(e.absolute_path))
        raise ScenarioError(_pointer(e.absolute_path), e.message)


def digest(scenario: dict) -> str:
    canon = json.dumps(scenario, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


class Context:
    """Resolved objects of one scenario."""

    def __init__(self, sc: dict, grid_override: Optional[int] = None, oracle_h: Optional[float] = None,
                 dump_dir: Optional[str] = None):
        self.sc = sc
        n = sc["dimension"]
        res = grid_override or sc.get("grid") or (4096 if n == 2 else 8192 if n == 3 else 2)
        self.grid = make_grid(n, res) if n > 1 else make_grid(1)
        self.seed = int(sc.get("seed", 0))
        oracle = sc.get("oracle", {})
        self.h = float(oracle_h or oracle.get("h", 1.0 / 128))
        self.dump_dir = dump_dir
        self.measure = None
        if "measure" in sc:
            try:
                self.measure = measure_from_literal(sc["measure"], self.grid)
            except (ValueError, KeyError, TypeError) as exc:
                ptr = "/measure/p" if "p" in str(exc) or "exponent" in str(exc) else "/measure"
                raise ScenarioError(ptr, str(exc)) from exc
        self.bodies = {}
        for name, lit in sc.get("bodies", {}).items():
            try:
                self.bodies[name] = body_from_literal(self._resolve_inner(lit), self.grid)
            except (ValueError, KeyError, TypeError) as exc:
                raise ScenarioError(f"/bodies/{name}", str(exc)) from exc
        self.laws = {}
        for name, lit in sc.get("laws", {}).items():
            try:
                self.laws[name] = law_from_literal(lit)
            except (ValueError, KeyError) as exc:
                raise ScenarioError(f"/laws/{name}", str(exc)) from exc
        self.functions = {}
        for name, lit in sc.get("functions", {}).items():
            try:
                K = self.bodies[lit["gauge"]] if "gauge" in lit else body_from_literal({"kind": "disc", "r": 1.0}, self.grid)
                self.functions[name] = RadialFunction.from_literal(lit, K)
            except (ValueError, KeyError) as exc:
                raise ScenarioError(f"/functions/{name}", str(exc)) from exc

    def _resolve_inner(self, lit: dict) -> dict:
        if lit.get("kind") == "costar" and isinstance(lit.get("inner"), str):
            ref = self.sc.get("bodies", {}).get(lit["inner"])
            if ref is None:
                raise KeyError(f"unknown body {lit['inner']!r}")
            return {**lit, "inner": ref}
        return lit

    def body(self, ref, pointer: str):
        if isinstance(ref, dict):
            return body_from_literal(self._resolve_inner(ref), self.grid)
        if isinstance(ref, str) and ref.startswith("costar:"):
            return CoStar(self.body(ref[len("costar:"):], pointer))
        if ref not in self.bodies:
            raise ScenarioError(pointer, f"unknown body {ref!r}")
        return self.bodies[ref]

    def mu(self, pointer: str, inputs: dict):
        if "measure" in inputs:
            return measure_from_literal(inputs["measure"], self.grid)
        if self.measure is None:
            raise ScenarioError(pointer, "this check needs a measure")
        return self.measure


def _need(inputs: dict, key: str, pointer: str):
    if key not in inputs:
        raise ScenarioError(f"{pointer}/inputs/{key}", "required input is missing")
    return inputs[key]


def run_check(ctx: Context, idx: int, entry: dict) -> list[IneqReport]:
    """Run one scenario check; several reports come back for batteries."""
    ptr = f"/checks/{idx}"
    kind = entry["checker"]
    inp = entry.get("inputs", {})
    tol = entry.get("tolerance")
    B = lambda key: ctx.body(_need(inp, key, ptr), f"{ptr}/inputs/{key}")
    dump = None
    if ctx.dump_dir:
        os.makedirs(ctx.dump_dir, exist_ok=True)
        dump = os.path.join(ctx.dump_dir, f"check{idx:03d}.pgm")
    kw = {} if tol is None else {"tol": float(tol)}

    if kind == "check_bm":
        reps = [check_bm(ctx.mu(ptr, inp), B("A"), B("B"), float(_need(inp, "lambda", ptr)), float(_need(inp, "q", ptr)), **kw)]
    elif kind == "check_cbm":
        reps = [check_cbm(ctx.mu(ptr, inp), B("A"), B("B"), float(_need(inp, "lambda", ptr)), float(_need(inp, "q", ptr)),
                          h=ctx.h, dump=dump, **kw)]
    elif kind == "check_isoperimetry":
        reps = [check_isoperimetry(ctx.mu(ptr, inp), B("K"), B("S"), float(_need(inp, "q", ptr)), **kw)]
    elif kind == "check_ocbm_nd":
        reps = [check_ocbm_nd(ctx.mu(ptr, inp), B("A"), B("B"), float(_need(inp, "t", ptr)), h=ctx.h, dump=dump, **kw)]
    elif kind == "check_iso_warped":
        reps = [check_iso_warped(ctx.mu(ptr, inp), B("B"), B("C"), **kw)]
    elif kind == "bonnesen_concavity":
        res = bonnesen_concavity(ctx.mu(ptr, inp), B("A"), B("B"), float(_need(inp, "q", ptr)),
                                 int(inp.get("steps", 21)), **kw)
        rep = res.to_report()
        if inp.get("expect_affine"):
            aff = IneqReport("bonnesen_affinity", res.affinity_defect, float(tol or 1e-9), "<=", 0.0,
                             check="bonnesen_concavity")
            rep.passed = rep.passed and aff.passed
            rep.witness["affine_required"] = True
        reps = [rep]
    elif kind == "equality_diagnostics":
        d = equality_diagnostics(B("A"), B("B"), translation_search=bool(inp.get("translation_search", False)))
        t = float(tol or 1e-6)
        w = {"ratio": d.ratio, "shift": d.shift, "convexity_deficit": d.convexity_deficit}
        if inp.get("expect", "homothetic") == "homothetic":
            reps = [IneqReport("homothety_residual", d.homothety_residual, t, "<=", 0.0,
                               check="equality_diagnostics", witness=w)]
        else:
            reps = [IneqReport("homothety_residual", d.homothety_residual, t, ">=", 0.0,
                               check="equality_diagnostics", witness=w)]
    elif kind == "closure_suite":
        mus = [measure_from_literal(m, ctx.grid) for m in _need(inp, "measures", ptr)]
        out = closure_suite(mus, _need(inp, "weights", ptr), np.asarray(_need(inp, "T", ptr)), float(_need(inp, "q", ptr)),
                            inp.get("q_prime"), int(inp.get("count", 0)), ctx.seed)
        reps = [IneqReport(f"closure_{k}", float(v.violations), 0.0, "<=", 0.0, check="closure_suite",
                           witness={"instances": v.instances, "worst_relative_slack": v.worst_relative_slack,
                                    "paths": v.paths, "failures": v.failures})
                for k, v in out.items()]
    elif kind == "profile_search":
        mu = ctx.mu(ptr, inp)
        v = float(_need(inp, "v", ptr))
        res = profile_search(mu, B("K"), v, int(inp.get("degree", 3)), int(inp.get("budget", 400)), ctx.seed)
        reps = [res.to_report(v, float(tol or 1e-3) * abs(res.bound))]
    elif kind == "check_sobolev":
        f = ctx.functions.get(_need(inp, "f", ptr))
        if f is None:
            raise ScenarioError(f"{ptr}/inputs/f", "unknown function")
        reps = [check_sobolev(f, ctx.mu(ptr, inp), _need(inp, "variant", ptr), float(inp.get("beta", 0.25)), **kw)]
    elif kind == "ocbm_1d":
        law = ctx.laws.get(_need(inp, "law", ptr))
        if law is None:
            raise ScenarioError(f"{ptr}/inputs/law", "unknown law")
        A = IntervalUnion.of(*_need(inp, "A", ptr))
        reps = [ocbm_1d(law, A, float(_need(inp, "b", ptr)), float(_need(inp, "t", ptr)), **kw)]
    elif kind == "functional_cbm_1d":
        law = ctx.laws.get(_need(inp, "law", ptr))
        if law is None:
            raise ScenarioError(f"{ptr}/inputs/law", "unknown law")
        f = StepFunction(tuple(inp["f"]["edges"]), tuple(inp["f"]["values"]))
        g = StepFunction(tuple(inp["g"]["edges"]), tuple(inp["g"]["values"]))
        reps = [functional_cbm_1d(f, g, float(_need(inp, "lambda", ptr)), law, float(_need(inp, "q", ptr)), **kw)]
    elif kind == "check_homogeneity":
        reps = [check_homogeneity(ctx.mu(ptr, inp), float(_need(inp, "q", ptr)), int(inp.get("trials", 20)),
                                  ctx.seed, **kw)]
    else:  # pragma: no cover - the schema rejects unknown checkers
        raise ScenarioError(f"{ptr}/checker", f"unknown checker {kind!r}")

    mode = entry.get("mode", "assert")
    for r in reps:
        if entry.get("name"):
            r.name = entry["name"] if len(reps) == 1 else f"{entry['name']}:{r.name}"
        if mode == "diagnostic" or r.mode == "diagnostic":
            r.mode = "diagnostic"
    return reps


def run_scenario(sc: dict, grid_override: Optional[int] = None, oracle_h: Optional[float] = None,
                 dump_dir: Optional[str] = None, only: Optional[set] = None) -> tuple[dict, int]:
    """Validate and run a scenario; returns (report, exit code)."""
    validate(sc)
    ctx = Context(sc, grid_override, oracle_h, dump_dir)
    reports, timing = [], []
    for idx, entry in enumerate(sc["checks"]):
        if only and entry["checker"] not in only:
            continue
        t0 = time.perf_counter()
        try:
            reps = run_check(ctx, idx, entry)
        except ScenarioError:
            raise
        except (ValueError, TypeError, NotImplementedError) as exc:
            rep = IneqReport(entry.get("name", entry["checker"]), math.nan, math.nan, "<=", 1.0,
                             check=entry["checker"], mode=entry.get("mode", "assert"),
                             notes=[f"error: {exc}"])
            reps = [rep]
        timing.append({"check": idx, "seconds": round(time.perf_counter() - t0, 6)})
        reports.extend(reps)
    asserted = [r for r in reports if r.mode == "assert"]
    diag = [r for r in reports if r.mode == "diagnostic"]
    summary = {
        "passed": sum(r.passed for r in asserted),
        "failed": sum(not r.passed for r in asserted),
        "diagnostics": len(diag),
        "diagnostic_failures": sum(not r.passed for r in diag),
    }
    report = {
        "toolkit": "cbmkit",
        "version": __version__,
        "scenario": sc["name"],
        "scenario_digest": digest(sc),
        "settings": {"grid": ctx.grid.size, "oracle_h": ctx.h, "seed": ctx.seed},
        "reports": [r.to_dict() for r in reports],
        "summary": summary,
        "timing": timing,
    }
    return report, (1 if summary["failed"] else 0)


def report_json(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2)


def write_csv(report: dict, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in report["reports"]:
            w.writerow([r["check"], r["name"], repr(r["lhs"]), repr(r["rhs"]), repr(r["slack"]), r["pass"]])


def bundled_scenarios() -> dict[str, dict]:
    d = resources.files("cbmkit").joinpath("scenarios")
    out = {}
    for item in sorted(d.iterdir(), key=lambda p: p.name):
        if item.name.endswith(".json"):
            out[item.name] = json.loads(item.read_text())
    return out


def emit_fixtures(out_dir: str) -> list[str]:
    """Write every bundled scenario plus its expected CSV report."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, sc in bundled_scenarios().items():
        path = os.path.join(out_dir, name)
        with open(path, "w") as fh:
            json.dump(sc, fh, indent=2, sort_keys=True)
        report, _ = run_scenario(sc)
        cpath = os.path.join(out_dir, name[:-5] + ".expected.csv")
        write_csv(report, cpath)
        written += [path, cpath]
    return written


def _load(path: str) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError("/", f"invalid JSON: {exc}") from exc


def main(argv: Optional[list] = None) -> int:
    ap = argparse.ArgumentParser(prog="cbmkit", description="Run inequality scenarios and emit JSON reports.")
    ap.add_argument("--version", action="version", version=f"cbmkit {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)
    v = sub.add_parser("verify", help="run every check in a scenario")
    v.add_argument("scenario")
    v.add_argument("--out")
    v.add_argument("--csv")
    v.add_argument("--oracle-h", type=float)
    v.add_argument("--grid", type=int)
    v.add_argument("--dump-masks", action="store_true", help="write voxel sums as PGM next to the report")
    fx = sub.add_parser("fixtures", help="write bundled scenarios and expected CSVs")
    fx.add_argument("dir")
    pr = sub.add_parser("profile", help="run only the minimizer searches of a scenario")
    pr.add_argument("scenario")
    pr.add_argument("--out")
    args = ap.parse_args(argv)

    try:
        if args.cmd == "fixtures":
            for p in emit_fixtures(args.dir):
                print(p)
            return 0
        sc = _load(args.scenario)
        if args.cmd == "profile":
            report, code = run_scenario(sc, only={"profile_search"})
            text = report_json(report)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text + "\n")
            else:
                print(text)
            return code
        dump_dir = None
        if args.dump_masks:
            base = os.path.dirname(os.path.abspath(args.out)) if args.out else os.getcwd()
            dump_dir = os.path.join(base, "masks")
        report, code = run_scenario(sc, args.grid, args.oracle_h, dump_dir)
    except ScenarioError as exc:
        print(json.dumps({"error": exc.message, "pointer": exc.pointer}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"error": str(exc), "pointer": "/"}), file=sys.stderr)
        return 2
    text = report_json(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.csv:
        write_csv(report, args.csv)
    s = report["summary"]
    print(f"{report['scenario']}: {s['passed']} passed, {s['failed']} failed, "
          f"{s['diagnostics']} diagnostic ({s['diagnostic_failures']} failing)", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
