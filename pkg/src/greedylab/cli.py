"""Command line: config ingestion, phase orchestration and report files.

Phases run in the order spaces -> axioms -> constants -> theorems -> renorm.
Each phase writes one JSON artifact into the output directory and the later
subcommands read the earlier artifacts back, so phases can be run one at a
time.  ``report.json`` never contains wall-clock data (timings go to
``timings.json``) so that a fixed config and seed give byte-identical reports
for any worker count.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Mapping

from . import REPORT_SCHEMA_VERSION, __version__
from .constants import KINDS, ConstantEstimate, estimate, estimate_Cpg, estimate_Cqg
from .errors import ContractError, DegenerateNormError, DependencyError, GreedyLabError, InputError, SizeError
from .grid import DEFAULT_MAX_DIM, GridSpec, grid_from_config
from .renorm import check_lemma_5_1, estimate_Cpg_renormed, norm_a_table, renorm_spec_from_config
from .spaces import PSpace, check_axioms, space_from_config, space_to_config
from .theorems import InequalityRecord, check_all, ledger_to_csv

log = logging.getLogger("greedylab")

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE, EXIT_DEPENDENCY, EXIT_SIZE, EXIT_DEGENERATE, EXIT_CONTRACT = range(7)
EXIT_CODES = {
    InputError: EXIT_USAGE,
    DependencyError: EXIT_DEPENDENCY,
    SizeError: EXIT_SIZE,
    DegenerateNormError: EXIT_DEGENERATE,
    ContractError: EXIT_CONTRACT,
}

PHASES = ("axioms", "constants", "theorems", "renorm")
ARTIFACTS = {
    "axioms": "axioms.json",
    "constants": "estimates.json",
    "theorems": "ledger.json",
    "renorm": "renorm.json",
}


# --------------------------------------------------------------------------
# config


class RunConfig:
    """Validated run configuration (see ``docs/config.md``)."""

    def __init__(self, raw: Mapping, *, seed=None, workers=None, max_dim=None):
        if not isinstance(raw, Mapping):
            raise InputError("config must be a JSON object")
        self.raw = dict(raw)
        spaces = raw.get("spaces")
        if not spaces or not isinstance(spaces, list):
            raise InputError("config needs a non-empty 'spaces' list")
        self.spaces: list[PSpace] = [space_from_config(s) for s in spaces]
        names = [s.name for s in self.spaces]
        if len(set(names)) != len(names):
            raise InputError(f"space names must be unique, got {names}")
        self.grid_cfg = raw.get("grid", {})
        self.grids = {
            s.name: grid_from_config({**self.grid_cfg, **cfg.get("grid", {})}, s.dimension, s.field)
            for s, cfg in zip(self.spaces, spaces)
        }
        self.renorm_cfg = raw.get("renorm", {})
        self.renorm_specs = {s.name: renorm_spec_from_config(self.renorm_cfg, self.grids[s.name]) for s in self.spaces}
        self.extra_ladders = [tuple(m) for m in self.renorm_cfg.get("compare_multipliers", [])]
        kinds = raw.get("constants", list(KINDS))
        self.kinds = _check_kinds(kinds)
        self.phases = tuple(raw.get("phases", PHASES))
        if any(ph not in PHASES for ph in self.phases):
            raise InputError(f"unknown phase in {self.phases}; choose from {PHASES}")
        self.seed = int(seed if seed is not None else raw.get("seed", 0))
        self.workers = max(1, int(workers if workers is not None else raw.get("workers", 1)))
        self.max_dim = int(max_dim if max_dim is not None else raw.get("max_dim", DEFAULT_MAX_DIM))
        self.axiom_samples = int(raw.get("axiom_samples", 10_000))
        self.out = raw.get("output", {}).get("dir")

    @property
    def hash(self) -> str:
        # worker count and output location do not influence results
        canon = {k: v for k, v in self.raw.items() if k not in ("workers", "output")}
        canon["seed"] = self.seed
        canon["max_dim"] = self.max_dim
        blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _check_kinds(kinds) -> tuple:
    if isinstance(kinds, str):
        kinds = [k.strip() for k in kinds.split(",") if k.strip()]
    bad = [k for k in kinds if k not in KINDS]
    if bad or not kinds:
        raise InputError(f"unknown constants {bad}; choose from {', '.join(KINDS)}")
    return tuple(k for k in KINDS if k in kinds)


def load_config(path, **overrides) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config is not valid JSON: {exc}") from exc
    return RunConfig(raw, **overrides)


# --------------------------------------------------------------------------
# artifacts


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _header(cfg: RunConfig) -> dict:
    return {"schema_version": REPORT_SCHEMA_VERSION, "tool_version": __version__, "config_hash": cfg.hash}


def _write(out: Path, name: str, obj):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(_dump(_clean(obj)))


def _read(out: Path, phase: str, cfg: RunConfig) -> dict:
    path = out / ARTIFACTS[phase]
    if not path.exists():
        raise DependencyError(f"missing {path}; run the {phase} phase first")
    data = json.loads(path.read_text())
    if data.get("config_hash") != cfg.hash:
        raise DependencyError(f"{path} was produced by a different config; rerun the {phase} phase")
    return data


def _clean(obj):
    """Replace non-finite floats so that the JSON stays strict."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


# --------------------------------------------------------------------------
# phases


def phase_axioms(cfg: RunConfig) -> dict:
    out = {}
    for space in cfg.spaces:
        rep = check_axioms(space, sample_count=cfg.axiom_samples, seed=cfg.seed)
        out[space.name] = {"space": space_to_config(space), "axioms": rep.to_dict()}
    return {**_header(cfg), "spaces": out}


def phase_constants(cfg: RunConfig, kinds=None) -> dict:
    kinds = cfg.kinds if kinds is None else kinds
    out = {}
    for space in cfg.spaces:
        grid = cfg.grids[space.name]
        ests = {}
        for kind in kinds:
            est = estimate(kind, space, grid, workers=cfg.workers, max_dim=cfg.max_dim)
            ests[kind] = est.to_dict()
        first = {}
        for kind, fn in (("C_qg", estimate_Cqg), ("C_pg", estimate_Cpg)):
            if kind in kinds:
                alt = fn(space, grid, ties="first", workers=cfg.workers, max_dim=cfg.max_dim)
                if alt.value != ests[kind]["value"]:
                    first[kind] = alt.to_dict()
        out[space.name] = {
            "space": space_to_config(space),
            "grid": grid.to_dict(),
            "grid_hash": grid.hash,
            "closure_ok": grid.indicator_closed,
            "estimates": ests,
            "ties_first": first,
        }
    return {**_header(cfg), "spaces": out}


def _infinite(estimates: dict) -> list:
    bad = []
    for name, entry in estimates["spaces"].items():
        for kind, e in entry["estimates"].items():
            if e["value"] == "inf":
                bad.append((name, kind, e["witness"]))
    return bad


def phase_theorems(cfg: RunConfig, estimates: dict) -> dict:
    out = {}
    for space in cfg.spaces:
        entry = estimates["spaces"].get(space.name)
        if entry is None:
            raise DependencyError(f"estimates.json has no entry for {space.name}; rerun constants")
        ests = {k: ConstantEstimate.from_dict(v) for k, v in entry["estimates"].items()}
        records = check_all(ests, space.p, field=space.field, closure_ok=entry["closure_ok"])
        out[space.name] = [r.to_dict() for r in records]
    return {**_header(cfg), "spaces": out}


def phase_renorm(cfg: RunConfig, estimates: dict | None) -> dict:
    out = {}
    for space in cfg.spaces:
        grid = cfg.grids[space.name]
        spec = cfg.renorm_specs[space.name]
        if not grid.indicator_closed:
            out[space.name] = {"status": "NOT-APPLICABLE", "reason": "grid is not indicator-closed"}
            continue
        D = None
        if estimates is not None:
            d_entry = estimates["spaces"].get(space.name, {}).get("estimates", {}).get("D")
            if d_entry is not None and d_entry["value"] not in ("inf", 0.0):
                D = float(d_entry["value"])
        scalars = (2.0, -1.0, 0.5, -4.0, 0.25) + ((1j,) if 1j in spec.signs else ())
        table = norm_a_table(space, grid, spec, workers=cfg.workers)
        lemma = check_lemma_5_1(space, spec, grid, D_value=D, scalars=scalars, table=table)
        est = estimate_Cpg_renormed(space, grid, spec, table=table, workers=cfg.workers, max_dim=cfg.max_dim)
        entry = {"spec": spec.to_dict(), "lemma": lemma.to_dict(), "C_pg_renormed": est.to_dict()}
        compare = []
        for ladder in cfg.extra_ladders:
            alt_spec = type(spec)(ladder, spec.signs, spec.max_support)
            alt = estimate_Cpg_renormed(space, grid, alt_spec, workers=cfg.workers, max_dim=cfg.max_dim)
            compare.append({"multipliers": list(alt_spec.multipliers), "value": alt.value})
        if compare:
            entry["compare"] = compare
        out[space.name] = entry
    return {**_header(cfg), "spaces": _clean(out)}


def assemble_report(cfg: RunConfig, parts: Mapping) -> dict:
    spaces = {}
    for space in cfg.spaces:
        item = {}
        for phase, key in (("axioms", "axioms"), ("constants", "constants"), ("theorems", "ledger"), ("renorm", "renorm")):
            data = parts.get(phase)
            if data is None:
                continue
            entry = data["spaces"].get(space.name)
            if phase == "axioms":
                entry = entry["axioms"]
            item[key] = entry
        spaces[space.name] = item
    return {**_header(cfg), "config": cfg.raw, "seed": cfg.seed, "spaces": spaces}


# --------------------------------------------------------------------------
# exports


def annex_csv(report: dict) -> str:
    """Annex-style table: one row per (space, constant)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["symbol", "name", "value", "witness_ref"])
    for space_name, item in report["spaces"].items():
        ests = item.get("constants", {}).get("estimates", {})
        for kind in KINDS:
            if kind not in ests:
                continue
            e = ests[kind]
            value = e["value"] if isinstance(e["value"], str) else repr(float(e["value"]))
            w.writerow([e["symbol"], e["name"], value, f"{space_name}#{kind}"])
    return buf.getvalue()


def findings(parts: Mapping) -> list[str]:
    out = []
    ax = parts.get("axioms")
    if ax:
        out += [f"axioms failed: {n}" for n, e in ax["spaces"].items() if not e["axioms"]["passed"]]
    led = parts.get("theorems")
    if led:
        for n, recs in led["spaces"].items():
            out += [f"{n}: {r['id']} FAIL" for r in recs if r["status"] == "FAIL"]
    return out


# --------------------------------------------------------------------------
# driver


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("usage", EXIT_USAGE, message)
        raise SystemExit(EXIT_USAGE)


def _emit_error(kind: str, code: int, message: str, **extra):
    print(json.dumps({"error": kind, "exit_code": code, "message": message, **extra}, sort_keys=True), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="run configuration (JSON)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--out", default=None, help="output directory (default: config output.dir or ./out)")
    common.add_argument("--max-dim", type=int, default=None, help=f"enumeration cap on the dimension (default {DEFAULT_MAX_DIM})")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="greedylab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"greedylab {__version__}")
    sub = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def group(name, action, help_text, **kw):
        g = sub.add_parser(name, help=help_text)
        gs = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
        return gs.add_parser(action, parents=[common], **kw)

    group("spaces", "validate", "check config and norm axioms")
    est = group("constants", "estimate", "exhaustive constant estimates")
    est.add_argument("--only", default=None, help="comma-separated constants, e.g. C_pg,D")
    group("theorems", "check", "inequality ledger over the estimates")
    group("renorm", "verify", "renorming checks and renormed C_pg")
    exp = group("report", "export", "assemble report.json and export it")
    exp.add_argument("--format", choices=("json", "csv"), default="json")
    run = sub.add_parser("run", parents=[common], help="all phases in order")
    run.add_argument("--only", default=None, help="comma-separated constants")
    return parser


def _run(args) -> int:
    cfg = load_config(args.config, seed=args.seed, workers=args.workers, max_dim=args.max_dim)
    out = Path(args.out or cfg.out or "out")
    timings = {}

    def timed(name, fn, *a, **kw):
        t0 = time.perf_counter()
        res = fn(*a, **kw)
        timings[name] = round(time.perf_counter() - t0, 3)
        return res

    def save_timings():
        path = out / "timings.json"
        old = json.loads(path.read_text()) if path.exists() else {}
        old.update(timings)
        _write(out, "timings.json", old)

    only = _check_kinds(args.only) if getattr(args, "only", None) else None
    command = args.group if args.group == "run" else f"{args.group} {args.action}"
    parts = {}

    if command in ("spaces validate", "run"):
        if command == "spaces validate" or "axioms" in cfg.phases:
            parts["axioms"] = timed("axioms", phase_axioms, cfg)
            _write(out, ARTIFACTS["axioms"], parts["axioms"])
    if command in ("constants estimate", "run") and (command != "run" or "constants" in cfg.phases):
        parts["constants"] = timed("constants", phase_constants, cfg, only)
        _write(out, ARTIFACTS["constants"], parts["constants"])
        bad = _infinite(parts["constants"])
        if bad:
            save_timings()
            name, kind, witness = bad[0]
            raise DegenerateNormError(f"{kind} is infinite on {name}: zero denominator with nonzero numerator", witness)
    if command in ("theorems check", "run") and (command != "run" or "theorems" in cfg.phases):
        est = parts.get("constants") or _read(out, "constants", cfg)
        parts["theorems"] = timed("theorems", phase_theorems, cfg, est)
        _write(out, ARTIFACTS["theorems"], parts["theorems"])
        rows = "".join(
            ledger_to_csv([InequalityRecord(**{**r, "inputs": {}}) for r in recs], name).split("\n", 1)[1]
            for name, recs in parts["theorems"]["spaces"].items()
        )
        (out / "ledger.csv").write_text("space,id,lhs,rhs,margin,status\n" + rows)
    if command in ("renorm verify", "run") and (command != "run" or "renorm" in cfg.phases):
        est = parts.get("constants")
        if est is None and (out / ARTIFACTS["constants"]).exists():
            est = _read(out, "constants", cfg)
        parts["renorm"] = timed("renorm", phase_renorm, cfg, est)
        _write(out, ARTIFACTS["renorm"], parts["renorm"])
    if command in ("report export", "run"):
        if command == "report export":
            for phase in PHASES:
                if (out / ARTIFACTS[phase]).exists():
                    parts[phase] = _read(out, phase, cfg)
            if "constants" not in parts:
                raise DependencyError(f"missing {out / ARTIFACTS['constants']}; run constants estimate first")
        report = assemble_report(cfg, parts)
        _write(out, "report.json", report)
        if command == "run" or args.format == "csv":
            (out / "annex.csv").write_text(annex_csv(report))
    if timings:
        save_timings()

    problems = findings(parts)
    for line in problems:
        log.warning(line)
    print(json.dumps({"command": command, "out": str(out), "findings": len(problems)}, sort_keys=True))
    return EXIT_FINDINGS if problems else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _run(args)
    except GreedyLabError as exc:
        code = next((c for t, c in EXIT_CODES.items() if isinstance(exc, t)), EXIT_CONTRACT)
        extra = {"witness": exc.witness} if isinstance(exc, DegenerateNormError) and exc.witness else {}
        _emit_error(exc.kind, code, str(exc), **extra)
        return code


if __name__ == "__main__":
    sys.exit(main())
