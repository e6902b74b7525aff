"""Command-line front end: dataset generation, verification, audit, rule checks.

Subcommands:

    generate      write a labeled JSONL dataset with full provenance
    verify        verdict every equation in a file, report label agreement
    audit         leakage report over a labeled JSONL dataset
    axioms-check  validate rule files and list every admission decision

All randomness derives from --seed, so identical invocations produce byte
identical output files.  A config file holds ``key = value`` lines mirroring
the long flag names; explicit flags win over the config file.

Exit codes: 0 success, 1 usage or config error, 2 data error,
3 generation gave up (retry budget exhausted).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audit import InsufficientDataError, leakage_report
from .axioms import (AxiomFileError, curated_axiom_set, load_axioms,
                     load_axioms_text, CURATED_SOURCES, _data_text)
from .corruptor import FalseGenConfig, generate_false
from .expr import ParseError, parse_equation
from .oracle import ABSOLUTE, OracleConfig, RELATIVE, TRUE, verify
from .records import (DatasetRecord, RecordError, record_from_json,
                      record_to_json)
from .seeding import derive_rng, derive_seed
from .truegen import GenStats, GenerationError, TrueGenConfig, generate_true

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_GATE = 3


class ConfigError(ValueError):
    pass


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; '#' starts a comment line."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _cast_bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _resolve(args, config: dict[str, str], key: str, default, cast):
    cli_value = getattr(args, key, None)
    if cli_value is not None:
        return cli_value
    if key in config:
        try:
            return cast(config[key])
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"config key {key}: {exc}") from None
    return default


def _oracle_config(args, config) -> OracleConfig:
    mode = _resolve(args, config, "tolerance_mode", RELATIVE, str)
    if mode not in (ABSOLUTE, RELATIVE):
        raise ConfigError(f"tolerance-mode must be {ABSOLUTE} or {RELATIVE}")
    try:
        return OracleConfig(
            epsilon=_resolve(args, config, "epsilon", 1e-6, float),
            trials=_resolve(args, config, "trials", 8, int),
            min_valid_samples=_resolve(args, config, "min_valid_samples", 3, int),
            resample_limit=_resolve(args, config, "resample_limit", 16, int),
            tolerance_mode=mode,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    config = read_config(args.config) if args.config else {}
    seed = _resolve(args, config, "seed", 0, int)
    true_count = _resolve(args, config, "true_count", 0, int)
    false_count = _resolve(args, config, "false_count", 0, int)
    out_path = _resolve(args, config, "out", None, str)
    if out_path is None:
        raise ConfigError("generate needs --out")
    if true_count < 0 or false_count < 0:
        raise ConfigError("counts must be >= 0")

    oracle_cfg = _oracle_config(args, config)
    tg_cfg = TrueGenConfig(
        depth_walk=_resolve(args, config, "depth_walk", 3, int),
        instantiation_depth=_resolve(args, config, "instantiation_depth", 2, int),
        max_nodes=_resolve(args, config, "max_nodes", 120, int),
        seed=seed,
        retry_budget=_resolve(args, config, "max_retries", 20, int),
    )
    fg_cfg = FalseGenConfig(
        valid_steps=_resolve(args, config, "valid_steps", 3, int),
        filter_artifacts=_resolve(args, config, "filter_artifacts", True, _cast_bool),
        seed=seed,
        max_retries=_resolve(args, config, "max_retries", 20, int),
    )

    ax = curated_axiom_set()
    stats = GenStats()
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(true_count):
            rec = generate_true(
                ax, tg_cfg, derive_rng(seed, "true", i),
                oracle_cfg=oracle_cfg, record_id=f"true-{i:06d}",
                record_seed=derive_seed(seed, "true", i), stats=stats)
            fh.write(record_to_json(rec))
            fh.write("\n")
        for i in range(false_count):
            rec = generate_false(
                ax, fg_cfg, derive_rng(seed, "false", i),
                tg_cfg=tg_cfg, oracle_cfg=oracle_cfg,
                record_id=f"false-{i:06d}",
                record_seed=derive_seed(seed, "false", i), stats=stats)
            fh.write(record_to_json(rec))
            fh.write("\n")

    print(f"wrote {true_count + false_count} records "
          f"({true_count} true, {false_count} false) to {out_path}")
    print(f"summary: retries={stats.retries} "
          f"unknown_regenerated={stats.unknown_regenerated} "
          f"oracle_true_mutants={stats.oracle_true_mutants} "
          f"filter_rejects={stats.filter_rejects} "
          f"borderline_rejects={stats.borderline_rejects} "
          f"size_aborts={stats.size_aborts} "
          f"no_site_retries={stats.no_site_retries} "
          f"truncated_walks={stats.truncated_walks}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _parse_input_line(line: str):
    """A dataset record or a bare ``(= lhs rhs)`` line.

    Returns (record_id or None, Equation, label or None).
    """
    if line.startswith("{"):
        rec = record_from_json(line)
        return rec.id, rec.equation, rec.label
    eq = parse_equation(line)
    return None, eq, None


def cmd_verify(args) -> int:
    config = read_config(args.config) if args.config else {}
    seed = _resolve(args, config, "seed", 0, int)
    oracle_cfg = _oracle_config(args, config)

    try:
        lines = Path(args.in_path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"error: cannot read {args.in_path}: {exc}", file=sys.stderr)
        return EXIT_DATA

    out_fh = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    counts = {"true": 0, "false": 0, "unknown": 0}
    labeled = 0
    agreed = 0
    errors = 0
    try:
        for ix, raw in enumerate(lines):
            line = raw.strip()
            if not line:
                continue
            try:
                rec_id, eq, label = _parse_input_line(line)
            except (RecordError, ParseError) as exc:
                errors += 1
                print(f"line {ix + 1}: {exc}", file=sys.stderr)
                continue
            verdict = verify(eq, oracle_cfg, derive_rng(seed, "verify", ix))
            counts[verdict.outcome] += 1
            result = {"line": ix + 1}
            if rec_id is not None:
                result["id"] = rec_id
            result["verdict"] = verdict.outcome
            result["valid_samples"] = verdict.valid_samples
            result["max_deviation"] = verdict.max_deviation
            if label is not None:
                agrees = (verdict.outcome == TRUE) == label
                labeled += 1
                agreed += int(agrees)
                result["label"] = label
                result["agrees"] = agrees
            out_fh.write(json.dumps(result, separators=(",", ":")))
            out_fh.write("\n")
    finally:
        if args.out:
            out_fh.close()

    summary_fh = sys.stdout if args.out else sys.stderr
    print(f"verdicts: true={counts['true']} false={counts['false']} "
          f"unknown={counts['unknown']} parse_errors={errors}", file=summary_fh)
    if labeled:
        print(f"label agreement: {agreed}/{labeled} = {agreed / labeled:.6f}",
              file=summary_fh)
    return EXIT_DATA if errors else EXIT_OK


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------

def cmd_audit(args) -> int:
    records: list[DatasetRecord] = []
    try:
        lines = Path(args.in_path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        print(f"error: cannot read {args.in_path}: {exc}", file=sys.stderr)
        return EXIT_DATA
    for ix, raw in enumerate(lines):
        line = raw.strip()
        if not line:
            continue
        try:
            records.append(record_from_json(line))
        except RecordError as exc:
            print(f"line {ix + 1}: {exc}", file=sys.stderr)
            return EXIT_DATA

    try:
        report = leakage_report(records, curated_axiom_set(), bound=args.bound)
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(report.as_text())
    if args.out:
        Path(args.out).write_text(report.as_kv() + "\n", encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------------------
# axioms-check
# ---------------------------------------------------------------------------

def cmd_axioms_check(args) -> int:
    oracle_overrides = {}
    if args.epsilon is not None:
        oracle_overrides["epsilon"] = args.epsilon
    reports = []
    try:
        if args.paths:
            for path in args.paths:
                if oracle_overrides:
                    from .axioms import VALIDATION_ORACLE
                    from dataclasses import replace
                    cfg = replace(VALIDATION_ORACLE, **oracle_overrides)
                    _, rep = load_axioms(path, cfg)
                else:
                    _, rep = load_axioms(path)
                reports.append(rep)
        else:
            for stem in CURATED_SOURCES:
                _, rep = load_axioms_text(_data_text(stem), stem)
                reports.append(rep)
    except (AxiomFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA

    total_admitted = 0
    total_rejected = 0
    for rep in reports:
        for line in rep.summary_lines():
            print(line)
        total_admitted += len(rep.admitted_ids())
        total_rejected += len(rep.rejected())
    print(f"total: {total_admitted} admitted, {total_rejected} rejected")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eqforge",
        description="Generate, verify, and audit labeled symbolic-equation datasets.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a labeled JSONL dataset")
    g.add_argument("--out", type=str, default=None)
    g.add_argument("--true-count", dest="true_count", type=int, default=None)
    g.add_argument("--false-count", dest="false_count", type=int, default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--config", type=str, default=None)
    g.add_argument("--epsilon", type=float, default=None)
    g.add_argument("--trials", type=int, default=None)
    g.add_argument("--valid-steps", dest="valid_steps", type=int, default=None)
    g.add_argument("--depth-walk", dest="depth_walk", type=int, default=None)
    g.add_argument("--filter-artifacts", dest="filter_artifacts",
                   action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--max-retries", dest="max_retries", type=int, default=None)
    g.add_argument("--instantiation-depth", dest="instantiation_depth",
                   type=int, default=None)
    g.add_argument("--max-nodes", dest="max_nodes", type=int, default=None)
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="verdict each equation in a file")
    v.add_argument("in_path", type=str)
    v.add_argument("--out", type=str, default=None)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--config", type=str, default=None)
    v.add_argument("--epsilon", type=float, default=None)
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--tolerance-mode", dest="tolerance_mode", type=str,
                   default=None, choices=(ABSOLUTE, RELATIVE))
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("audit", help="leakage report over a labeled dataset")
    a.add_argument("in_path", type=str)
    a.add_argument("--bound", type=float, default=0.55)
    a.add_argument("--out", type=str, default=None)
    a.set_defaults(func=cmd_audit)

    c = sub.add_parser("axioms-check", help="validate rule files")
    c.add_argument("paths", nargs="*")
    c.add_argument("--epsilon", type=float, default=None)
    c.set_defaults(func=cmd_axioms_check)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GenerationError as exc:
        print(f"generation gave up: {exc}", file=sys.stderr)
        return EXIT_GATE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
