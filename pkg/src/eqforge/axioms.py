"""Rewrite-rule corpus: loading, numeric validation, and the curated set.

Rule files hold one rule per line, ``<lhs> == <rhs>`` in prefix notation with
pattern variables x, y, z, full-line ``#`` comments, and optional trailing
``@tag`` markers.  Three files ship with the package:

    appendix66.ax  the legacy 66-line algebraic identity list, kept verbatim
                   including its duplicated lines and one numerically false
                   line, so the validator's findings are reproducible
    trig.ax        a small sound trigonometric set, preceded by the long
                   unsound equation that headed the legacy trig corpus
    augment.ax     distributivity and the two power laws the legacy list lacks

Admission is gated by numeric soundness, not provenance: every rule is
sampled at random variable values and must agree on both sides to within a
tight relative tolerance wherever both sides evaluate.  A rule whose sides
disagree, or where one side is persistently undefined while the other is
finite (rewriting with such a rule would change where an equation is
defined), is rejected as unsound.  A rule that never yields enough valid
samples is rejected as unknown.  Duplicate lines are admitted once and
reported.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path as FsPath

from .expr import (Equation, Expr, ParseError, evaluate, free_variables,
                   parse_expr, render)
from .oracle import OracleConfig, sample_env
from .seeding import derive_rng

KNOWN_TAGS = frozenset(("algebraic", "trigonometric", "augmented", "pure-identity"))
PURE_IDENTITY = "pure-identity"

# Validation draws until this many valid samples are seen; identities are
# exact, so the tolerance can sit just above float64 noise.
VALIDATION_ORACLE = OracleConfig(
    epsilon=1e-9, trials=20, min_valid_samples=20, resample_limit=16)
_SINGULAR_RADIUS = 1e-3

SOUND = "sound"
UNSOUND = "unsound"
UNKNOWN = "unknown"


class AxiomFileError(ValueError):
    def __init__(self, source: str, line_no: int, message: str):
        super().__init__(f"{source}:{line_no}: {message}")
        self.source = source
        self.line_no = line_no


@dataclass(frozen=True)
class RewriteRule:
    id: str
    lhs: Expr
    rhs: Expr
    tags: frozenset[str]

    def pattern_variables(self) -> frozenset[str]:
        return free_variables(self.lhs) | free_variables(self.rhs)

    def is_pure_identity(self) -> bool:
        return self.lhs == self.rhs

    def as_equation(self) -> Equation:
        return Equation(self.lhs, self.rhs)


class AxiomSet:
    """Immutable, validated rule collection with unique ids."""

    def __init__(self, rules, provenance: str):
        self._rules = tuple(rules)
        self._provenance = provenance
        self._by_id = {}
        for r in self._rules:
            if r.id in self._by_id:
                raise ValueError(f"duplicate rule id {r.id}")
            self._by_id[r.id] = r
        self._active = tuple(r for r in self._rules if PURE_IDENTITY not in r.tags)

    @property
    def rules(self) -> tuple[RewriteRule, ...]:
        return self._rules

    @property
    def provenance(self) -> str:
        return self._provenance

    def rewrite_rules(self) -> tuple[RewriteRule, ...]:
        """Rules usable for rewriting (pure identities are inert)."""
        return self._active

    def get(self, rule_id: str) -> RewriteRule:
        try:
            return self._by_id[rule_id]
        except KeyError:
            raise KeyError(f"no rule with id {rule_id!r}") from None

    def __contains__(self, rule_id: str) -> bool:
        return rule_id in self._by_id

    def __iter__(self):
        return iter(self._rules)

    def __len__(self) -> int:
        return len(self._rules)


@dataclass(frozen=True)
class RuleValidation:
    verdict: str  # SOUND | UNSOUND | UNKNOWN
    valid_samples: int
    max_deviation: float | None
    domain_mismatches: int
    domain_failures: int
    reason: str


@dataclass(frozen=True)
class RuleCheck:
    line_no: int
    raw: str
    rule_id: str | None
    status: str  # "admitted" | "rejected-duplicate" | "rejected-unsound" | "rejected-unknown"
    detail: str
    validation: RuleValidation | None
    tags: frozenset[str]


@dataclass(frozen=True)
class ValidationReport:
    source: str
    entries: tuple[RuleCheck, ...]

    def admitted_ids(self) -> list[str]:
        return [e.rule_id for e in self.entries if e.status == "admitted"]

    def rejected(self) -> list[RuleCheck]:
        return [e for e in self.entries if e.status != "admitted"]

    def duplicates(self) -> list[RuleCheck]:
        return [e for e in self.entries if e.status == "rejected-duplicate"]

    def entry_for(self, rule_id: str) -> RuleCheck:
        for e in self.entries:
            if e.rule_id == rule_id:
                return e
        raise KeyError(rule_id)

    def summary_lines(self) -> list[str]:
        lines = [f"# {self.source}: {len(self.admitted_ids())} admitted, "
                 f"{len(self.rejected())} rejected"]
        for e in self.entries:
            mark = "ok " if e.status == "admitted" else "REJ"
            extra = f" [{e.detail}]" if e.detail else ""
            lines.append(f"{mark} {e.rule_id or f'line {e.line_no}'}: {e.raw}{extra}")
        return lines


def _near_singular(env: dict[str, float], singular: list[dict[str, float]]) -> bool:
    for bad in singular:
        if all(abs(env[v] - bad[v]) <= _SINGULAR_RADIUS for v in env):
            return True
    return False


def validate_axiom(rule: RewriteRule, cfg: OracleConfig,
                   rng: random.Random) -> RuleValidation:
    """Numeric soundness check for one rule.

    Samples variables uniformly over cfg.interval, resampling away from a
    growing exclusion list of points where either side left its domain;
    requires cfg.min_valid_samples valid samples, all within tolerance.
    A sample where exactly one side is finite counts as a domain mismatch
    and makes the rule unsound: applied as a rewrite it would change where
    an equation is defined.
    """
    variables = sorted(rule.pattern_variables())
    eq = rule.as_equation()

    if not variables:
        left = evaluate(eq.lhs, {})
        right = evaluate(eq.rhs, {})
        if left.is_finite and right.is_finite:
            dev = abs(left.value - right.value)
            if dev <= cfg.tolerance(left.value, right.value):
                return RuleValidation(SOUND, 1, dev, 0, 0, "")
            return RuleValidation(UNSOUND, 1, dev, 0, 0,
                                  f"sides deviate by {dev:.6g}")
        if left.is_finite != right.is_finite:
            return RuleValidation(UNSOUND, 0, None, 1, 0,
                                  "one side undefined, the other finite")
        return RuleValidation(UNKNOWN, 0, None, 0, 1,
                              "neither side evaluates")

    budget = cfg.trials * cfg.resample_limit
    singular: list[dict[str, float]] = []
    valid = 0
    mismatches = 0
    failures = 0
    max_dev = 0.0
    for _ in range(budget):
        if valid >= cfg.min_valid_samples:
            break
        env = sample_env(variables, cfg, rng)
        if singular and _near_singular(env, singular):
            continue
        left = evaluate(eq.lhs, env)
        right = evaluate(eq.rhs, env)
        if left.is_finite and right.is_finite:
            dev = abs(left.value - right.value)
            max_dev = max(max_dev, dev)
            valid += 1
            if dev > cfg.tolerance(left.value, right.value):
                return RuleValidation(UNSOUND, valid, max_dev, mismatches, failures,
                                      f"sides deviate by {dev:.6g}")
            continue
        singular.append(env)
        if left.is_finite != right.is_finite:
            mismatches += 1
        else:
            failures += 1

    if mismatches > 0:
        return RuleValidation(
            UNSOUND, valid, max_dev if valid else None, mismatches, failures,
            f"one side undefined where the other is finite ({mismatches} samples)")
    if valid >= cfg.min_valid_samples:
        return RuleValidation(SOUND, valid, max_dev, 0, failures, "")
    return RuleValidation(UNKNOWN, valid, max_dev if valid else None, 0, failures,
                          f"only {valid} valid samples in {budget} draws")


def _split_rule_line(raw: str, source: str, line_no: int):
    tokens = raw.split()
    tags = set()
    while tokens and tokens[-1].startswith("@"):
        tag = tokens.pop()[1:]
        if tag not in KNOWN_TAGS:
            raise AxiomFileError(source, line_no, f"unknown tag @{tag}")
        tags.add(tag)
    body = " ".join(tokens)
    if body.count("==") != 1:
        raise AxiomFileError(source, line_no, "expected exactly one '=='")
    lhs_text, rhs_text = body.split("==")
    try:
        lhs = parse_expr(lhs_text.strip())
        rhs = parse_expr(rhs_text.strip())
    except ParseError as exc:
        raise AxiomFileError(source, line_no, str(exc)) from None
    return lhs, rhs, frozenset(tags)


def load_axioms_text(text: str, name: str,
                     cfg: OracleConfig = VALIDATION_ORACLE
                     ) -> tuple[AxiomSet, ValidationReport]:
    """Parse, validate, and admit rules from axiom-file text.

    Returns the admitted set and a per-line report.  Malformed lines raise
    AxiomFileError with their line number.
    """
    admitted: list[RewriteRule] = []
    entries: list[RuleCheck] = []
    seen: dict[tuple[Expr, Expr], str] = {}
    ordinal = 0
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        raw = raw_line.strip()
        if not raw or raw.startswith("#"):
            continue
        ordinal += 1
        lhs, rhs, tags = _split_rule_line(raw, name, line_no)
        rule_id = f"{name}-{ordinal:02d}"
        if lhs == rhs:
            tags |= {PURE_IDENTITY}
        rule = RewriteRule(rule_id, lhs, rhs, tags)

        earlier = seen.get((lhs, rhs))
        if earlier is not None:
            entries.append(RuleCheck(line_no, raw, rule_id, "rejected-duplicate",
                                     f"duplicate of {earlier}", None, tags))
            continue
        seen[(lhs, rhs)] = rule_id

        check = validate_axiom(rule, cfg, derive_rng(0, f"validate:{name}", ordinal))
        if check.verdict == SOUND:
            admitted.append(rule)
            detail = "retained, inert for rewriting" if PURE_IDENTITY in tags else ""
            entries.append(RuleCheck(line_no, raw, rule_id, "admitted",
                                     detail, check, tags))
        elif check.verdict == UNSOUND:
            entries.append(RuleCheck(line_no, raw, rule_id, "rejected-unsound",
                                     check.reason, check, tags))
        else:
            entries.append(RuleCheck(line_no, raw, rule_id, "rejected-unknown",
                                     check.reason, check, tags))
    return (AxiomSet(admitted, provenance=name),
            ValidationReport(name, tuple(entries)))


def load_axioms(path: str | FsPath, cfg: OracleConfig = VALIDATION_ORACLE
                ) -> tuple[AxiomSet, ValidationReport]:
    p = FsPath(path)
    return load_axioms_text(p.read_text(encoding="utf-8"), p.stem, cfg)


def dump_axioms(ax: AxiomSet) -> str:
    """Serialize back to the rule-file format (id assignment is positional,
    so reloading under the same source name reproduces the same rules)."""
    lines = []
    for r in ax.rules:
        tags = "".join(f" @{t}" for t in sorted(r.tags))
        lines.append(f"{render(r.lhs)} == {render(r.rhs)}{tags}")
    return "\n".join(lines) + "\n"


CURATED_SOURCES = ("appendix66", "trig", "augment")


def _data_text(stem: str) -> str:
    return resources.files("eqforge").joinpath(f"data/{stem}.ax").read_text("utf-8")


@lru_cache(maxsize=1)
def _curated() -> tuple[AxiomSet, dict[str, ValidationReport]]:
    rules: list[RewriteRule] = []
    reports: dict[str, ValidationReport] = {}
    seen: dict[tuple[Expr, Expr], str] = {}
    for stem in CURATED_SOURCES:
        subset, report = load_axioms_text(_data_text(stem), stem)
        reports[stem] = report
        for r in subset:
            if (r.lhs, r.rhs) in seen:  # no cross-file duplicates expected
                continue
            seen[(r.lhs, r.rhs)] = r.id
            rules.append(r)
    return AxiomSet(rules, provenance="+".join(CURATED_SOURCES)), reports


def curated_axiom_set() -> AxiomSet:
    """The shipped rule corpus: legacy algebraic list (validated), sound
    trigonometric subset, and the three augmentation laws."""
    return _curated()[0]


def curated_reports() -> dict[str, ValidationReport]:
    return _curated()[1]
