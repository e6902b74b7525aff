"""Dataset records: schema, JSONL serialization, and provenance replay.

A record holds one labeled equation plus everything needed to reproduce it:
the seed rule id, the instantiation bindings, the rewrite trace, the single
mutation for false records, and the RNG seed of the record's stream.
``replay_record`` re-derives the equation from provenance and is the
integrity check for the whole pipeline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .axioms import AxiomSet
from .expr import Equation, parse_equation, parse_expr, render, render_equation
from .oracle import Verdict
from .rewrite import RewriteStep, apply_rewrite, instantiate_axiom


class RecordError(ValueError):
    """Malformed record line."""


class ReplayError(ValueError):
    """Provenance does not reproduce the recorded equation."""


@dataclass(frozen=True)
class StepRecord:
    rule_id: str
    direction: str
    path: tuple[int, ...]
    substitution: tuple[tuple[str, str], ...]  # variable -> prefix text


@dataclass(frozen=True)
class MutationRecord:
    kind: str
    path: tuple[int, ...]
    before: str
    after: str
    after_step: int  # number of sound rewrites applied before the mutation


@dataclass(frozen=True)
class Provenance:
    seed_axiom_id: str
    instantiation: tuple[tuple[str, str], ...]
    rewrite_trace: tuple[StepRecord, ...]
    mutation: MutationRecord | None
    walk_truncated: bool = False


@dataclass(frozen=True)
class VerdictSummary:
    outcome: str
    valid_samples: int
    domain_errors: int
    overflows: int
    max_deviation: float | None

    @classmethod
    def from_verdict(cls, v: Verdict) -> "VerdictSummary":
        return cls(v.outcome, v.valid_samples, v.domain_errors, v.overflows,
                   v.max_deviation)


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    equation: Equation
    label: bool
    provenance: Provenance
    seed: int
    verdict_at_generation: VerdictSummary


def step_record(step: RewriteStep) -> StepRecord:
    return StepRecord(
        step.rule_id, step.direction, step.path,
        tuple((v, render(e)) for v, e in step.substitution))


def sigma_record(sigma: dict) -> tuple[tuple[str, str], ...]:
    return tuple((v, render(e)) for v, e in sorted(sigma.items()))


# ---------------------------------------------------------------------------
# JSONL
# ---------------------------------------------------------------------------

def record_to_json(rec: DatasetRecord) -> str:
    prov = rec.provenance
    obj = {
        "id": rec.id,
        "equation": render_equation(rec.equation),
        "label": rec.label,
        "provenance": {
            "seed_axiom_id": prov.seed_axiom_id,
            "instantiation": {v: t for v, t in prov.instantiation},
            "rewrite_trace": [
                {"rule_id": s.rule_id, "direction": s.direction,
                 "path": list(s.path),
                 "substitution": {v: t for v, t in s.substitution}}
                for s in prov.rewrite_trace
            ],
            "mutation": None if prov.mutation is None else {
                "kind": prov.mutation.kind,
                "path": list(prov.mutation.path),
                "before": prov.mutation.before,
                "after": prov.mutation.after,
                "after_step": prov.mutation.after_step,
            },
            "walk_truncated": prov.walk_truncated,
        },
        "seed": rec.seed,
        "verdict_at_generation": {
            "outcome": rec.verdict_at_generation.outcome,
            "valid_samples": rec.verdict_at_generation.valid_samples,
            "domain_errors": rec.verdict_at_generation.domain_errors,
            "overflows": rec.verdict_at_generation.overflows,
            "max_deviation": rec.verdict_at_generation.max_deviation,
        },
    }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def record_from_json(line: str) -> DatasetRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError(f"invalid JSON: {exc}") from None
    try:
        prov_obj = obj["provenance"]
        mut_obj = prov_obj.get("mutation")
        mutation = None if mut_obj is None else MutationRecord(
            mut_obj["kind"], tuple(mut_obj["path"]), mut_obj["before"],
            mut_obj["after"], mut_obj["after_step"])
        prov = Provenance(
            prov_obj["seed_axiom_id"],
            tuple(sorted(prov_obj["instantiation"].items())),
            tuple(
                StepRecord(s["rule_id"], s["direction"], tuple(s["path"]),
                           tuple(sorted(s["substitution"].items())))
                for s in prov_obj["rewrite_trace"]),
            mutation,
            prov_obj.get("walk_truncated", False),
        )
        vg = obj["verdict_at_generation"]
        summary = VerdictSummary(vg["outcome"], vg["valid_samples"],
                                 vg["domain_errors"], vg["overflows"],
                                 vg["max_deviation"])
        return DatasetRecord(obj["id"], parse_equation(obj["equation"]),
                             bool(obj["label"]), prov, int(obj["seed"]), summary)
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordError(f"malformed record: {exc}") from None


def write_records(path, records: Iterable[DatasetRecord]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(record_to_json(rec))
            fh.write("\n")
            n += 1
    return n


def read_records(path) -> list[DatasetRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(record_from_json(line))
            except RecordError as exc:
                raise RecordError(f"line {line_no}: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------

def _replay_step(eq: Equation, sr: StepRecord, ax: AxiomSet) -> Equation:
    rule = ax.get(sr.rule_id)
    sigma = tuple((v, parse_expr(t)) for v, t in sr.substitution)
    return apply_rewrite(eq, RewriteStep(rule, sr.direction, sr.path, sigma))


def _replay_mutation(eq: Equation, mut: MutationRecord) -> Equation:
    before = parse_expr(mut.before)
    if eq.at(mut.path) != before:
        raise ReplayError(f"mutation site at {mut.path} does not match recorded 'before'")
    return eq.replace_at(mut.path, parse_expr(mut.after))


def replay_record(rec: DatasetRecord, ax: AxiomSet) -> Equation:
    """Re-derive the equation from provenance; raises ReplayError on divergence."""
    prov = rec.provenance
    rule = ax.get(prov.seed_axiom_id)
    sigma = {v: parse_expr(t) for v, t in prov.instantiation}
    eq = instantiate_axiom(rule, sigma)
    mut = prov.mutation
    for i, sr in enumerate(prov.rewrite_trace):
        if mut is not None and mut.after_step == i:
            eq = _replay_mutation(eq, mut)
        eq = _replay_step(eq, sr, ax)
    if mut is not None and mut.after_step == len(prov.rewrite_trace):
        eq = _replay_mutation(eq, mut)
    return eq


def check_replay(rec: DatasetRecord, ax: AxiomSet) -> None:
    got = replay_record(rec, ax)
    if got != rec.equation:
        raise ReplayError(
            f"record {rec.id}: replay produced {render_equation(got)}, "
            f"recorded {render_equation(rec.equation)}")
