"""False-equation generation: one invalid mutation inside a walk of sound steps.

The pipeline mirrors the true generator so the two classes share texture: a
random rule instance, k1 sound rewrites, exactly one mutation, then k2 more
sound rewrites (k1 + k2 fixed by config, split uniformly).  A candidate is
accepted only when the oracle, at doubled trials and with no early exit,
calls it false on every valid sample; mutants that come back true are
discarded rather than relabeled, so the true stream stays derivation-backed.

With artifact filtering on, a mutation may not increase the count of directly
composed transcendentals nor introduce a transcendental raised to a
non-integer power, which keeps those tell-tale rates close between classes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .audit import count_composed_transcendental, has_noninteger_power_of_transcendental
from .axioms import AxiomSet
from .expr import (BINARY_OPS, DECIMAL_LIMIT, UNARY_OPS, Equation, Expr,
                   const, const_dec)
from .expr import render
from .oracle import DEFAULT_ORACLE, FALSE, TRUE, OracleConfig, Verdict, collect_evidence
from .records import (DatasetRecord, MutationRecord, Provenance,
                      VerdictSummary, sigma_record, step_record)
from .truegen import (GenStats, GenerationError, TrueGenConfig, WalkSizeExceeded,
                      random_expr, random_instance, required_valid_samples,
                      walk_rewrites)

MUTATION_KINDS = ("symbol-swap", "constant-perturb", "subtree-graft",
                  "operator-swap")

_UNARY_CHOICES = tuple(sorted(UNARY_OPS))
_BINARY_CHOICES = tuple(sorted(BINARY_OPS))
_VARIABLE_CHOICES = ("x", "y", "z")
# Named constants in value order; perturbation moves one slot along this
# lattice, or one hundredth for decimals.
_NAMED_LATTICE = ("-1", "0", "1/2", "1", "2", "3", "pi", "4", "10")
_NAMED_POOL = tuple(sorted(_NAMED_LATTICE))
_GRAFT_DEPTH = 2


class NoLegalSiteError(ValueError):
    """The equation has no node where the requested mutation kind applies."""


@dataclass(frozen=True)
class Mutation:
    kind: str
    path: tuple[int, ...]
    before: Expr
    after: Expr


@dataclass(frozen=True)
class FalseGenConfig:
    valid_steps: int = 3
    filter_artifacts: bool = True
    seed: int = 0
    max_retries: int = 20

    def __post_init__(self) -> None:
        if self.valid_steps < 0:
            raise ValueError("valid_steps must be >= 0")
        if self.max_retries < 1:
            raise ValueError("max_retries must be >= 1")


def _swap_symbol(node: Expr, rng: random.Random) -> Expr:
    if node.kind == "var":
        choices = [v for v in _VARIABLE_CHOICES if v != node.name]
        return Expr("var", rng.choice(choices))
    if node.kind == "const":
        choices = [c for c in _NAMED_POOL if c != node.name]
        return const(rng.choice(choices))
    if node.kind == "unary":
        choices = [op for op in _UNARY_CHOICES if op != node.name]
        return Expr("unary", rng.choice(choices), node.args)
    choices = [op for op in _BINARY_CHOICES if op != node.name]
    return Expr("binary", rng.choice(choices), node.args)


def _perturb_constant(node: Expr, rng: random.Random) -> Expr:
    name = node.name
    if name.startswith("dec:"):
        scaled = int(name[4:])
        options = [s for s in (scaled - 1, scaled + 1) if abs(s) <= DECIMAL_LIMIT]
        return const_dec(rng.choice(options))
    i = _NAMED_LATTICE.index(name)
    options = [j for j in (i - 1, i + 1) if 0 <= j < len(_NAMED_LATTICE)]
    return const(_NAMED_LATTICE[rng.choice(options)])


def _graft_subtree(node: Expr, rng: random.Random) -> Expr | None:
    for _ in range(8):
        replacement = random_expr(_GRAFT_DEPTH, rng)
        if replacement != node:
            return replacement
    return None


def mutate(eq: Equation, kind: str, rng: random.Random
           ) -> tuple[Equation, Mutation]:
    """Apply one mutation of the given kind at a uniformly chosen legal site."""
    if kind not in MUTATION_KINDS:
        raise ValueError(f"unknown mutation kind {kind!r}")
    if kind == "constant-perturb":
        sites = [(p, n) for p, n in eq.positions() if n.kind == "const"]
    elif kind == "operator-swap":
        sites = [(p, n) for p, n in eq.positions() if n.kind in ("unary", "binary")]
    else:
        sites = eq.positions()
    if not sites:
        raise NoLegalSiteError(f"no legal site for {kind}")

    path, before = sites[rng.randrange(len(sites))]
    if kind == "constant-perturb":
        after = _perturb_constant(before, rng)
    elif kind == "subtree-graft":
        after = _graft_subtree(before, rng)
        if after is None:
            raise NoLegalSiteError("graft draws kept reproducing the site")
    else:
        after = _swap_symbol(before, rng)
    return eq.replace_at(path, after), Mutation(kind, path, before, after)


def _mutation_adds_artifacts(before_eq: Equation, after_eq: Equation) -> bool:
    if (count_composed_transcendental(after_eq)
            > count_composed_transcendental(before_eq)):
        return True
    return (has_noninteger_power_of_transcendental(after_eq)
            and not has_noninteger_power_of_transcendental(before_eq))


def check_false_gate(eq: Equation, oracle_cfg: OracleConfig,
                     rng: random.Random) -> Verdict:
    """Oracle gate for false records: doubled trials, all samples collected."""
    gate_cfg = oracle_cfg.stricter(2)
    return collect_evidence(eq, gate_cfg, rng, stop_on_witness=False)


def generate_false(ax: AxiomSet, cfg: FalseGenConfig, rng: random.Random, *,
                   tg_cfg: TrueGenConfig | None = None,
                   oracle_cfg: OracleConfig = DEFAULT_ORACLE,
                   record_id: str = "false", record_seed: int = 0,
                   stats: GenStats | None = None) -> DatasetRecord:
    """One false record, retried until the oracle confirms falsity throughout."""
    stats = stats if stats is not None else GenStats()
    tg_cfg = tg_cfg if tg_cfg is not None else TrueGenConfig()
    for _ in range(cfg.max_retries):
        eq0, rule, sigma = random_instance(ax, tg_cfg, rng)
        k1 = rng.randrange(cfg.valid_steps + 1)
        k2 = cfg.valid_steps - k1
        try:
            eq_pre, steps_pre, trunc_pre = walk_rewrites(
                eq0, ax, k1, rng, tg_cfg.max_nodes)
            kind = MUTATION_KINDS[rng.randrange(len(MUTATION_KINDS))]
            try:
                eq_mut, mutation = mutate(eq_pre, kind, rng)
            except NoLegalSiteError:
                stats.no_site_retries += 1
                stats.retries += 1
                continue
            if cfg.filter_artifacts and _mutation_adds_artifacts(eq_pre, eq_mut):
                stats.filter_rejects += 1
                stats.retries += 1
                continue
            eq_fin, steps_post, trunc_post = walk_rewrites(
                eq_mut, ax, k2, rng, tg_cfg.max_nodes)
        except WalkSizeExceeded:
            stats.size_aborts += 1
            stats.retries += 1
            continue

        verdict = check_false_gate(eq_fin, oracle_cfg, rng)
        need = required_valid_samples(eq_fin, oracle_cfg.stricter(2))
        if (verdict.outcome == FALSE and verdict.valid_samples >= need
                and all(not s.within for s in verdict.samples)):
            truncated = trunc_pre or trunc_post
            if truncated:
                stats.truncated_walks += 1
            prov = Provenance(
                seed_axiom_id=rule.id,
                instantiation=sigma_record(sigma),
                rewrite_trace=tuple(step_record(s)
                                    for s in steps_pre + steps_post),
                mutation=MutationRecord(
                    mutation.kind, mutation.path, render(mutation.before),
                    render(mutation.after), after_step=len(steps_pre)),
                walk_truncated=truncated,
            )
            stats.records += 1
            return DatasetRecord(record_id, eq_fin, False, prov, record_seed,
                                 VerdictSummary.from_verdict(verdict))
        if verdict.outcome == TRUE:
            stats.oracle_true_mutants += 1
        elif verdict.outcome == FALSE:
            stats.borderline_rejects += 1
        else:
            stats.unknown_regenerated += 1
        stats.retries += 1
    raise GenerationError(
        f"no acceptable false record in {cfg.max_retries} attempts ({record_id})")
