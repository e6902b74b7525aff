"""True-equation generation: random rule instantiation plus a rewrite walk.

A record starts from a uniformly chosen non-identity rule whose pattern
variables are each bound to an independently drawn random expression (so
repeated variables substitute simultaneously), then takes a fixed number of
random sound rewrite steps.  Candidates that would undo the previous step are
excluded; a step that would blow past the node budget aborts the attempt and
the record is retried from a fresh instance.

Acceptance is gated by the sampling oracle at doubled trial count: the walked
equation must come back true with a healthy share of valid samples, otherwise
the record is regenerated (and the rejection counted).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .axioms import AxiomSet, RewriteRule
from .expr import (BINARY_OPS, INT_CONSTANT_NAMES, UNARY_OPS, DECIMAL_LIMIT,
                   Equation, Expr, const, const_dec, var)
from .oracle import (DEFAULT_ORACLE, TRUE, UNKNOWN, OracleConfig, Verdict,
                     collect_evidence)
from .records import (DatasetRecord, Provenance, VerdictSummary, sigma_record,
                      step_record)
from .rewrite import RewriteStep, applicable_rewrites, apply_rewrite, instantiate_axiom

_UNARY_CHOICES = tuple(sorted(UNARY_OPS))
_BINARY_CHOICES = tuple(sorted(BINARY_OPS))
_VARIABLE_CHOICES = ("x", "y", "z")
_NAMED_CONSTANT_CHOICES = INT_CONSTANT_NAMES + ("pi", "1/2")


class GenerationError(RuntimeError):
    """Retry budget exhausted without an acceptable record."""


@dataclass(frozen=True)
class TrueGenConfig:
    depth_walk: int = 3
    instantiation_depth: int = 2
    max_nodes: int = 120
    seed: int = 0
    retry_budget: int = 20

    def __post_init__(self) -> None:
        if self.depth_walk < 0 or self.instantiation_depth < 0:
            raise ValueError("depth_walk and instantiation_depth must be >= 0")
        if self.max_nodes < 3:
            raise ValueError("max_nodes too small to hold any rule instance")


@dataclass
class GenStats:
    """Counters surfaced in the generation summary."""

    records: int = 0
    retries: int = 0
    unknown_regenerated: int = 0
    size_aborts: int = 0
    gate_rejects: int = 0
    truncated_walks: int = 0
    oracle_true_mutants: int = 0
    borderline_rejects: int = 0
    filter_rejects: int = 0
    no_site_retries: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(vars(self))


def random_expr(max_depth: int, rng: random.Random) -> Expr:
    """Random expression of depth <= max_depth.

    Half the draws at each open position are leaves, split evenly between
    variables and constants; named constants dominate the constant draws with
    an occasional two-digit decimal.
    """
    if max_depth <= 0 or rng.random() < 0.5:
        if rng.random() < 0.5:
            return var(rng.choice(_VARIABLE_CHOICES))
        if rng.random() < 0.8:
            return const(rng.choice(_NAMED_CONSTANT_CHOICES))
        return const_dec(rng.randrange(-DECIMAL_LIMIT, DECIMAL_LIMIT + 1))
    if rng.random() < 0.4:
        return Expr("unary", rng.choice(_UNARY_CHOICES),
                    (random_expr(max_depth - 1, rng),))
    return Expr("binary", rng.choice(_BINARY_CHOICES),
                (random_expr(max_depth - 1, rng),
                 random_expr(max_depth - 1, rng)))


def random_instance(ax: AxiomSet, cfg: TrueGenConfig, rng: random.Random
                    ) -> tuple[Equation, RewriteRule, dict[str, Expr]]:
    """Uniform rule choice, each pattern variable independently bound."""
    rule = rng.choice(ax.rewrite_rules())
    sigma = {v: random_expr(cfg.instantiation_depth, rng)
             for v in sorted(rule.pattern_variables())}
    return instantiate_axiom(rule, sigma), rule, sigma


class WalkSizeExceeded(Exception):
    """A chosen rewrite would push the equation past the node budget."""


def walk_rewrites(eq: Equation, ax: AxiomSet, n_steps: int, rng: random.Random,
                  max_nodes: int) -> tuple[Equation, list[RewriteStep], bool]:
    """Take up to n_steps uniform draws over applicable rewrites.

    Returns (equation, steps, truncated).  Candidates undoing the previous
    step are excluded by redrawing without replacement, which keeps the draw
    uniform over the remaining candidates.  Raises WalkSizeExceeded when the chosen
    step would exceed max_nodes.
    """
    current = eq
    previous: Equation | None = None
    steps: list[RewriteStep] = []
    for _ in range(n_steps):
        candidates = applicable_rewrites(current, ax)
        pool = list(range(len(candidates)))
        chosen: tuple[RewriteStep, Equation] | None = None
        while pool:
            step = candidates[pool.pop(rng.randrange(len(pool)))]
            nxt = apply_rewrite(current, step)
            if previous is not None and nxt == previous:
                continue
            if nxt.node_count() > max_nodes:
                raise WalkSizeExceeded
            chosen = (step, nxt)
            break
        if chosen is None:
            return current, steps, True
        steps.append(chosen[0])
        previous = current
        current = chosen[1]
    return current, steps, False


def required_valid_samples(eq: Equation, cfg: OracleConfig) -> int:
    """Valid samples a gate demands: one for ground equations, otherwise
    at least half the trials (and never below the config floor)."""
    if not eq.free_variables():
        return 1
    return max(cfg.min_valid_samples, cfg.trials // 2)


def check_true_gate(eq: Equation, oracle_cfg: OracleConfig,
                    rng: random.Random) -> Verdict:
    """Oracle gate for true records: doubled trials, no early exit."""
    gate_cfg = oracle_cfg.stricter(2)
    return collect_evidence(eq, gate_cfg, rng, stop_on_witness=False)


def _build_true_record(eq: Equation, rule: RewriteRule, sigma: dict,
                       steps: list[RewriteStep], truncated: bool,
                       verdict: Verdict, record_id: str, record_seed: int
                       ) -> DatasetRecord:
    prov = Provenance(
        seed_axiom_id=rule.id,
        instantiation=sigma_record(sigma),
        rewrite_trace=tuple(step_record(s) for s in steps),
        mutation=None,
        walk_truncated=truncated,
    )
    return DatasetRecord(record_id, eq, True, prov, record_seed,
                         VerdictSummary.from_verdict(verdict))


def generate_true(ax: AxiomSet, cfg: TrueGenConfig, rng: random.Random, *,
                  oracle_cfg: OracleConfig = DEFAULT_ORACLE,
                  record_id: str = "true", record_seed: int = 0,
                  stats: GenStats | None = None) -> DatasetRecord:
    """One true record: instance, walk, oracle gate, full trace."""
    stats = stats if stats is not None else GenStats()
    for _ in range(cfg.retry_budget):
        eq0, rule, sigma = random_instance(ax, cfg, rng)
        try:
            eq, steps, truncated = walk_rewrites(eq0, ax, cfg.depth_walk, rng,
                                                 cfg.max_nodes)
        except WalkSizeExceeded:
            stats.size_aborts += 1
            stats.retries += 1
            continue
        verdict = check_true_gate(eq, oracle_cfg, rng)
        if (verdict.outcome == TRUE
                and verdict.valid_samples >= required_valid_samples(eq, oracle_cfg.stricter(2))):
            if truncated:
                stats.truncated_walks += 1
            stats.records += 1
            return _build_true_record(eq, rule, sigma, steps, truncated,
                                      verdict, record_id, record_seed)
        if verdict.outcome in (TRUE, UNKNOWN):
            stats.unknown_regenerated += 1
        else:
            stats.gate_rejects += 1
        stats.retries += 1
    raise GenerationError(
        f"no acceptable true record in {cfg.retry_budget} attempts ({record_id})")


def instance_record(ax: AxiomSet, rule_id: str, sigma: dict[str, Expr],
                    rng: random.Random, *,
                    oracle_cfg: OracleConfig = DEFAULT_ORACLE,
                    record_id: str = "instance", record_seed: int = 0
                    ) -> DatasetRecord:
    """Directed record from an explicit instantiation (no walk).

    This is the provenance-carrying path for demonstrating specific
    derivations, e.g. commutativity under {x: 2, y: pi}.
    """
    rule = ax.get(rule_id)
    eq = instantiate_axiom(rule, sigma)
    verdict = check_true_gate(eq, oracle_cfg, rng)
    if verdict.outcome != TRUE:
        raise GenerationError(
            f"directed instance of {rule_id} did not verify true "
            f"({verdict.outcome})")
    return _build_true_record(eq, rule, sigma, [], False, verdict,
                              record_id, record_seed)
