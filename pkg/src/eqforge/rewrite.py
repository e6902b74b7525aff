"""Pattern matching, simultaneous substitution, and rule application.

Rules are applied bidirectionally at any position of either side of an
equation.  Matching is nonlinear: a pattern variable occurring twice must
bind structurally equal subtrees.  Substitution replaces every occurrence of
each bound variable at once, so instantiating x+y == y+x with {x: 2, y: pi}
yields 2+pi == pi+2 in one step.  Pattern variables left unbound by a match
remain as object variables in the replacement, which is how rewriting the
literal 1 into a trigonometric identity introduces a fresh variable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

from .axioms import AxiomSet, RewriteRule
from .expr import Equation, Expr, PathError, positions

Substitution = dict[str, Expr]

LHS_TO_RHS = "lhs->rhs"
RHS_TO_LHS = "rhs->lhs"
DIRECTIONS = (LHS_TO_RHS, RHS_TO_LHS)


class StaleStepError(ValueError):
    """Replaying a step against an equation it no longer matches."""


@dataclass(frozen=True)
class RewriteStep:
    """One recorded rule application; replaying it is exact."""

    rule: RewriteRule
    direction: str
    path: tuple[int, ...]  # equation path, first index 0=lhs 1=rhs
    substitution: tuple[tuple[str, Expr], ...]  # sorted by variable name

    @property
    def rule_id(self) -> str:
        return self.rule.id

    def substitution_dict(self) -> Substitution:
        return dict(self.substitution)

    def pattern(self) -> Expr:
        return self.rule.lhs if self.direction == LHS_TO_RHS else self.rule.rhs

    def replacement(self) -> Expr:
        return self.rule.rhs if self.direction == LHS_TO_RHS else self.rule.lhs


def match_pattern(pattern: Expr, subject: Expr) -> Substitution | None:
    """Bindings making the pattern equal the subject, or None.

    Every variable in the pattern is a pattern variable.
    """
    bindings: Substitution = {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if p.kind == "var":
            bound = bindings.get(p.name)
            if bound is None:
                bindings[p.name] = s
            elif bound != s:
                return None
            continue
        if p.kind != s.kind or p.name != s.name:
            return None
        if p.args:
            stack.extend(zip(p.args, s.args))
    return bindings


def substitute(e: Expr, sigma: Mapping[str, Expr]) -> Expr:
    """Replace all occurrences of each bound variable simultaneously."""
    if e.kind == "var":
        return sigma.get(e.name, e)
    if not e.args:
        return e
    new_args = tuple(substitute(a, sigma) for a in e.args)
    if new_args == e.args:
        return e
    return Expr(e.kind, e.name, new_args)


def instantiate_axiom(rule: RewriteRule, sigma: Mapping[str, Expr]) -> Equation:
    """Equation from a rule under a substitution; unbound variables stay."""
    return Equation(substitute(rule.lhs, sigma), substitute(rule.rhs, sigma))


# ---------------------------------------------------------------------------
# Position-indexed rule application
# ---------------------------------------------------------------------------

def _root_key(e: Expr) -> tuple[str, str]:
    return (e.kind, e.name)


def _match_index(ax: AxiomSet) -> dict:
    """Per-set cache: pattern-root key -> [(rule, direction, pattern)].

    Variable-rooted patterns match any subject, so they are merged into every
    bucket.  Bucket entries keep the global (rule id, direction) order, which
    fixes the enumeration order of applicable_rewrites.
    """
    idx = getattr(ax, "_match_index", None)
    if idx is not None:
        return idx
    entries = []
    for rule in ax.rewrite_rules():
        entries.append((rule.id, LHS_TO_RHS, rule, rule.lhs))
        entries.append((rule.id, RHS_TO_LHS, rule, rule.rhs))
    entries.sort(key=lambda t: (t[0], t[1]))

    anywhere = [(r, d, p) for _, d, r, p in entries if p.kind == "var"]
    buckets: dict[tuple[str, str], list] = {}
    for _, d, r, p in entries:
        if p.kind != "var":
            buckets.setdefault(_root_key(p), []).append((r, d, p))
    merged: dict = {}
    for key, items in buckets.items():
        both = items + anywhere
        both.sort(key=lambda t: (t[0].id, t[1]))
        merged[key] = both
    merged[None] = anywhere  # subjects whose root matches no specific pattern
    ax._match_index = merged
    return merged


def applicable_rewrites(eq: Equation, ax: AxiomSet) -> list[RewriteStep]:
    """All matching (rule, direction, path) triples over both sides.

    Order is deterministic: side, pre-order path, rule id, direction.
    Pure identities are excluded (they never change anything).
    """
    index = _match_index(ax)
    steps: list[RewriteStep] = []
    for path, node in eq.positions():
        candidates = index.get(_root_key(node))
        if candidates is None:
            candidates = index[None]
        for rule, direction, pattern in candidates:
            sigma = match_pattern(pattern, node)
            if sigma is not None:
                steps.append(RewriteStep(rule, direction, path,
                                         tuple(sorted(sigma.items()))))
    return steps


def apply_rewrite(eq: Equation, step: RewriteStep) -> Equation:
    """Replace the subterm at step.path by the instantiated opposite side."""
    try:
        node = eq.at(step.path)
    except PathError as exc:
        raise StaleStepError(f"path {step.path} invalid: {exc}") from None
    sigma = match_pattern(step.pattern(), node)
    if sigma is None or tuple(sorted(sigma.items())) != step.substitution:
        raise StaleStepError(
            f"rule {step.rule_id} ({step.direction}) no longer matches at {step.path}")
    return eq.replace_at(step.path, substitute(step.replacement(), sigma))
