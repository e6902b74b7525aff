"""eqforge: rewrite-based generation and numeric verification of labeled
symbolic-equation datasets.

The package builds equation datasets in two streams: true equations derived
by instantiating validated identities and walking sound rewrites, and false
equations derived by applying exactly one invalid mutation inside a walk of
sound rewrites.  Every record carries full provenance and an oracle verdict,
and a leakage audit quantifies how separable the two classes are from
shallow syntactic features.
"""

from .axioms import AxiomSet, RewriteRule, ValidationReport, curated_axiom_set, load_axioms, validate_axiom
from .expr import Equation, EvalResult, Expr, evaluate, parse_equation, parse_expr, render, render_equation
from .oracle import OracleConfig, Verdict, verify
from .rewrite import RewriteStep, applicable_rewrites, apply_rewrite, instantiate_axiom, match_pattern, substitute

__version__ = "0.1.0"

__all__ = [
    "AxiomSet", "Equation", "EvalResult", "Expr", "OracleConfig",
    "RewriteRule", "RewriteStep", "ValidationReport", "Verdict",
    "applicable_rewrites", "apply_rewrite", "curated_axiom_set", "evaluate",
    "instantiate_axiom", "load_axioms", "match_pattern", "parse_equation",
    "parse_expr", "render", "render_equation", "substitute", "validate_axiom",
    "verify",
]
