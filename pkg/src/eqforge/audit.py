"""Leakage audit: shallow syntactic features and a trivial split classifier.

The features are exactly the cheap tells a lazy discriminator could use:
direct composition of two transcendental functions, a transcendental raised
to a non-integer power, a recognizable identity instance sitting strictly
below the top of a side, and raw size statistics.  The classifier is
deliberately weak (one optimal threshold per feature, majority vote) because
the question being asked is whether the dataset can be separated *easily*,
not whether it can be separated at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .axioms import AxiomSet
from .expr import Equation, Expr, UNARY_OPS, const_fraction, depth, node_count, positions
from .rewrite import match_pattern

# sqrt is algebraic; unary minus is structural.
TRANSCENDENTAL_OPS: frozenset[str] = UNARY_OPS - {"neg", "sqrt"}


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    composed_transcendental: int
    noninteger_power_of_transcendental: bool
    embedded_identity_fragment: bool
    node_count: int
    depth: int
    constant_count: int

    def numeric(self) -> tuple[float, ...]:
        return (float(self.composed_transcendental),
                float(self.noninteger_power_of_transcendental),
                float(self.embedded_identity_fragment),
                float(self.node_count),
                float(self.depth),
                float(self.constant_count))


FEATURE_NAMES = ("composed_transcendental", "noninteger_power_of_transcendental",
                 "embedded_identity_fragment", "node_count", "depth",
                 "constant_count")


def _is_transcendental(e: Expr) -> bool:
    return e.kind == "unary" and e.name in TRANSCENDENTAL_OPS


def count_composed_transcendental(eq: Equation) -> int:
    """Nodes applying a transcendental directly to a transcendental."""
    n = 0
    for side in eq.sides():
        for _, node in positions(side):
            if _is_transcendental(node) and _is_transcendental(node.args[0]):
                n += 1
    return n


def _is_integer_exponent(e: Expr) -> bool:
    if e.kind == "unary" and e.name == "neg":
        e = e.args[0]
    f = const_fraction(e)
    return f is not None and f.denominator == 1


def has_noninteger_power_of_transcendental(eq: Equation) -> bool:
    """Any pow node with a transcendental base and a non-integer exponent
    (a non-constant exponent counts as non-integer)."""
    for side in eq.sides():
        for _, node in positions(side):
            if (node.kind == "binary" and node.name == "pow"
                    and _is_transcendental(node.args[0])
                    and not _is_integer_exponent(node.args[1])):
                return True
    return False


def _has_const_unary_or_repeat(e: Expr) -> bool:
    seen_vars: set[str] = set()
    for _, node in positions(e):
        if node.kind in ("const", "unary"):
            return True
        if node.kind == "var":
            if node.name in seen_vars:
                return True
            seen_vars.add(node.name)
    return False


def _fragment_patterns(ax: AxiomSet) -> list:
    """Rule sides that are specific enough to signal 'an identity was planted
    here': at least 3 nodes and a constant, unary operator, or repeated
    variable.  Bare structural shapes over distinct variables (x+y, (x+y)+z)
    match far too much to mean anything."""
    cached = getattr(ax, "_fragment_patterns", None)
    if cached is not None:
        return cached
    patterns = []
    seen = set()
    for rule in ax.rewrite_rules():
        for side in (rule.lhs, rule.rhs):
            if side in seen:
                continue
            seen.add(side)
            if node_count(side) >= 3 and _has_const_unary_or_repeat(side):
                patterns.append(side)
    ax._fragment_patterns = patterns
    return patterns


def has_embedded_identity_fragment(eq: Equation, ax: AxiomSet) -> bool:
    """An identity-side instance strictly below the root of either side."""
    patterns = _fragment_patterns(ax)
    for side in eq.sides():
        for path, node in positions(side):
            if not path:
                continue
            for p in patterns:
                if match_pattern(p, node) is not None:
                    return True
    return False


def extract_features(eq: Equation, ax: AxiomSet) -> FeatureVector:
    constants = sum(1 for side in eq.sides()
                    for _, n in positions(side) if n.kind == "const")
    return FeatureVector(
        composed_transcendental=count_composed_transcendental(eq),
        noninteger_power_of_transcendental=has_noninteger_power_of_transcendental(eq),
        embedded_identity_fragment=has_embedded_identity_fragment(eq, ax),
        node_count=eq.node_count(),
        depth=max(depth(eq.lhs), depth(eq.rhs)),
        constant_count=constants,
    )


# ---------------------------------------------------------------------------
# Threshold classifier and report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureStat:
    name: str
    threshold: float
    predict_true_if_greater: bool
    train_accuracy: float
    mean_true: float
    mean_false: float


@dataclass(frozen=True)
class LeakageReport:
    n_records: int
    n_train: int
    n_eval: int
    accuracy: float
    bound: float
    leaky: bool
    features: tuple[FeatureStat, ...]

    def as_text(self) -> str:
        lines = [
            f"records: {self.n_records} (train {self.n_train}, eval {self.n_eval})",
            f"threshold-classifier eval accuracy: {self.accuracy:.4f}",
            f"leaky (> {self.bound:.2f}): {'yes' if self.leaky else 'no'}",
            "per-feature class means (true vs false) and train split:",
        ]
        for f in self.features:
            direction = ">" if f.predict_true_if_greater else "<="
            lines.append(
                f"  {f.name}: true={f.mean_true:.3f} false={f.mean_false:.3f} "
                f"vote-true if {direction} {f.threshold:.3f} "
                f"(train acc {f.train_accuracy:.3f})")
        return "\n".join(lines)

    def as_kv(self) -> str:
        lines = [
            f"records={self.n_records}",
            f"train={self.n_train}",
            f"eval={self.n_eval}",
            f"accuracy={self.accuracy:.6f}",
            f"bound={self.bound}",
            f"leaky={int(self.leaky)}",
        ]
        for f in self.features:
            lines.append(f"feature.{f.name}.mean_true={f.mean_true:.6f}")
            lines.append(f"feature.{f.name}.mean_false={f.mean_false:.6f}")
            lines.append(f"feature.{f.name}.train_accuracy={f.train_accuracy:.6f}")
        return "\n".join(lines)


def _best_threshold(values: list[float], labels: list[bool]
                    ) -> tuple[float, bool, float]:
    """Threshold and polarity with the best train accuracy, deterministically
    (first best wins over ascending thresholds, greater-polarity first)."""
    uniq = sorted(set(values))
    cands = [uniq[0] - 1.0]
    cands += [(a + b) / 2.0 for a, b in zip(uniq, uniq[1:])]
    n = len(values)
    best = (cands[0], True, -1.0)
    for t in cands:
        hits_gt = sum(1 for v, lab in zip(values, labels) if (v > t) == lab)
        for polarity, hits in ((True, hits_gt), (False, n - hits_gt)):
            acc = hits / n
            if acc > best[2]:
                best = (t, polarity, acc)
    return best


def leakage_report(records: Sequence, ax: AxiomSet, bound: float = 0.55
                   ) -> LeakageReport:
    """Fit per-feature thresholds on even-index records, score odd-index ones.

    ``records`` is any sequence with .equation and .label attributes; both
    classes must have at least 50 members.
    """
    labels = [bool(r.label) for r in records]
    if sum(labels) < 50 or (len(labels) - sum(labels)) < 50:
        raise InsufficientDataError(
            "need at least 50 records of each label for a leakage report")

    rows = [extract_features(r.equation, ax).numeric() for r in records]
    train_ix = range(0, len(rows), 2)
    eval_ix = range(1, len(rows), 2)

    stats: list[FeatureStat] = []
    voters: list[tuple[int, float, bool]] = []
    for f_ix, name in enumerate(FEATURE_NAMES):
        train_vals = [rows[i][f_ix] for i in train_ix]
        train_labs = [labels[i] for i in train_ix]
        t, gt, acc = _best_threshold(train_vals, train_labs)
        true_vals = [row[f_ix] for row, lab in zip(rows, labels) if lab]
        false_vals = [row[f_ix] for row, lab in zip(rows, labels) if not lab]
        stats.append(FeatureStat(name, t, gt, acc,
                                 sum(true_vals) / len(true_vals),
                                 sum(false_vals) / len(false_vals)))
        voters.append((f_ix, t, gt))

    train_true = sum(1 for i in train_ix if labels[i])
    majority_label = train_true * 2 >= len(list(train_ix))

    hits = 0
    for i in eval_ix:
        votes = 0
        for f_ix, t, gt in voters:
            pred = (rows[i][f_ix] > t) if gt else (rows[i][f_ix] <= t)
            votes += 1 if pred else -1
        if votes > 0:
            pred_label = True
        elif votes < 0:
            pred_label = False
        else:
            pred_label = majority_label
        hits += int(pred_label == labels[i])
    n_eval = len(list(eval_ix))
    accuracy = hits / n_eval
    return LeakageReport(len(rows), len(list(train_ix)), n_eval, accuracy,
                         bound, accuracy > bound, tuple(stats))
