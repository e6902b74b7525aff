"""Random-sampling floating-point verification of symbolic equations.

The verdict procedure: draw random values for the free variables, evaluate
both sides in float64, and compare.  A single valid sample whose sides differ
by more than the tolerance makes the equation almost certainly false; enough
valid samples all within tolerance make it almost certainly true.  Samples
where a side leaves its real domain are redrawn (up to a per-trial budget);
overflowing samples are discarded.  When too few valid samples can be
collected the verdict is Unknown rather than a guess.

Tolerance is either absolute (|l - r| <= eps) or relative with a floor of 1
(|l - r| <= eps * max(1, |l|, |r|)); the latter is the default so that large
and small magnitudes are treated evenhandedly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .expr import Equation, evaluate

TRUE = "true"
FALSE = "false"
UNKNOWN = "unknown"

ABSOLUTE = "absolute"
RELATIVE = "relative"  # relative with floor 1


@dataclass(frozen=True)
class OracleConfig:
    epsilon: float = 1e-6
    trials: int = 8
    interval: tuple[float, float] = (-3.14, 3.14)
    min_valid_samples: int = 3
    resample_limit: int = 16
    tolerance_mode: str = RELATIVE

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.trials < 1 or self.min_valid_samples < 1 or self.resample_limit < 1:
            raise ValueError("trials, min_valid_samples and resample_limit must be >= 1")
        if self.interval[0] >= self.interval[1]:
            raise ValueError("interval must be nonempty")
        if self.tolerance_mode not in (ABSOLUTE, RELATIVE):
            raise ValueError(f"unknown tolerance mode {self.tolerance_mode!r}")

    def tolerance(self, lhs: float, rhs: float) -> float:
        if self.tolerance_mode == ABSOLUTE:
            return self.epsilon
        return self.epsilon * max(1.0, abs(lhs), abs(rhs))

    def stricter(self, factor: int = 2) -> "OracleConfig":
        """Same thresholds with the trial count multiplied."""
        return replace(self, trials=self.trials * factor)


@dataclass(frozen=True)
class Sample:
    """One valid evaluation: environment, both side values, raw |l - r|."""

    env: tuple[tuple[str, float], ...]
    lhs: float
    rhs: float
    deviation: float
    within: bool


@dataclass(frozen=True)
class Verdict:
    outcome: str  # TRUE | FALSE | UNKNOWN
    samples: tuple[Sample, ...]
    domain_errors: int
    overflows: int

    @property
    def valid_samples(self) -> int:
        return len(self.samples)

    @property
    def max_deviation(self) -> float | None:
        if not self.samples:
            return None
        return max(s.deviation for s in self.samples)

    def summary(self) -> dict:
        return {
            "outcome": self.outcome,
            "valid_samples": self.valid_samples,
            "domain_errors": self.domain_errors,
            "overflows": self.overflows,
            "max_deviation": self.max_deviation,
        }


def sample_env(variables: Sequence[str], cfg: OracleConfig,
               rng: random.Random) -> dict[str, float]:
    """Independent uniform draw over cfg.interval for each variable."""
    lo, hi = cfg.interval
    return {v: rng.uniform(lo, hi) for v in sorted(variables)}


def collect_evidence(eq: Equation, cfg: OracleConfig, rng: random.Random,
                     stop_on_witness: bool = True) -> Verdict:
    """Run the sampling loop and classify.

    With ``stop_on_witness`` the loop exits on the first sample whose sides
    differ by more than the tolerance (the normal verification behavior);
    without it, all trials are collected, which generation gates use to
    demand that every valid sample deviates before accepting a mutant.
    """
    variables = sorted(eq.free_variables())
    samples: list[Sample] = []
    domain_errors = 0
    overflows = 0
    witness = False

    trials = cfg.trials if variables else 1  # ground: one evaluation decides
    resamples = cfg.resample_limit if variables else 1
    for _ in range(trials):
        for _ in range(resamples):
            env = sample_env(variables, cfg, rng)
            left = evaluate(eq.lhs, env)
            if left.outcome == "domain_error":
                domain_errors += 1
                continue
            if left.outcome == "overflow":
                overflows += 1
                break
            right = evaluate(eq.rhs, env)
            if right.outcome == "domain_error":
                domain_errors += 1
                continue
            if right.outcome == "overflow":
                overflows += 1
                break
            dev = abs(left.value - right.value)
            within = dev <= cfg.tolerance(left.value, right.value)
            samples.append(Sample(tuple(sorted(env.items())), left.value,
                                  right.value, dev, within))
            if not within:
                witness = True
            break
        if witness and stop_on_witness:
            break

    min_valid = cfg.min_valid_samples if variables else 1
    if witness:
        outcome = FALSE
    elif len(samples) >= min_valid and all(s.within for s in samples):
        outcome = TRUE
    else:
        outcome = UNKNOWN
    return Verdict(outcome, tuple(samples), domain_errors, overflows)


def verify(eq: Equation, cfg: OracleConfig, rng: random.Random) -> Verdict:
    """Verdict for one equation: true, false, or unknown, with evidence."""
    return collect_evidence(eq, cfg, rng, stop_on_witness=True)


DEFAULT_ORACLE = OracleConfig()
