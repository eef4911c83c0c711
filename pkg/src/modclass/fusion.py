"""Per-antenna decisions and their fusion into a final modulation verdict.

Each antenna's probability vector is reduced to a hard label (argmax with
a tolerance-based tie set, ties broken uniformly at random). Labels are
then fused by plurality vote or an n-out-of-Nr rule. A soft-averaging
rule is available as a non-standard extra for experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cnn.model import DecisionVector
from .errors import ConfigurationError

ARGMAX_TOL = 1e-9


@dataclass(frozen=True)
class FusionRule:
    kind: str  # "majority" | "n_out_of" | "soft"
    n: int | None = None

    def __post_init__(self):
        if self.kind not in ("majority", "n_out_of", "soft"):
            raise ConfigurationError(f"unknown fusion rule {self.kind!r}")
        if self.kind == "n_out_of":
            if self.n is None or self.n < 1:
                raise ConfigurationError("n_out_of rule needs n >= 1")
        elif self.n is not None:
            raise ConfigurationError(f"rule {self.kind!r} takes no n")


MAJORITY = FusionRule("majority")


@dataclass(frozen=True)
class FusionOutcome:
    final_label: object
    per_antenna_labels: tuple
    tie_broken: bool
    undecided: bool


def decide_single(d, rng, tol: float = ARGMAX_TOL):
    """Hard decision for one probability vector: (label index, tie_broken).

    All classes within `tol` of the maximum form the argmax set; a set of
    two or more is resolved uniformly at random.
    """
    probs = d.probs if isinstance(d, DecisionVector) else DecisionVector(d).probs
    top = probs.max()
    tied = np.flatnonzero(probs >= top - tol)
    if len(tied) == 1:
        return int(tied[0]), False
    rng = np.random.default_rng(rng)
    return int(tied[rng.integers(len(tied))]), True


def fuse(labels, rule: FusionRule, rng) -> FusionOutcome:
    """Fuse hard labels into a final verdict.

    Majority takes the plurality, breaking count ties uniformly at random.
    n_out_of returns the label of the most-voted class reaching n votes
    (count ties again random) or an undecided outcome when none does.
    """
    labels = list(labels)
    if not labels:
        raise ConfigurationError("cannot fuse an empty label list")
    if rule.kind == "soft":
        raise ConfigurationError("soft fusion operates on decision vectors; use fuse_decisions")

    counts: dict = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1

    if rule.kind == "majority":
        threshold = max(counts.values())
    else:
        threshold = rule.n
        if not any(c >= threshold for c in counts.values()):
            return FusionOutcome(None, tuple(labels), False, True)
        threshold = max(c for c in counts.values() if c >= rule.n)

    # candidates in first-occurrence order so tie-breaking is deterministic per seed
    candidates = [lab for lab in counts if counts[lab] >= threshold]
    if len(candidates) == 1:
        return FusionOutcome(candidates[0], tuple(labels), False, False)
    rng = np.random.default_rng(rng)
    pick = candidates[int(rng.integers(len(candidates)))]
    return FusionOutcome(pick, tuple(labels), True, False)


def fuse_decisions(decisions, rule: FusionRule, rng) -> FusionOutcome:
    """Reduce per-antenna probability vectors to labels and fuse them.

    With the "soft" rule the vectors are averaged before a single argmax
    instead (not part of the hard-vote scheme; kept for experiments).
    """
    decisions = list(decisions)
    if not decisions:
        raise ConfigurationError("cannot fuse an empty decision list")
    rng = np.random.default_rng(rng)
    if rule.kind == "soft":
        stacked = np.stack(
            [d.probs if isinstance(d, DecisionVector) else np.asarray(d) for d in decisions]
        )
        label, tie = decide_single(DecisionVector(stacked.mean(axis=0)), rng)
        per_antenna = []
        for d in decisions:
            lab, _ = decide_single(d, rng)
            per_antenna.append(lab)
        return FusionOutcome(label, tuple(per_antenna), tie, False)

    labels = []
    any_tie = False
    for d in decisions:
        lab, tie = decide_single(d, rng)
        labels.append(lab)
        any_tie = any_tie or tie
    outcome = fuse(labels, rule, rng)
    return FusionOutcome(
        outcome.final_label,
        outcome.per_antenna_labels,
        outcome.tie_broken or any_tie,
        outcome.undecided,
    )
