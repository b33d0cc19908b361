"""The eight ratio-based fairness metrics and their gradients.

Every metric compares predicted probabilities of the favorable outcome across
the two demographic groups, as a ratio symmetrized to (0, 1] (1 = perfect
parity, values below 1 scale like the 80% rule). A metric is one combination
of three toggles:

  granularity   individual (average of matched pairwise ratios)
                vs. group (ratio of group averages)
  stance        infra_marginal (compare only instances matched on the
                fair-risk score) vs. intersectional (no matching at group
                level; at individual level match on the parity-shifted score)
  regime        outcome (all instances) vs. eoo (only instances whose true
                label is positive)

All kernels are differentiable in the prediction vector away from the
ratio=1 kinks; at a kink the ratio<=1 branch is used. Gradients treat the
matching structure and eligibility masks as constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fairforge.data import TabularDataset
from fairforge.errors import EmptyEOOPoolError, EmptyGroupError, EmptyMatchingError
from fairforge.fairrisk import (
    AXIS_RAW,
    AXIS_SHIFTED,
    PROB_EPS,
    FairRiskProfile,
    MatchedPairs,
    match_pairs,
)

GRANULARITIES = ("individual", "group")
STANCES = ("infra_marginal", "intersectional")
REGIMES = ("outcome", "eoo")


@dataclass(frozen=True)
class MetricSpec:
    """One (granularity, stance, regime) combination."""

    granularity: str
    stance: str
    regime: str

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"unknown granularity {self.granularity!r}")
        if self.stance not in STANCES:
            raise ValueError(f"unknown stance {self.stance!r}")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")

    @property
    def metric_id(self) -> str:
        return f"{self.granularity}.{self.stance}.{self.regime}"

    @classmethod
    def from_id(cls, metric_id: str) -> "MetricSpec":
        parts = metric_id.split(".")
        if len(parts) != 3:
            raise ValueError(f"bad metric id {metric_id!r}")
        return cls(*parts)

    @property
    def uses_matching(self) -> bool:
        return self.granularity == "individual" or self.stance == "infra_marginal"

    @property
    def matching_axis(self) -> str:
        # Individual-intersectional matches on the parity-shifted score;
        # every other matching variant uses the raw fair-risk score.
        if self.granularity == "individual" and self.stance == "intersectional":
            return AXIS_SHIFTED
        return AXIS_RAW


METRIC_IDS = [
    MetricSpec(g, s, r).metric_id for g in GRANULARITIES for s in STANCES for r in REGIMES
]
METRIC_SPECS = [MetricSpec.from_id(m) for m in METRIC_IDS]


@dataclass
class MetricValue:
    """A computed metric: symmetrized value in (0, 1] plus the raw ratio."""

    value: float
    raw_ratio: float
    support: dict

    def to_dict(self) -> dict:
        return {"value": self.value, "raw_ratio": self.raw_ratio, "support": self.support}


class EvalContext:
    """Frozen per-pool structure the metrics are evaluated against.

    Holds the pool's labels and group mask plus lazily built matchings for
    each (axis, regime) combination. Matchings depend only on the fair-risk
    profile, never on classifier parameters, so one context serves an entire
    training run or sweep point.
    """

    def __init__(self, labels: np.ndarray, privileged: np.ndarray,
                 scores: np.ndarray, shifted_scores: np.ndarray):
        self.labels = np.asarray(labels, dtype=np.int64)
        self.privileged = np.asarray(privileged, dtype=bool)
        self._axes = {AXIS_RAW: np.asarray(scores, dtype=np.float64),
                      AXIS_SHIFTED: np.asarray(shifted_scores, dtype=np.float64)}
        self._pairs: dict[tuple[str, str], MatchedPairs] = {}

    @property
    def n(self) -> int:
        return len(self.labels)

    def eligible(self, regime: str) -> np.ndarray:
        if regime == "eoo":
            return self.labels == 1
        return np.ones(self.n, dtype=bool)

    def pairs(self, axis: str, regime: str) -> MatchedPairs:
        key = (axis, regime)
        if key not in self._pairs:
            eligible = self.eligible(regime)
            if regime == "eoo":
                for name, mask in (("unprivileged", ~self.privileged), ("privileged", self.privileged)):
                    if not (eligible & mask).any():
                        raise EmptyEOOPoolError(f"{name} group has no positive-label instances")
            self._pairs[key] = match_pairs(
                self._axes[axis], self.privileged, eligible, axis=axis, regime=regime
            )
        return self._pairs[key]


def make_eval_context(ds: TabularDataset, profile: FairRiskProfile, split: str) -> EvalContext:
    """Builds the evaluation context for one split of a dataset."""
    idx = ds.split_indices(split)
    return EvalContext(
        labels=ds.labels[idx],
        privileged=ds.privileged[idx],
        scores=profile.scores[idx],
        shifted_scores=profile.shifted_scores[idx],
    )


def _clamp(preds: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(preds, dtype=np.float64), PROB_EPS, 1.0 - PROB_EPS)


def _symmetrize(raw: float) -> float:
    return raw if raw <= 1.0 else 1.0 / raw


def group_ratio(preds, privileged, regime, labels, want_grad=False):
    """Ratio of mean predicted probability, unprivileged over privileged.

    Under the EOO regime both averages run over true-positive instances only.
    """
    p = _clamp(preds)
    privileged = np.asarray(privileged, dtype=bool)
    labels = np.asarray(labels, dtype=np.int64)
    eligible = labels == 1 if regime == "eoo" else np.ones(len(p), dtype=bool)
    unpriv = eligible & ~privileged
    priv = eligible & privileged
    if not unpriv.any() or not priv.any():
        if regime == "eoo" and (privileged.any() and (~privileged).any()):
            raise EmptyEOOPoolError("a group has no positive-label instances")
        raise EmptyGroupError("group ratio needs both groups nonempty")

    n_u, n_p = int(unpriv.sum()), int(priv.sum())
    a = float(p[unpriv].mean())
    b = float(p[priv].mean())
    raw = a / b
    value = _symmetrize(raw)
    mv = MetricValue(value=value, raw_ratio=raw,
                     support={"unprivileged": n_u, "privileged": n_p})
    if not want_grad:
        return mv

    grad = np.zeros(len(p))
    if raw <= 1.0:
        grad[unpriv] = (1.0 / b) / n_u
        grad[priv] = (-a / (b * b)) / n_p
    else:
        grad[unpriv] = (-b / (a * a)) / n_u
        grad[priv] = (1.0 / a) / n_p
    return mv, grad


def _oriented_sides(p: np.ndarray, pairs: MatchedPairs) -> tuple[np.ndarray, np.ndarray]:
    """Returns (unprivileged positions, privileged positions) per pair."""
    if pairs.query_group == "unprivileged":
        return pairs.query_indices, pairs.reference_indices
    return pairs.reference_indices, pairs.query_indices


def pairwise_ratio(preds, pairs: MatchedPairs, want_grad=False):
    """Mean of per-pair symmetrized probability ratios over matched pairs."""
    if len(pairs) == 0:
        raise EmptyMatchingError("no matched pairs")
    p = _clamp(preds)
    u_idx, v_idx = _oriented_sides(p, pairs)
    a = p[u_idx]                     # unprivileged side
    b = p[v_idx]                     # privileged side
    rho = a / b
    terms = np.minimum(rho, 1.0 / rho)
    k = len(pairs)
    mv = MetricValue(value=float(terms.mean()), raw_ratio=float(rho.mean()),
                     support={"pairs": k})
    if not want_grad:
        return mv

    grad = np.zeros(len(p))
    le = rho <= 1.0
    da = np.where(le, 1.0 / b, -b / (a * a)) / k
    db = np.where(le, -a / (b * b), 1.0 / a) / k
    np.add.at(grad, u_idx, da)
    np.add.at(grad, v_idx, db)
    return mv, grad


def matched_group_ratio(preds, pairs: MatchedPairs, want_grad=False):
    """Group-average ratio restricted to the matched sample.

    Reference-side instances count once per pair they appear in.
    """
    if len(pairs) == 0:
        raise EmptyMatchingError("no matched pairs")
    p = _clamp(preds)
    u_idx, v_idx = _oriented_sides(p, pairs)
    k = len(pairs)
    a = float(p[u_idx].mean())       # unprivileged side
    b = float(p[v_idx].mean())       # privileged side
    raw = a / b
    mv = MetricValue(value=_symmetrize(raw), raw_ratio=raw, support={"pairs": k})
    if not want_grad:
        return mv

    grad = np.zeros(len(p))
    if raw <= 1.0:
        da, db = (1.0 / b) / k, (-a / (b * b)) / k
    else:
        da, db = (-b / (a * a)) / k, (1.0 / a) / k
    np.add.at(grad, u_idx, np.full(k, da))
    np.add.at(grad, v_idx, np.full(k, db))
    return mv, grad


def compute_metric(spec: MetricSpec, preds, ctx: EvalContext, want_grad=False):
    """Routes one metric spec to its kernel over the evaluation context."""
    if spec.granularity == "individual":
        pairs = ctx.pairs(spec.matching_axis, spec.regime)
        return pairwise_ratio(preds, pairs, want_grad=want_grad)
    if spec.stance == "infra_marginal":
        pairs = ctx.pairs(AXIS_RAW, spec.regime)
        return matched_group_ratio(preds, pairs, want_grad=want_grad)
    return group_ratio(preds, ctx.privileged, spec.regime, ctx.labels, want_grad=want_grad)


def compute_all_metrics(preds, ctx: EvalContext, on_error: str = "raise") -> dict:
    """All eight metric values keyed by metric id.

    With on_error="none", metrics whose pools are empty come back as None
    instead of raising (used for per-epoch dev traces).
    """
    out = {}
    for spec in METRIC_SPECS:
        try:
            out[spec.metric_id] = compute_metric(spec, preds, ctx).value
        except (EmptyGroupError, EmptyMatchingError):
            if on_error != "none":
                raise
            out[spec.metric_id] = None
    return out


METRIC_DESCRIPTORS = {
    "individual.infra_marginal.outcome": {
        "name": "Matched individual parity",
        "description": (
            "Pairs each person with a similarly qualified person from the other "
            "group (matched on the fair-risk score) and averages the ratio of "
            "their predicted chances of the favorable outcome. High values mean "
            "equally qualified individuals get similar predictions."
        ),
    },
    "individual.infra_marginal.eoo": {
        "name": "Matched individual parity among the qualified",
        "description": (
            "Like matched individual parity, but compares only people whose true "
            "outcome was positive: among those who genuinely qualify, similarly "
            "qualified individuals from different groups should score alike."
        ),
    },
    "individual.intersectional.outcome": {
        "name": "Baseline-adjusted individual parity",
        "description": (
            "First levels the groups' average fair-risk scores, then pairs "
            "individuals across groups and averages their prediction ratios. "
            "This counters baseline disadvantage before comparing individuals."
        ),
    },
    "individual.intersectional.eoo": {
        "name": "Baseline-adjusted individual parity among the qualified",
        "description": (
            "The baseline-adjusted pairing restricted to people whose true "
            "outcome was positive, so qualified members of the disadvantaged "
            "group are compared after correcting for the group's baseline."
        ),
    },
    "group.infra_marginal.outcome": {
        "name": "Matched group parity",
        "description": (
            "Compares the groups' average predicted chances over the matched "
            "sample only, so the comparison is restricted to people with "
            "similar fair-risk levels across groups."
        ),
    },
    "group.infra_marginal.eoo": {
        "name": "Matched group parity among the qualified",
        "description": (
            "Matched group parity computed only over true positives: among "
            "people who genuinely qualify and are similarly risk-scored, the "
            "groups' average predictions should agree."
        ),
    },
    "group.intersectional.outcome": {
        "name": "Group outcome parity",
        "description": (
            "The ratio of the groups' average predicted chances over everyone, "
            "with no matching: outcomes should be balanced across groups "
            "regardless of underlying differences (the classic 80%-rule view)."
        ),
    },
    "group.intersectional.eoo": {
        "name": "Group opportunity parity",
        "description": (
            "The ratio of the groups' average predicted chances among true "
            "positives: people who genuinely qualify should be recognized at "
            "the same rate in both groups."
        ),
    },
}
