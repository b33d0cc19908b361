"""Fair-risk scores, the group parity shift, and cross-group 1-NN matching.

The fair-risk score of an instance is the probability of the positive label
predicted by a small logistic model trained only on the designated fair
features. Matching pairs each instance of the smaller group with its nearest
reference-group instance on that scalar score (optionally after a constant
shift that levels the group means), producing the controlled comparisons the
individual and infra-marginal metrics are built on.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from fairforge.data import TabularDataset
from fairforge.errors import EmptyGroupError

log = logging.getLogger(__name__)

PROB_EPS = 1e-8
L2_PENALTY = 1e-4
GRAD_TOL = 1e-6
MAX_ITERS = 10_000

AXIS_RAW = "raw_scores"
AXIS_SHIFTED = "shifted_scores"


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class FairRiskModel:
    """Logistic model over encoded fair features (raw scale)."""

    coefficients: np.ndarray
    intercept: float
    feature_names: list[str]
    converged: bool = True

    def scores(self, fair_features: np.ndarray) -> np.ndarray:
        z = fair_features @ self.coefficients + self.intercept
        return np.clip(_sigmoid(z), PROB_EPS, 1.0 - PROB_EPS)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "kind": "fairforge.fair_risk_model",
            "feature_names": list(self.feature_names),
            "coefficients": [_sig12(c) for c in self.coefficients],
            "intercept": _sig12(self.intercept),
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass
class FairRiskProfile:
    """Per-instance fair-risk scores plus the parity-shifted axis.

    The shift constant is the unprivileged minus privileged mean score;
    privileged scores move by that constant, so the group means coincide on
    the shifted axis.
    """

    scores: np.ndarray
    shift_constant: float
    shifted_scores: np.ndarray


@dataclass
class MatchedPairs:
    """Cross-group (query, reference) index pairs matched 1-NN on a score axis.

    Queries come from the smaller eligible group, every eligible query appears
    exactly once, and references may repeat. Indices address rows of whatever
    pool the matching was built over.
    """

    query_indices: np.ndarray
    reference_indices: np.ndarray
    query_group: str          # "privileged" | "unprivileged"
    axis: str                 # AXIS_RAW | AXIS_SHIFTED
    regime: str               # "outcome" | "eoo"

    def __len__(self) -> int:
        return len(self.query_indices)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "kind": "fairforge.matched_pairs",
            "pairs": [[int(q), int(r)] for q, r in zip(self.query_indices, self.reference_indices)],
            "query_group": self.query_group,
            "axis": self.axis,
            "regime": self.regime,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _sig12(x: float) -> float:
    return float(f"{float(x):.12g}")


def fit_fair_risk(ds: TabularDataset) -> FairRiskModel:
    """Fits the fair-risk logistic model on the train split.

    Plain gradient descent on the mean logistic loss with an L2 penalty of
    1e-4 (intercept unpenalized), run until the gradient norm drops below
    1e-6 or 10,000 iterations. Features are standardized internally for
    conditioning; the returned coefficients are folded back to raw scale.
    """
    if ds.fair_features.shape[1] == 0:
        raise ValueError("dataset has no fair feature columns")
    train = ds.split_indices("train")
    X = ds.fair_features[train]
    y = ds.labels[train].astype(np.float64)
    if y.min() == y.max():
        raise EmptyGroupError("train split contains a single label value")

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    degenerate = bool((std == 0.0).all())
    if degenerate:
        log.warning("all fair-feature rows are identical; model reduces to an intercept")
    std = np.where(std == 0.0, 1.0, std)
    Xs = (X - mean) / std

    n, d = Xs.shape
    w = np.zeros(d)
    b = 0.0
    # Step size from the logistic-loss curvature bound: H <= X'X/(4n) + penalty.
    lip = float(np.linalg.eigvalsh(Xs.T @ Xs / (4.0 * n)).max()) + L2_PENALTY
    step = 1.0 / lip

    converged = False
    for _ in range(MAX_ITERS):
        p = _sigmoid(Xs @ w + b)
        residual = (p - y) / n
        gw = Xs.T @ residual + L2_PENALTY * w
        gb = residual.sum()
        norm = float(np.sqrt(gw @ gw + gb * gb))
        if norm < GRAD_TOL:
            converged = True
            break
        w -= step * gw
        b -= step * gb
    if not converged:
        log.warning("fair-risk fit hit the iteration cap (gradient norm %.3g)", norm)

    coef = w / std
    intercept = float(b - (w * mean / std).sum())
    return FairRiskModel(
        coefficients=coef,
        intercept=intercept,
        feature_names=list(ds.fair_feature_names),
        converged=converged,
    )


def parity_shift(scores: np.ndarray, privileged: np.ndarray) -> tuple[float, np.ndarray]:
    """Levels group baselines: shift privileged scores so group means coincide.

    Returns (shift constant, shifted scores); the constant is the unprivileged
    mean minus the privileged mean, added to privileged scores only.
    """
    privileged = np.asarray(privileged, dtype=bool)
    if privileged.all() or not privileged.any():
        raise EmptyGroupError("parity shift needs both groups nonempty")
    scores = np.asarray(scores, dtype=np.float64)
    c = float(scores[~privileged].mean() - scores[privileged].mean())
    shifted = scores.copy()
    shifted[privileged] += c
    return c, shifted


def build_profile(model: FairRiskModel, ds: TabularDataset) -> FairRiskProfile:
    """Scores every instance and applies the parity shift over the full dataset."""
    scores = model.scores(ds.fair_features)
    c, shifted = parity_shift(scores, ds.privileged)
    return FairRiskProfile(scores=scores, shift_constant=c, shifted_scores=shifted)


def match_pairs(
    scores_axis: np.ndarray,
    privileged: np.ndarray,
    eligible_mask: np.ndarray,
    axis: str = AXIS_RAW,
    regime: str = "outcome",
) -> MatchedPairs:
    """1-NN cross-group matching on a scalar score axis.

    The query group is the smaller eligible group (unprivileged on ties);
    each eligible query maps to the eligible reference instance minimizing
    the absolute score difference, ties broken by lowest reference index.
    """
    scores_axis = np.asarray(scores_axis, dtype=np.float64)
    privileged = np.asarray(privileged, dtype=bool)
    eligible_mask = np.asarray(eligible_mask, dtype=bool)

    unpriv_pool = np.flatnonzero(eligible_mask & ~privileged)
    priv_pool = np.flatnonzero(eligible_mask & privileged)
    if len(unpriv_pool) == 0 or len(priv_pool) == 0:
        raise EmptyGroupError(
            f"matching needs both groups eligible (regime={regime!r}); "
            f"got {len(unpriv_pool)} unprivileged / {len(priv_pool)} privileged"
        )

    if len(unpriv_pool) <= len(priv_pool):
        query_pool, reference_pool, query_group = unpriv_pool, priv_pool, "unprivileged"
    else:
        query_pool, reference_pool, query_group = priv_pool, unpriv_pool, "privileged"

    ref_scores = scores_axis[reference_pool]
    # Collapse duplicate reference scores to (value, lowest original index):
    # the 1-NN with lowest-index tie-break only ever needs those.
    order = np.argsort(ref_scores, kind="stable")
    sorted_scores = ref_scores[order]
    sorted_refs = reference_pool[order]
    first_of_run = np.ones(len(sorted_scores), dtype=bool)
    first_of_run[1:] = sorted_scores[1:] != sorted_scores[:-1]
    values = sorted_scores[first_of_run]
    min_ref = np.minimum.reduceat(sorted_refs, np.flatnonzero(first_of_run))

    q_scores = scores_axis[query_pool]
    pos = np.searchsorted(values, q_scores)
    left = np.clip(pos - 1, 0, len(values) - 1)
    right = np.clip(pos, 0, len(values) - 1)
    dist_left = np.abs(q_scores - values[left])
    dist_right = np.abs(values[right] - q_scores)

    refs = np.where(dist_left < dist_right, min_ref[left], min_ref[right])
    tie = dist_left == dist_right
    refs[tie] = np.minimum(min_ref[left[tie]], min_ref[right[tie]])

    return MatchedPairs(
        query_indices=query_pool,
        reference_indices=refs,
        query_group=query_group,
        axis=axis,
        regime=regime,
    )
