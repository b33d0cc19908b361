"""Small feed-forward classifier with hand-written gradients.

One hidden ReLU layer of 64 units and a sigmoid output. The backward pass is
coded directly (no autodiff dependency) because the training objective mixes
the usual cross-entropy with fairness penalties whose gradients arrive in
probability space.

Conventions fixed here and relied on by the gradient checks:
  * ReLU takes derivative 0 at exactly 0.
  * Output probabilities are clipped to [PROB_EPS, 1 - PROB_EPS] at a single
    point (the forward pass); the clip is flat, so clipped instances carry
    zero gradient through the output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fairforge.errors import ShapeMismatchError
from fairforge.fairrisk import PROB_EPS, _sig12

HIDDEN_UNITS = 64


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class ModelParams:
    """Weights of the two-layer network."""

    w1: np.ndarray   # (dim, hidden)
    b1: np.ndarray   # (hidden,)
    w2: np.ndarray   # (hidden,)
    b2: np.ndarray   # scalar, shape ()

    def as_dict(self) -> dict:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}

    def copy(self) -> "ModelParams":
        return ModelParams(self.w1.copy(), self.b1.copy(), self.w2.copy(),
                           self.b2.copy())

    @property
    def dim(self) -> int:
        return self.w1.shape[0]

    def to_jsonable(self) -> dict:
        def round12(arr):
            flat = [_sig12(v) for v in np.asarray(arr, dtype=np.float64).ravel()]
            return np.asarray(flat).reshape(np.shape(arr)).tolist()

        return {
            "hidden_units": int(self.w1.shape[1]),
            "w1": round12(self.w1),
            "b1": round12(self.b1),
            "w2": round12(self.w2),
            "b2": _sig12(float(self.b2)),
        }

    @classmethod
    def from_jsonable(cls, d: dict) -> "ModelParams":
        return cls(
            w1=np.asarray(d["w1"], dtype=np.float64),
            b1=np.asarray(d["b1"], dtype=np.float64),
            w2=np.asarray(d["w2"], dtype=np.float64),
            b2=np.asarray(d["b2"], dtype=np.float64),
        )


def init_params(dim: int, seed: int, hidden: int = HIDDEN_UNITS) -> ModelParams:
    """Glorot-uniform weights, zero biases, one seeded generator.

    Draw order (w1 then w2) is part of the reproducibility contract.
    """
    rng = np.random.default_rng(seed)
    lim1 = np.sqrt(6.0 / (dim + hidden))
    w1 = rng.uniform(-lim1, lim1, size=(dim, hidden))
    lim2 = np.sqrt(6.0 / (hidden + 1))
    w2 = rng.uniform(-lim2, lim2, size=hidden)
    return ModelParams(w1=w1, b1=np.zeros(hidden), w2=w2, b2=np.zeros(()))


def forward(params: ModelParams, x: np.ndarray):
    """Returns (clipped probabilities, cache for backward)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.dim:
        raise ShapeMismatchError(
            f"expected features of shape (n, {params.dim}), got {x.shape}"
        )
    z1 = x @ params.w1 + params.b1
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ params.w2 + params.b2
    p_raw = _sigmoid(z2)
    p = np.clip(p_raw, PROB_EPS, 1.0 - PROB_EPS)
    cache = {
        "x": x,
        "z1": z1,
        "a1": a1,
        "p_raw": p_raw,
        # clipped outputs are flat in the parameters
        "mask": (p_raw > PROB_EPS) & (p_raw < 1.0 - PROB_EPS),
    }
    return p, cache


def predict_proba(params: ModelParams, x: np.ndarray) -> np.ndarray:
    p, _ = forward(params, x)
    return p


def grad_logits_from_probs(cache: dict, dp: np.ndarray) -> np.ndarray:
    """Chains a probability-space gradient back to the pre-sigmoid output."""
    p_raw = cache["p_raw"]
    return dp * p_raw * (1.0 - p_raw) * cache["mask"]


def backward(params: ModelParams, cache: dict, dz2: np.ndarray) -> dict:
    """Gradients of the objective given d(objective)/d(pre-sigmoid output)."""
    a1 = cache["a1"]
    dw2 = a1.T @ dz2
    db2 = np.asarray(dz2.sum())
    da1 = dz2[:, None] * params.w2[None, :]
    dz1 = da1 * (cache["z1"] > 0.0)
    dw1 = cache["x"].T @ dz1
    db1 = dz1.sum(axis=0)
    return {"w1": dw1, "b1": db1, "w2": dw2, "b2": db2}
