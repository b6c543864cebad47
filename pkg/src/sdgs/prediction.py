"""Prediction stage: group-sparse representation plus score thresholding.

A sample's coefficients are computed by the group-lasso solver; a label
is emitted whenever the magnitude sum of its coefficient group reaches
the threshold. Labels whose basis ended up empty can never be selected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .group_lasso import GroupSparseCoefficients, SolverConfig, solve

FALLBACKS = ("allow-empty", "top1")
SCORE_NORMS = ("l1", "l2")


@dataclass(frozen=True)
class PredictionConfig:
    """Prediction hyperparameters.

    lam: penalty weight handed to the solver.
    delta: minimum group score for a label to fire; with delta == 0
        every label with a nonempty basis is selected.
    empty_fallback: "allow-empty" keeps an empty prediction; "top1"
        promotes the single best-scoring label instead (ties go to the
        smallest label index).
    score_norm: "l1" scores a group by the magnitude sum of its
        coefficients, "l2" by their Euclidean norm.
    """

    lam: float = 0.3
    delta: float = 1e-3
    empty_fallback: str = "allow-empty"
    score_norm: str = "l1"
    max_iters: int = 1000
    kkt_tolerance: float = 1e-6
    acceleration: bool = True

    def __post_init__(self):
        if self.delta < 0:
            raise InvalidInputError("delta must be nonnegative")
        if self.empty_fallback not in FALLBACKS:
            raise InvalidInputError(f"unknown fallback {self.empty_fallback!r}, expected one of {FALLBACKS}")
        if self.score_norm not in SCORE_NORMS:
            raise InvalidInputError(f"unknown score norm {self.score_norm!r}, expected one of {SCORE_NORMS}")

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            lam=self.lam,
            max_iters=self.max_iters,
            kkt_tolerance=self.kkt_tolerance,
            acceleration=self.acceleration,
        )


@dataclass
class LabelPrediction:
    """One predicted label vector with its evidence."""

    labels: np.ndarray
    group_scores: np.ndarray
    coefficients: GroupSparseCoefficients

    @property
    def converged(self) -> bool:
        return self.coefficients.converged


def threshold_scores(scores: np.ndarray, widths: np.ndarray, cfg: PredictionConfig) -> np.ndarray:
    """Label vector from group scores: fire where score >= delta.

    Labels with empty groups never fire. With the top1 fallback an
    otherwise empty prediction promotes the best-scoring nonempty label,
    ties going to the smallest index.
    """
    selected = (widths > 0) & (scores >= cfg.delta)
    if not selected.any() and cfg.empty_fallback == "top1" and (widths > 0).any():
        candidate_scores = np.where(widths > 0, scores, -np.inf)
        selected[int(np.argmax(candidate_scores))] = True
    return selected.astype(np.int8)


def predict(x, model, cfg: PredictionConfig, start=None) -> LabelPrediction:
    """Predict the label vector of a single sample.

    The sample must live in the model's feature space (apply the model's
    stored normalization to raw inputs first). A non-converged solve
    still yields a prediction; the flag travels on the coefficients.
    """
    coeffs = solve(x, model, cfg.solver_config(), start=start)
    scores = coeffs.group_norms(cfg.score_norm)
    widths = np.array(model.group_widths())
    return LabelPrediction(
        labels=threshold_scores(scores, widths, cfg),
        group_scores=scores,
        coefficients=coeffs,
    )


def predict_batch(X, model, cfg: PredictionConfig, warm_start: bool = False) -> list[LabelPrediction]:
    """Row-wise prediction, order preserved and deterministic.

    With ``warm_start`` each solve starts from the previous sample's
    coefficients; correctness is unaffected because every solve carries
    its own optimality certificate.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidInputError(f"expected a 2-D sample matrix, got shape {X.shape}")
    if X.shape[1] != model.n_features:
        raise InvalidInputError(f"samples have {X.shape[1]} features, model expects {model.n_features}")
    out: list[LabelPrediction] = []
    previous = None
    for row in X:
        prediction = predict(row, model, cfg, start=previous)
        out.append(prediction)
        if warm_start:
            previous = prediction.coefficients.beta
    return out
