"""One-class SVM over precomputed Gram matrices, plus ROC/AUC evaluation.

Training solves the dual
    min_alpha  1/2 alpha^T K alpha
    s.t.       0 <= alpha_i <= 1/(nu m),  sum_i alpha_i = 1
by pairwise coordinate updates: pick the maximally KKT-violating pair,
solve the 1-d subproblem exactly on the feasible segment that preserves
the sum and the box.  nu upper-bounds the fraction of margin errors and
lower-bounds the fraction of support vectors.

Label convention: regular (SM) samples are +1, anomalous (BSM) are -1.
The anomaly score used for ROC curves is the negated decision score, so
anomalies are the positive class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "OcsvmModel",
    "RocCurve",
    "OcsvmError",
    "train_ocsvm",
    "decision_scores",
    "roc_auc",
    "save_roc_csv",
]

KKT_TOL = 1e-7
SUPPORT_TOL = 1e-9
MAX_SWEEPS = 10**5


class OcsvmError(ValueError):
    pass


@dataclass(frozen=True)
class OcsvmModel:
    alphas: np.ndarray
    rho: float
    support_indices: tuple[int, ...]
    nu: float
    objective: float
    rho_fallback: bool = False


@dataclass(frozen=True)
class RocCurve:
    """ROC points (fpr, tpr) from (0,0) to (1,1) and the trapezoidal AUC."""
    points: np.ndarray
    auc: float


def train_ocsvm(K_train: np.ndarray, nu: float) -> OcsvmModel:
    """Solve the one-class dual over a precomputed training Gram matrix."""
    K = np.asarray(K_train, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise OcsvmError(f"training Gram must be square, got {K.shape}")
    if np.max(np.abs(K - K.T)) > 1e-10:
        raise OcsvmError("training Gram must be symmetric")
    m = K.shape[0]
    if not 0.0 < nu < 1.0:
        raise OcsvmError(f"nu must lie in (0, 1), got {nu}")
    upper = 1.0 / (nu * m)
    if nu * m < 1.0:
        raise OcsvmError(
            f"infeasible problem: nu*m = {nu * m:.4g} < 1 makes the box too tight")

    alpha = np.full(m, 1.0 / m)
    grad = K @ alpha  # gradient of 1/2 a^T K a

    for _ in range(MAX_SWEEPS):
        can_down = alpha > SUPPORT_TOL            # may decrease
        can_up = alpha < upper - SUPPORT_TOL      # may increase
        g_down = np.where(can_down, grad, -np.inf)
        g_up = np.where(can_up, grad, np.inf)
        i = int(np.argmax(g_down))   # first index wins ties
        j = int(np.argmin(g_up))
        violation = g_down[i] - g_up[j]
        if violation <= KKT_TOL:
            break
        # move delta mass from i to j; curvature of the 1-d subproblem
        curv = K[i, i] + K[j, j] - 2.0 * K[i, j]
        max_step = min(alpha[i], upper - alpha[j])
        if curv > 1e-15:
            step = min(violation / curv, max_step)
        else:
            step = max_step
        if step <= 0.0:
            break
        alpha[i] -= step
        alpha[j] += step
        grad += step * (K[:, j] - K[:, i])

    support = tuple(int(i) for i in np.flatnonzero(alpha > SUPPORT_TOL))
    free = (alpha > SUPPORT_TOL) & (alpha < upper - SUPPORT_TOL)
    rho_fallback = False
    if np.any(free):
        rho = float(np.mean(grad[free]))
    else:
        # KKT brackets rho between bound-SV scores and zero-alpha scores
        at_bound = alpha >= upper - SUPPORT_TOL
        at_zero = alpha <= SUPPORT_TOL
        lo = np.max(grad[at_bound]) if np.any(at_bound) else -np.inf
        hi = np.min(grad[at_zero]) if np.any(at_zero) else np.inf
        if not np.isfinite(lo) and not np.isfinite(hi):
            raise OcsvmError("cannot recover offset: no KKT bracket")
        if not np.isfinite(lo):
            rho = float(hi)
        elif not np.isfinite(hi):
            rho = float(lo)
        else:
            rho = float(0.5 * (lo + hi))
        rho_fallback = True

    objective = float(0.5 * alpha @ K @ alpha)
    return OcsvmModel(alphas=alpha, rho=rho, support_indices=support,
                      nu=nu, objective=objective, rho_fallback=rho_fallback)


def decision_scores(model: OcsvmModel, K_cross: np.ndarray) -> np.ndarray:
    """score_i = sum_j alpha_j K_cross[i, j] - rho; >= 0 predicts regular."""
    K_cross = np.atleast_2d(np.asarray(K_cross, dtype=np.float64))
    if K_cross.shape[1] != len(model.alphas):
        raise OcsvmError(
            f"cross Gram has {K_cross.shape[1]} columns, "
            f"model was trained on {len(model.alphas)} samples")
    return K_cross @ model.alphas - model.rho


def predict(model: OcsvmModel, K_cross: np.ndarray) -> np.ndarray:
    """+1 (regular) where the decision score is >= 0, else -1 (anomalous)."""
    return np.where(decision_scores(model, K_cross) >= 0.0, 1, -1)


def roc_auc(anomaly_scores: np.ndarray, labels: np.ndarray) -> RocCurve:
    """ROC curve with anomalies (label -1) as the positive class.

    `anomaly_scores`: higher means more anomalous.  Equal-score samples
    flip together (tie grouping), so constant scores give AUC 0.5.
    """
    scores = np.asarray(anomaly_scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise OcsvmError("scores and labels have different lengths")
    positive = labels == -1
    n_pos = int(positive.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise OcsvmError("ROC needs both classes present")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = positive[order]
    tps = np.cumsum(sorted_pos)
    fps = np.cumsum(~sorted_pos)
    # keep only the last index of each tie group
    distinct = np.r_[sorted_scores[1:] != sorted_scores[:-1], True]
    tpr = np.r_[0.0, tps[distinct] / n_pos]
    fpr = np.r_[0.0, fps[distinct] / n_neg]
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(points=np.column_stack([fpr, tpr]), auc=auc)


def save_roc_csv(curve: RocCurve, path) -> None:
    np.savetxt(path, curve.points, delimiter=",", fmt="%.17e",
               header="fpr,tpr", comments="")
