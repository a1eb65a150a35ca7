"""Dataset ingestion, scaling, feature engineering, and split protocols.

Datasets are tables of 2*latent_dim features (one latent vector per jet
of a dijet event) with SM/BSM labels.  SM rows are the regular class
(+1); BSM rows are anomalies (-1).  Features are min-max scaled to
(-1, 1) with the scaler fit on training rows only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "SM",
    "BSM",
    "LabeledDataset",
    "DiscoverySplit",
    "AssessmentSplit",
    "MinMaxScaler",
    "DataError",
    "load_csv",
    "save_csv",
    "fit_scaler",
    "apply_scaler",
    "make_discovery_split",
    "make_assessment_split",
    "engineer_features",
]

SM = 1    # regular class
BSM = -1  # anomaly class

_LABEL_FROM_TEXT = {"SM": SM, "BSM": BSM}
_TEXT_FROM_LABEL = {SM: "SM", BSM: "BSM"}

_SCALE_DELTA = 1e-6


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray  # rows x columns, float64
    labels: np.ndarray    # +1 (SM) / -1 (BSM) per row
    latent_dim: int

    def __post_init__(self):
        if len(self.features) != len(self.labels):
            raise DataError("row count does not match label count")

    @property
    def num_rows(self) -> int:
        return len(self.labels)

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def rows(self, indices) -> np.ndarray:
        return self.features[np.asarray(indices)]


@dataclass(frozen=True)
class DiscoverySplit:
    """SM-only training rows plus a disjoint labeled validation set."""
    train_X: np.ndarray
    val_X: np.ndarray
    val_y: np.ndarray
    train_indices: np.ndarray
    val_indices: np.ndarray


@dataclass(frozen=True)
class AssessmentSplit:
    """SM-only training rows plus several disjoint labeled test sets."""
    train_X: np.ndarray
    test_X: tuple[np.ndarray, ...]
    test_y: tuple[np.ndarray, ...]
    train_indices: np.ndarray
    test_indices: tuple[np.ndarray, ...]


# ---------------------------------------------------------------------------
# CSV I/O: header f0..f_{2l-1} plus a `label` column with values SM|BSM
# ---------------------------------------------------------------------------

def load_csv(path) -> LabeledDataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if "label" not in header:
            raise DataError(f"{path}: missing `label` column")
        label_col = header.index("label")
        feature_cols = [i for i in range(len(header)) if i != label_col]
        if len(feature_cols) % 2 != 0:
            raise DataError(
                f"{path}: {len(feature_cols)} feature columns; dijet data needs "
                "an even count (2 * latent_dim)")
        if not feature_cols:
            raise DataError(f"{path}: no feature columns")
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, "
                                f"got {len(row)}")
            token = row[label_col].strip()
            if token not in _LABEL_FROM_TEXT:
                raise DataError(f"{path}:{lineno}: unknown label token {token!r}")
            labels.append(_LABEL_FROM_TEXT[token])
            try:
                rows.append([float(row[i]) for i in feature_cols])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    return LabeledDataset(
        features=np.asarray(rows, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
        latent_dim=len(feature_cols) // 2,
    )


def save_csv(dataset: LabeledDataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(dataset.num_features)] + ["label"])
        for x, y in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in x] + [_TEXT_FROM_LABEL[int(y)]])


# ---------------------------------------------------------------------------
# Scaling: per-feature affine map [min, max] -> (-1, 1), fit on train only
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MinMaxScaler:
    minima: np.ndarray
    maxima: np.ndarray
    constant_columns: tuple[int, ...]


def fit_scaler(train_rows: np.ndarray) -> MinMaxScaler:
    train_rows = np.asarray(train_rows, dtype=np.float64)
    if train_rows.ndim != 2 or len(train_rows) == 0:
        raise DataError("scaler needs a nonempty 2-d array of training rows")
    minima = train_rows.min(axis=0)
    maxima = train_rows.max(axis=0)
    constant = tuple(int(i) for i in np.flatnonzero(maxima - minima == 0.0))
    return MinMaxScaler(minima=minima, maxima=maxima, constant_columns=constant)


def apply_scaler(scaler: MinMaxScaler, features: np.ndarray) -> np.ndarray:
    """Map [min, max] -> [-1+delta, 1-delta]; out-of-range values clamp."""
    X = np.asarray(features, dtype=np.float64)
    span = scaler.maxima - scaler.minima
    safe_span = np.where(span == 0.0, 1.0, span)
    unit = (X - scaler.minima) / safe_span  # [0, 1] on the training range
    scaled = (2.0 * unit - 1.0) * (1.0 - _SCALE_DELTA)
    scaled = np.clip(scaled, -(1.0 - _SCALE_DELTA), 1.0 - _SCALE_DELTA)
    if scaler.constant_columns:
        scaled[:, list(scaler.constant_columns)] = 0.0
    return scaled


def scale_dataset(scaler: MinMaxScaler, dataset: LabeledDataset) -> LabeledDataset:
    return replace(dataset, features=apply_scaler(scaler, dataset.features))


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------

def _draw(rng: np.random.Generator, pool: np.ndarray, count: int,
          what: str) -> tuple[np.ndarray, np.ndarray]:
    if len(pool) < count:
        raise DataError(f"not enough rows for {what}: need {count}, have {len(pool)}")
    picked = rng.choice(pool, size=count, replace=False)
    remaining = np.setdiff1d(pool, picked)
    return np.sort(picked), remaining


def _draw_labeled(rng: np.random.Generator, sm_pool: np.ndarray,
                  bsm_pool: np.ndarray, size: int, balanced: bool,
                  what: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if balanced:
        n_sm = (size + 1) // 2
        sm_idx, sm_pool = _draw(rng, sm_pool, n_sm, f"{what} (SM half)")
        bsm_idx, bsm_pool = _draw(rng, bsm_pool, size - n_sm, f"{what} (BSM half)")
        idx = np.sort(np.concatenate([sm_idx, bsm_idx]))
    else:
        pool = np.concatenate([sm_pool, bsm_pool])
        idx, _ = _draw(rng, pool, size, what)
        sm_pool = np.setdiff1d(sm_pool, idx)
        bsm_pool = np.setdiff1d(bsm_pool, idx)
    return idx, sm_pool, bsm_pool


def make_discovery_split(dataset: LabeledDataset, seed: int,
                         train_size: int = 75, val_size: int = 75,
                         balanced: bool = True) -> DiscoverySplit:
    """SM-only training rows and a disjoint labeled validation set.

    The validation set defaults to a balanced 50/50 SM/BSM draw (SM gets
    the extra row for odd sizes); `balanced=False` draws i.i.d. instead.
    """
    rng = np.random.default_rng(seed)
    sm_pool = np.flatnonzero(dataset.labels == SM)
    bsm_pool = np.flatnonzero(dataset.labels == BSM)
    train_idx, sm_pool = _draw(rng, sm_pool, train_size, "discovery training (SM)")
    val_idx, _, _ = _draw_labeled(rng, sm_pool, bsm_pool, val_size, balanced,
                                  "discovery validation")
    return DiscoverySplit(
        train_X=dataset.features[train_idx],
        val_X=dataset.features[val_idx],
        val_y=dataset.labels[val_idx],
        train_indices=train_idx,
        val_indices=val_idx,
    )


def make_assessment_split(dataset: LabeledDataset, seed: int,
                          train_size: int = 200, test_size: int = 1500,
                          repeats: int = 5,
                          balanced: bool = True) -> AssessmentSplit:
    """SM-only training rows plus `repeats` pairwise-disjoint test sets."""
    rng = np.random.default_rng(seed)
    sm_pool = np.flatnonzero(dataset.labels == SM)
    bsm_pool = np.flatnonzero(dataset.labels == BSM)
    train_idx, sm_pool = _draw(rng, sm_pool, train_size, "assessment training (SM)")
    test_indices = []
    for r in range(repeats):
        idx, sm_pool, bsm_pool = _draw_labeled(
            rng, sm_pool, bsm_pool, test_size, balanced, f"test set {r}")
        test_indices.append(idx)
    return AssessmentSplit(
        train_X=dataset.features[train_idx],
        test_X=tuple(dataset.features[idx] for idx in test_indices),
        test_y=tuple(dataset.labels[idx] for idx in test_indices),
        train_indices=train_idx,
        test_indices=tuple(test_indices),
    )


# ---------------------------------------------------------------------------
# Engineered features: theta_{i,j} = (x_i - pi)(x_j - pi), appended unscaled
# ---------------------------------------------------------------------------

def engineer_features(dataset: LabeledDataset, pairs) -> LabeledDataset:
    """Append (x_i - pi)(x_j - pi) columns for each index pair.

    The appended columns are not rescaled; they feed rotation angles
    directly.  Duplicate pairs are rejected.
    """
    pairs = [tuple(p) for p in pairs]
    if len(set(pairs)) != len(pairs):
        raise DataError("duplicate engineered-feature pair")
    if not pairs:
        return dataset
    X = dataset.features
    cols = []
    for i, j in pairs:
        if not (0 <= i < X.shape[1] and 0 <= j < X.shape[1]):
            raise DataError(f"engineered pair ({i}, {j}) out of range")
        cols.append((X[:, i] - np.pi) * (X[:, j] - np.pi))
    return replace(dataset, features=np.column_stack([X] + cols))
