"""
CSV ingestion and emission.

Data files: optional header row (a first row that is not fully numeric),
numeric feature columns and an optional trailing label column. Design
files: 0/1 entries, one row per item, optional header.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from model.design import validate_design
from model.errors import (
    EmptyMatrix,
    InputError,
    MissingLabels,
    NonBinaryEntry,
    NonFiniteData,
    WrongColumnCount,
)
from model.types import Dataset, DesignMatrix

logger = logging.getLogger(__name__)


def _read_raw(path: Path) -> pd.DataFrame:
    try:
        raw = pd.read_csv(path, header=None, dtype=str, skipinitialspace=True, comment="#")
    except pd.errors.EmptyDataError as exc:
        raise EmptyMatrix(f"{path}: no data") from exc
    except pd.errors.ParserError as exc:
        raise InputError(f"{path}: cannot parse CSV ({exc})") from exc
    raw = raw.apply(lambda col: col.str.strip())
    if raw.empty:
        raise EmptyMatrix(f"{path}: no data")
    return raw


def _is_numeric(values: pd.Series) -> pd.Series:
    return pd.to_numeric(values, errors="coerce").notna()


def _split_header(raw: pd.DataFrame) -> tuple[Optional[list[str]], pd.DataFrame]:
    first = raw.iloc[0]
    if _is_numeric(first.fillna("x")).all():
        return None, raw.reset_index(drop=True)
    header = [str(v) if pd.notna(v) else f"col{i + 1}" for i, v in enumerate(first)]
    return header, raw.iloc[1:].reset_index(drop=True)


def read_dataset(
    path: str | Path,
    n_features: Optional[int] = None,
    require_labels: bool = False,
) -> Dataset:
    """
    Load an N×J data matrix with optional labels.

    A trailing column that is not fully numeric is taken as the label
    column. With n_features given, a table of n_features + 1 numeric
    columns also treats its last column as labels.

    Raises:
        EmptyMatrix: no data rows
        NonFiniteData: a feature cell is missing or not a number
        WrongColumnCount: the feature count differs from n_features
        MissingLabels: require_labels and no label column was found
    """
    path = Path(path)
    header, body = _split_header(_read_raw(path))
    if body.empty:
        raise EmptyMatrix(f"{path}: header but no data rows")

    n_cols = body.shape[1]
    has_labels = not _is_numeric(body.iloc[:, -1]).all()
    if not has_labels and n_features is not None and n_cols == n_features + 1:
        has_labels = True
    if require_labels and not has_labels:
        raise MissingLabels(f"{path}: no label column found")

    feature_cols = n_cols - 1 if has_labels else n_cols
    if n_features is not None and feature_cols != n_features:
        raise WrongColumnCount(f"{path}: expected {n_features} feature columns, found {feature_cols}")

    features = body.iloc[:, :feature_cols].apply(pd.to_numeric, errors="coerce")
    if features.isna().to_numpy().any():
        i, j = np.argwhere(features.isna().to_numpy())[0]
        raise NonFiniteData(f"{path}: missing or non-numeric value at row {i + 1}, column {j + 1}")

    labels = body.iloc[:, -1].to_numpy() if has_labels else None
    if labels is not None and pd.isna(labels).any():
        raise MissingLabels(f"{path}: empty label cells")
    columns = tuple(header[:feature_cols]) if header else None

    logger.info(f"[CSV] read path={path} N={features.shape[0]} J={feature_cols} labels={has_labels}")
    return Dataset(features.to_numpy(dtype=float), labels=labels, columns=columns)


def read_design(path: str | Path) -> DesignMatrix:
    """
    Load a 0/1 design matrix.

    Raises:
        EmptyMatrix: empty or ragged file
        NonBinaryEntry / AllZeroRow: invalid entries
    """
    path = Path(path)
    _, body = _split_header(_read_raw(path))
    if body.isna().to_numpy().any():
        raise EmptyMatrix(f"{path}: design rows have unequal lengths or empty cells")
    values = body.apply(pd.to_numeric, errors="coerce")
    if values.isna().to_numpy().any():
        i, j = np.argwhere(values.isna().to_numpy())[0]
        raise NonBinaryEntry(f"{path}: entry at row {i + 1}, column {j + 1} is not a number")
    return validate_design(values.to_numpy())


def write_design(q: DesignMatrix, path: str | Path) -> Path:
    path = Path(path)
    pd.DataFrame(q.q.astype(int)).to_csv(path, header=False, index=False)
    return path


def matrix_frame(values: np.ndarray, prefix: str, labels: Optional[Sequence] = None) -> pd.DataFrame:
    """Columns prefix1..prefixK plus an optional label column."""
    values = np.asarray(values, dtype=float)
    frame = pd.DataFrame(values, columns=[f"{prefix}{k + 1}" for k in range(values.shape[1])])
    if labels is not None:
        frame["label"] = list(labels)
    return frame


def write_frame(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False)
    logger.debug(f"[CSV] wrote path={path} rows={len(frame)}")
    return path


def write_dataset(dataset: Dataset, path: str | Path) -> Path:
    columns = dataset.columns or tuple(f"y{j + 1}" for j in range(dataset.J))
    frame = pd.DataFrame(dataset.y, columns=list(columns))
    if dataset.labels is not None:
        frame["label"] = dataset.labels
    return write_frame(frame, path)
