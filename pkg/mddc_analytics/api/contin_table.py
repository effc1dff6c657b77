"""
Contingency table validation, expected counts and standardized Pearson residuals.
"""
# core python dependencies
import logging

# external dependencies
import numpy as np
import pandas as pd

# mddc dependencies
from mddc_analytics.api.types import ContinTable
from mddc_analytics.api.errors import NegativeCount, NonIntegralCount, EmptyTable, \
    DuplicateLabel
from mddc_analytics.api.utils import Message, like

logger = logging.getLogger('mddc_analytics')

def _is_missing_label(label):
    if label is None:
        return True
    if isinstance(label, float) and np.isnan(label):
        return True
    return str(label).strip() == ""

def _fix_labels(labels, prefix, strict, messages):
    """Replace missing labels by prefix_<position>; dedupe (lenient) or reject (strict)"""
    fixed = []
    generated = []
    for pos, label in enumerate(labels, start=1):
        if _is_missing_label(label):
            fixed.append(f"{prefix}_{pos}")
            generated.append(fixed[-1])
        else:
            fixed.append(str(label).strip())
    if generated:
        Message.warn(messages, f"generated labels {generated[0]}..{generated[-1]} " \
            f"for {len(generated)} unlabeled {prefix} entries")

    seen = {}
    for pos, label in enumerate(fixed):
        if label not in seen:
            seen[label] = 1
            continue
        if strict:
            raise DuplicateLabel(f"duplicate label {label!r}", label=label)
        # lenient: label, label_2, label_3, ...
        count = seen[label]
        candidate = label
        while candidate in seen:
            count += 1
            candidate = f"{label}_{count}"
        seen[label] = count
        seen[candidate] = 1
        Message.warn(messages, f"renamed duplicate label {label!r} to {candidate!r}")
        fixed[pos] = candidate
    return fixed

def _has_labels(index):
    """A default RangeIndex means the caller supplied no labels"""
    return not isinstance(index, pd.RangeIndex)

def validate_and_fix(raw, strict=False, row_names=None, col_names=None):
    """Check a raw count matrix and return a valid ContinTable.

    Args:
        raw (DataFrame or array-like): I x J counts, rows AEs and columns drugs.
        strict (bool): reject non-integral counts and duplicate labels instead of fixing them.
        row_names (Sequence[str]): AE labels, overriding those of raw.
        col_names (Sequence[str]): drug labels, overriding those of raw.

    Returns:
        ContinTable: int64 counts with unique, non-empty labels; fixes are listed
        in its message.

    Raises:
        NegativeCount, NonIntegralCount, EmptyTable, DuplicateLabel
    """
    messages = []
    frame = raw.copy() if isinstance(raw, pd.DataFrame) else pd.DataFrame(np.asarray(raw))
    if frame.ndim != 2 or frame.shape[0] == 0 or frame.shape[1] == 0:
        raise EmptyTable("the table has no rows or no columns")

    if row_names is None:
        row_names = list(frame.index) if _has_labels(frame.index) else [None] * frame.shape[0]
    if col_names is None:
        col_names = list(frame.columns) if _has_labels(frame.columns) \
            else [None] * frame.shape[1]
    if len(row_names) != frame.shape[0] or len(col_names) != frame.shape[1]:
        raise EmptyTable("label lists do not match the table dimensions")

    rows = _fix_labels(row_names, "AE", strict, messages)
    cols = _fix_labels(col_names, "drug", strict, messages)

    values = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)

    missing = np.isnan(values)
    if missing.any():
        i, j = np.argwhere(missing)[0]
        if strict:
            raise NonIntegralCount(f"missing or non-numeric count at ({rows[i]}, {cols[j]})", \
                row=rows[i], column=cols[j])
        Message.warn(messages, f"replaced {int(missing.sum())} missing counts by 0")
        values = np.where(missing, 0.0, values)

    negative = values < 0
    if negative.any():
        i, j = np.argwhere(negative)[0]
        raise NegativeCount(f"negative count {values[i, j]:g} at ({rows[i]}, {cols[j]})", \
            row=rows[i], column=cols[j])

    if not np.isfinite(values).all():
        i, j = np.argwhere(~np.isfinite(values))[0]
        raise NonIntegralCount(f"infinite count at ({rows[i]}, {cols[j]})", \
            row=rows[i], column=cols[j])

    rounded = np.rint(values)
    fractional = rounded != values
    if fractional.any():
        i, j = np.argwhere(fractional)[0]
        if strict:
            raise NonIntegralCount(f"non-integral count {values[i, j]:g} " \
                f"at ({rows[i]}, {cols[j]})", row=rows[i], column=cols[j])
        Message.warn(messages, f"rounded {int(fractional.sum())} non-integral counts " \
            "half to even")

    if len(rows) < 2 or len(cols) < 2:
        raise EmptyTable(f"a contingency table needs at least 2 rows and 2 columns, " \
            f"got {len(rows)} x {len(cols)}")
    if rounded.sum() <= 0:
        raise EmptyTable("the grand total of the table is zero")

    counts = pd.DataFrame(rounded.astype(np.int64), index=pd.Index(rows, dtype=object), \
        columns=pd.Index(cols, dtype=object))
    return ContinTable(counts=counts, message=Message.join_messages(messages))

def expected_counts(t: ContinTable):
    """E_ij = n_i. n_.j / n.. as a labeled float DataFrame"""
    rows = t.row_marginals.astype(np.float64)
    cols = t.col_marginals.astype(np.float64)
    return like(np.outer(rows, cols) / float(t.total), t.counts)

def std_pearson_residuals_array(counts):
    """Standardized Pearson residuals of one table or a stack of tables.

    Args:
        counts (ndarray): (..., I, J) counts; marginals are taken per table.

    Returns:
        ndarray: residuals with NaN where the denominator is zero.
    """
    counts = np.asarray(counts)
    row = counts.sum(axis=-1, keepdims=True, dtype=np.int64).astype(np.float64)
    col = counts.sum(axis=-2, keepdims=True, dtype=np.int64).astype(np.float64)
    total = row.sum(axis=-2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        expected = row * col / total
        denom = np.sqrt(expected * (1 - row / total) * (1 - col / total))
        res = (counts - expected) / denom
    return np.where(denom > 0, res, np.nan)

def std_pearson_residuals(t: ContinTable):
    """e_ij of step 1 as a labeled DataFrame; cells with a zero denominator are NaN"""
    return like(std_pearson_residuals_array(t.values), t.counts)
