"""
Cutoff selection for step 2 of MDDC: boxplot fences, Monte Carlo null maxima and
p-values, and the adaptive search for the boxplot coefficient.
"""
# core python dependencies
import logging

# external dependencies
import numpy as np
import pandas as pd
from joblib import Parallel, delayed

# mddc dependencies
from mddc_analytics.api.types import ContinTable, CutoffSet, CutoffScope, NullMaxima, \
    RngStream
from mddc_analytics.api.errors import CoefLengthMismatch, AllInfinite, NoConvergence
from mddc_analytics.api.contin_table import std_pearson_residuals_array
from mddc_analytics.api.stats_kernel import boxplot_stats, quantile
from mddc_analytics.api.utils import Message, like, resolve_threads, chunk_ranges
from mddc_analytics.advancedparams import AdvancedParameters as AP

logger = logging.getLogger('mddc_analytics')

def broadcast_coef(coef, n_cols):
    """One positive coefficient per column from a scalar or a list"""
    coefs = np.atleast_1d(np.asarray(coef, dtype=np.float64))
    if coefs.size == 1:
        coefs = np.repeat(coefs, n_cols)
    elif coefs.size != n_cols:
        raise CoefLengthMismatch(f"{coefs.size} coefficients for {n_cols} columns", \
            expected=n_cols, got=int(coefs.size))
    if (coefs <= 0).any() or not np.isfinite(coefs).all():
        raise ValueError("boxplot coefficients must be positive")
    return coefs

def _group_stats(values, coef, label, messages):
    """Boxplot stats of one group, or None when the group has no finite value"""
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return None
    if finite.size < 2:
        Message.warn(messages, f"{label}: a single residual, fences collapse onto it")
    return boxplot_stats(finite, coef)

def _zero_fence(res, counts, coefs, col_specific, separate, messages, col_names):
    """c0 per column from the zero cells (separate) or all cells"""
    lower = np.full(res.shape[1], -np.inf)
    cells = (counts == 0) if separate else np.ones_like(counts, dtype=bool)
    for j in range(res.shape[1]):
        group = res[:, j][cells[:, j]] if col_specific else res[cells]
        stats = _group_stats(group, coefs[j], f"column {col_names[j]} zero cells", messages) \
            if col_specific else _group_stats(group, coefs[j], "zero cells", [])
        if stats is not None:
            lower[j] = stats.lower
    return lower

def boxplot_cutoffs(res, counts: ContinTable, coef=AP.boxplot_coef, col_specific=True, \
    separate=True, messages=None):
    """Tukey fences for step 2.

    Args:
        res (DataFrame): standardized Pearson residuals.
        counts (ContinTable): the observed table.
        coef (float or Sequence[float]): one coefficient, or one per column.
        col_specific (bool): fences within each column instead of over the whole table.
        separate (bool): fences for nonzero cells and zero cells computed separately.
        messages (list): warnings are also appended here when given.

    Returns:
        CutoffSet
    """
    values = res.to_numpy(dtype=np.float64)
    n = counts.values
    n_cols = values.shape[1]
    coefs = broadcast_coef(coef, n_cols)
    warnings = []

    upper = np.full(n_cols, np.inf)
    cells = (n > 0) if separate else np.ones_like(n, dtype=bool)
    for j in range(n_cols):
        label = f"column {counts.col_names[j]}" + (" nonzero cells" if separate else "")
        group = values[:, j][cells[:, j]] if col_specific else values[cells]
        stats = _group_stats(group, coefs[j], label, warnings if col_specific or j == 0 else [])
        if stats is not None:
            upper[j] = stats.upper
    zero_lower = _zero_fence(values, n, coefs, col_specific, separate, warnings, \
        counts.col_names)
    if messages is not None:
        messages.extend(warnings)

    cut = CutoffSet(col_names=counts.col_names, upper=upper.tolist(), \
        zero_lower=zero_lower.tolist(), coef=coefs.tolist(), \
        scope=CutoffScope.PER_COLUMN if col_specific else CutoffScope.WHOLE_TABLE, \
        message=Message.join_messages(warnings))
    logger.debug("boxplot cutoffs: %s", dict(zip(cut.col_names, cut.upper)))
    return cut

def null_cell_probs(t: ContinTable):
    """p_ij = (n_i. / n..) (n_.j / n..)"""
    total = float(t.total)
    return np.outer(t.row_marginals / total, t.col_marginals / total)

def _null_maxima_chunk(probs, total, reps, rng, count_limit):
    """Column maxima of admissible residuals for replications in reps"""
    maxima = np.empty((probs.shape[1], len(reps)))
    flat = probs.ravel() / probs.sum()
    for pos, rep in enumerate(reps):
        sim = rng.child(rep).generator().multinomial(total, flat).reshape(probs.shape)
        res = std_pearson_residuals_array(sim)
        admissible = np.where((sim > count_limit) & np.isfinite(res), res, -np.inf)
        maxima[:, pos] = admissible.max(axis=0)
    return maxima

def mc_null_simulation(t: ContinTable, reps=AP.mc_reps, rng: RngStream = None, \
    threads=None, count_limit=AP.sparse_count_limit):
    """Column maxima of residuals over cells with n_ij > count_limit in reps null tables.

    Each null table is Multinomial(n.., p) with p from null_cell_probs; its residuals use
    its own marginals. Replication r always draws from rng.child(r), so the result does
    not depend on threads.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    rng = rng if rng is not None else RngStream(seed=0)
    threads = resolve_threads(threads)
    probs = null_cell_probs(t)
    logger.info("simulating %d null tables on %d threads", reps, threads)
    chunks = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_null_maxima_chunk)(probs, t.total, chunk, rng, count_limit)
        for chunk in chunk_ranges(reps, threads))
    return NullMaxima(col_names=t.col_names, values=np.concatenate(chunks, axis=1))

def _maxima_rows(null: NullMaxima, col_specific):
    """J x R maxima; the whole-table rule uses the per-replication table maximum"""
    if col_specific:
        return null.values
    return np.repeat(null.pooled(), len(null.col_names), axis=0)

def mc_cutoffs(null: NullMaxima, quantile_q=AP.mc_quantile, res=None, \
    counts: ContinTable = None, col_specific=True, separate=True, coef=AP.boxplot_coef, \
    messages=None):
    """c+ from the null maxima quantile; c0 from the boxplot rule on the observed table.

    Warnings go to messages when given, as in boxplot_cutoffs.

    Raises:
        AllInfinite: a column without any finite maximum.
    """
    if not 0 < quantile_q <= 1:
        raise ValueError(f"quantile {quantile_q} outside (0, 1]")
    rows = _maxima_rows(null, col_specific)
    upper = []
    for j, name in enumerate(null.col_names):
        finite = rows[j][np.isfinite(rows[j])]
        if finite.size == 0:
            raise AllInfinite(f"column {name}: no simulated cell ever exceeded the " \
                "sparse-count limit", column=name)
        upper.append(quantile(finite, quantile_q))

    warnings = []
    coefs = broadcast_coef(coef, len(null.col_names))
    if res is not None and counts is not None:
        zero_lower = _zero_fence(res.to_numpy(dtype=np.float64), counts.values, coefs, \
            col_specific, separate, warnings, counts.col_names).tolist()
    else:
        zero_lower = [-np.inf] * len(upper)
    if messages is not None:
        messages.extend(warnings)
    return CutoffSet(col_names=null.col_names, upper=upper, zero_lower=zero_lower, \
        coef=coefs.tolist(), \
        scope=CutoffScope.PER_COLUMN if col_specific else CutoffScope.WHOLE_TABLE, \
        message=Message.join_messages(warnings))

def mc_pvalues(null: NullMaxima, res, counts: ContinTable, col_specific=True, \
    count_limit=AP.sparse_count_limit):
    """(1 + #{r: m_jr >= e_ij}) / (R + 1) for cells with n_ij > count_limit, NaN elsewhere"""
    values = res.to_numpy(dtype=np.float64)
    if values.shape[1] != len(null.col_names):
        raise ValueError("null maxima and residuals do not conform")
    rows = np.sort(_maxima_rows(null, col_specific), axis=1)
    reps = rows.shape[1]
    pvals = np.full(values.shape, np.nan)
    eligible = (counts.values > count_limit) & np.isfinite(values)
    for j in range(values.shape[1]):
        cells = eligible[:, j]
        at_least = reps - np.searchsorted(rows[j], values[cells, j], side="left")
        pvals[cells, j] = (1 + at_least) / (reps + 1)
    return like(pvals, res)

def _fence_chunk(probs, total, reps, rng, col_specific):
    """Per replication and column: (max nonzero residual, Q3, IQR) of a null table"""
    shape = (len(reps), probs.shape[1])
    top, q3, iqr = np.full(shape, -np.inf), np.full(shape, np.nan), np.full(shape, np.nan)
    flat = probs.ravel() / probs.sum()
    for pos, rep in enumerate(reps):
        sim = rng.child(rep).generator().multinomial(total, flat).reshape(probs.shape)
        res = std_pearson_residuals_array(sim)
        res = np.where((sim > 0) & np.isfinite(res), res, np.nan)
        if col_specific:
            groups = [res[:, j] for j in range(res.shape[1])]
        else:
            groups = [res.ravel()] * res.shape[1]
        for j, group in enumerate(groups):
            group = group[~np.isnan(group)]
            if group.size:
                lo, hi = np.quantile(group, [0.25, 0.75], method="linear")
                top[pos, j], q3[pos, j], iqr[pos, j] = group.max(), hi, hi - lo
    return top, q3, iqr

def find_optimal_coef(t: ContinTable, reps=1000, target_fdr=AP.target_fdr, \
    step=AP.coef_step, rng: RngStream = None, start=AP.boxplot_coef, \
    ceiling=AP.coef_ceiling, col_specific=True, threads=None):
    """Smallest boxplot coefficient per column whose null FDR is at most target_fdr.

    Under independence every flagged cell is a false positive, so the FDR at c is the
    fraction of null tables in which some nonzero cell exceeds Q3 + c IQR (a table with
    nothing flagged contributes 0). c runs over start, start + step, ... up to ceiling.

    Returns:
        list of float: one coefficient per column (all equal when col_specific is False).

    Raises:
        NoConvergence: some column still exceeds target_fdr past ceiling.
    """
    if not 0 < target_fdr <= 1:
        raise ValueError(f"target FDR {target_fdr} outside (0, 1]")
    if step <= 0:
        raise ValueError("step must be positive")
    rng = rng if rng is not None else RngStream(seed=0)
    threads = resolve_threads(threads)
    probs = null_cell_probs(t)
    parts = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_fence_chunk)(probs, t.total, chunk, rng, col_specific)
        for chunk in chunk_ranges(reps, threads))
    top, q3, iqr = (np.concatenate([p[k] for p in parts], axis=0) for k in range(3))

    n_cols = probs.shape[1]
    chosen = np.full(n_cols, np.nan)
    k = 0
    while np.isnan(chosen).any():
        c = round(start + k * step, 10)
        if c > ceiling:
            failing = [t.col_names[j] for j in np.flatnonzero(np.isnan(chosen))]
            raise NoConvergence(f"FDR above {target_fdr} for {', '.join(failing)} " \
                f"at coefficient {ceiling}", columns=failing)
        with np.errstate(invalid="ignore"):
            flagged = np.where(np.isnan(q3), False, top > q3 + c * iqr)
        fdr = flagged.mean(axis=0)
        newly = np.isnan(chosen) & (fdr <= target_fdr)
        chosen[newly] = c
        k += 1
    logger.debug("optimal boxplot coefficients: %s", dict(zip(t.col_names, chosen)))
    return chosen.tolist()

def empirical_fdr(t: ContinTable, coefs, reps, rng: RngStream, col_specific=True, \
    threads=None):
    """Fraction of null tables with a flagged nonzero cell, per column, at coefs"""
    threads = resolve_threads(threads)
    probs = null_cell_probs(t)
    coefs = broadcast_coef(coefs, probs.shape[1])
    parts = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_fence_chunk)(probs, t.total, chunk, rng, col_specific)
        for chunk in chunk_ranges(reps, threads))
    top, q3, iqr = (np.concatenate([p[k] for p in parts], axis=0) for k in range(3))
    with np.errstate(invalid="ignore"):
        flagged = np.where(np.isnan(q3), False, top > q3 + coefs * iqr)
    return pd.Series(flagged.mean(axis=0), index=t.col_names)
