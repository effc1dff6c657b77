"""
MDDC steps 2 to 5: univariate masking, Fisher screening of sparse cells, connected AEs,
weighted regression predictions and standardized deviations.
"""
# core python dependencies
from contextlib import contextmanager
import logging

# external dependencies
import numpy as np

# mddc dependencies
from mddc_analytics.api.types import ContinTable, CutoffSet, ConnectedAeGraph, \
    FittedMatrix, MddcOptions, MddcResult, Method, CorrOrientation, BhFamily, RngStream
from mddc_analytics.api.errors import MddcError, NoComparisonColumns
from mddc_analytics.api.contin_table import std_pearson_residuals
from mddc_analytics.api.cutoff_engine import boxplot_cutoffs, mc_null_simulation, \
    mc_cutoffs, mc_pvalues
from mddc_analytics.api.stats_kernel import fisher_exact_greater, normal_upper_tail, \
    bh_adjust
from mddc_analytics.api.utils import Message, MessageLevel, like
from mddc_analytics.advancedparams import AdvancedParameters as AP

logger = logging.getLogger('mddc_analytics')

OTHER_COLUMN = "other"

def build_u_matrix(res, counts: ContinTable, cut: CutoffSet):
    """Mask univariate outliers and flag upper outliers.

    Nonzero cells are masked when |e_ij| > c+_j and zero cells when e_ij < c0_j.
    Only nonzero cells with e_ij > c+_j are signals.

    Returns:
        (DataFrame, DataFrame): the U matrix (NaN = masked) and the 0/1 signal matrix
    """
    e = res.to_numpy(dtype=np.float64)
    n = counts.values
    if e.shape != n.shape or len(cut.upper) != e.shape[1]:
        raise ValueError("residuals, counts and cutoffs do not conform")
    upper = np.asarray(cut.upper, dtype=np.float64)[None, :]
    lower = np.asarray(cut.zero_lower, dtype=np.float64)[None, :]
    nonzero = n > 0
    missing = np.isnan(e)
    with np.errstate(invalid="ignore"):
        outlier = np.where(nonzero, np.abs(e) > upper, e < lower)
        signal = (nonzero & (e > upper)).astype(np.float64)
    u = np.where(outlier | missing, np.nan, e)
    signal[missing] = np.nan
    return like(u, res), like(signal, res)

def comparison_columns(col_names, class_labels=None, exclude_same_class=True, \
    messages=None):
    """Columns compared against each drug column in the Fisher screen.

    With class labels, same-class columns are dropped when exclude_same_class is set.
    Without them, named drugs are one class and columns called "Other" form the pool.

    Returns:
        dict: column position -> list of comparison positions
    """
    messages = messages if messages is not None else []
    n_cols = len(col_names)
    everything = {j: [k for k in range(n_cols) if k != j] for j in range(n_cols)}
    if not exclude_same_class:
        return everything
    if class_labels is not None:
        if len(class_labels) != n_cols:
            raise ValueError(f"{len(class_labels)} class labels for {n_cols} columns")
        return {j: [k for k in everything[j] if class_labels[k] != class_labels[j]] \
            for j in range(n_cols)}
    other = [k for k, name in enumerate(col_names) if str(name).lower() == OTHER_COLUMN]
    if not other:
        Message.warn(messages, "no class labels and no Other column; Fisher tests " \
            "compare against all other columns")
        return everything
    return {j: everything[j] if j in other else other for j in range(n_cols)}

def fisher_screen(t: ContinTable, class_labels=None, alpha=AP.signal_alpha, \
    exclude_same_class=True, messages=None, count_limit=AP.sparse_count_limit):
    """One-sided Fisher exact tests for cells with 0 < n_ij <= count_limit.

    The 2 x 2 table of cell (i, j) is a = n_ij, b = row i summed over the comparison
    columns, c = n_.j - a and d = the comparison columns' total minus b.

    Returns:
        (DataFrame, DataFrame): p-values and 0/1 signals, NaN outside the sparse cells

    Raises:
        NoComparisonColumns: a column is left with nothing to compare against.
    """
    n = t.values
    comparisons = comparison_columns(t.col_names, class_labels, exclude_same_class, \
        messages)
    empty = [t.col_names[j] for j, cols in comparisons.items() if not cols]
    if empty:
        raise NoComparisonColumns(f"no comparison columns left for {', '.join(empty)}", \
            columns=empty)

    col_totals = t.col_marginals
    pvals = np.full(n.shape, np.nan)
    sparse = (n > 0) & (n <= count_limit)
    for j in range(n.shape[1]):
        rows = np.flatnonzero(sparse[:, j])
        if rows.size == 0:
            continue
        cols = comparisons[j]
        pool_total = int(col_totals[cols].sum())
        pool_rows = n[:, cols].sum(axis=1)
        for i in rows:
            a, b = int(n[i, j]), int(pool_rows[i])
            pvals[i, j] = fisher_exact_greater(a, b, int(col_totals[j]) - a, pool_total - b)
    signal = np.where(np.isnan(pvals), np.nan, (pvals <= alpha).astype(np.float64))
    logger.debug("fisher screen: %d sparse cells, %d signals", int(sparse.sum()), \
        int(np.nansum(signal)))
    return like(pvals, t.counts), like(signal, t.counts)

def _units(frame, orientation):
    """Rows of frame are the correlated units"""
    return frame if CorrOrientation(orientation) == CorrOrientation.ROW else frame.T

def connect_aes(u, c_corr=AP.corr_limit, orientation=CorrOrientation.ROW, \
    min_pairs=AP.min_complete_pairs):
    """Pairwise-complete Pearson correlations between rows of U and the pairs with
    |cor| >= c_corr. Pairs with fewer than min_pairs complete positions or a constant
    vector have no correlation and never connect.
    """
    if not 0 <= c_corr <= 1:
        raise ValueError(f"correlation threshold {c_corr} outside [0, 1]")
    units = _units(u, orientation)
    corr = units.T.corr(method="pearson", min_periods=min_pairs).clip(-1.0, 1.0)
    values = corr.to_numpy()
    neighbors = {}
    for i in range(values.shape[0]):
        row = values[i]
        with np.errstate(invalid="ignore"):
            hits = np.flatnonzero(np.abs(row) >= c_corr)
        neighbors[i] = [(int(k), float(row[k])) for k in hits if k != i]
    g = ConnectedAeGraph(labels=[str(x) for x in units.index], neighbors=neighbors, \
        threshold=c_corr, orientation=orientation, correlations=corr)
    logger.debug("connected pairs at |cor| >= %s: %d", c_corr, g.pair_count())
    return g

def fit_predictions(u, g: ConnectedAeGraph, min_pairs=AP.min_complete_pairs):
    """Weighted mean of the least-squares predictions of each row from its connected rows.

    Each connected row k contributes alpha_ik + beta_ik u_kj with weight |cor_ik|,
    renormalized over the k with u_kj present. Rows without a usable neighbour stay NaN.
    """
    units = _units(u, g.orientation)
    values = units.to_numpy(dtype=np.float64)
    present = ~np.isnan(values)
    weighted = np.zeros_like(values)
    weight_sum = np.zeros_like(values)
    intercepts, slopes, weights = {}, {}, {}
    labels = g.labels

    for i, nbrs in g.neighbors.items():
        used = []
        for k, cor in nbrs:
            both = present[i] & present[k]
            if both.sum() < min_pairs:
                continue
            x, y = values[k, both], values[i, both]
            x_dev = x - x.mean()
            sxx = float(x_dev @ x_dev)
            if sxx <= 0:
                continue
            beta = float(x_dev @ (y - y.mean())) / sxx
            alpha = float(y.mean() - beta * x.mean())
            avail = present[k]
            weighted[i, avail] += abs(cor) * (alpha + beta * values[k, avail])
            weight_sum[i, avail] += abs(cor)
            intercepts[(labels[i], labels[k])] = alpha
            slopes[(labels[i], labels[k])] = beta
            used.append((k, abs(cor)))
        total = sum(w for _, w in used)
        for k, w in used:
            weights[(labels[i], labels[k])] = w / total

    with np.errstate(invalid="ignore", divide="ignore"):
        fitted = np.where(weight_sum > 0, weighted / weight_sum, np.nan)
    fitted = like(fitted, units)
    if CorrOrientation(g.orientation) == CorrOrientation.COLUMN:
        fitted = fitted.T
    return FittedMatrix(fitted=fitted, intercepts=intercepts, slopes=slopes, \
        weights=weights)

def standardize_and_test(res, fit, bh_family=BhFamily.TABLE, messages=None):
    """Standardized deviations r_ij and their upper-tail p-values.

    Args:
        res (DataFrame): residuals e_ij.
        fit (FittedMatrix or DataFrame): predictions u-hat.
        bh_family (BhFamily): adjust over the whole table or within each column.
        messages (list): collects warnings about MISSING columns.

    Returns:
        (DataFrame, DataFrame, dict, dict): p-values, adjusted p-values, A_j, B_j
    """
    messages = messages if messages is not None else []
    fitted = fit.fitted if isinstance(fit, FittedMatrix) else fit
    if fitted.shape != res.shape:
        raise ValueError("residuals and predictions do not conform")
    dev = res.to_numpy(dtype=np.float64) - fitted.to_numpy(dtype=np.float64)
    pvals = np.full(dev.shape, np.nan)
    col_mean, col_var = {}, {}

    for j, name in enumerate(res.columns):
        ok = ~np.isnan(dev[:, j])
        if ok.sum() < 2:
            Message.warn(messages, f"column {name}: fewer than 2 predicted cells, " \
                "step-5 p-values missing")
            continue
        d = dev[ok, j]
        a_j = float(d.mean())
        b_j = float(np.var(d))
        if b_j <= 1e-24 * max(1.0, a_j * a_j):
            Message.warn(messages, f"column {name}: deviations have no spread, " \
                "step-5 p-values missing")
            continue
        col_mean[name], col_var[name] = a_j, b_j
        pvals[ok, j] = normal_upper_tail((d - a_j) / np.sqrt(b_j))
        logger.debug("column %s: A = %.6g, B = %.6g over %d cells", name, a_j, b_j, \
            int(ok.sum()))

    if BhFamily(bh_family) == BhFamily.COLUMN:
        adjusted = np.column_stack([bh_adjust(pvals[:, j]) for j in range(pvals.shape[1])])
    else:
        adjusted = bh_adjust(pvals)
    return like(pvals, res), like(adjusted, res), col_mean, col_var

@contextmanager
def stage(name):
    """Prefix errors raised inside the block with the pipeline stage"""
    try:
        yield
    except MddcError as err:
        err.add_context(name)
        raise

def resolve_seed(seed):
    """Seed of the run; a fresh one from OS entropy when seed is None"""
    if seed is not None:
        return int(seed)
    return int(np.random.SeedSequence().entropy % 2**64)

def run_mddc(t: ContinTable, method=None, options: MddcOptions = None):
    """Run MDDC on a validated table.

    Args:
        t (ContinTable): the table.
        method (Method): cutoff selection; overrides options.method when given.
        options (MddcOptions): run options; defaults when None.

    Returns:
        MddcResult
    """
    options = options if options is not None else MddcOptions()
    if method is not None:
        options = options.model_copy(update={"method": Method(method)})
    seed = resolve_seed(options.seed)
    rng = RngStream(seed=seed)
    messages = []
    if t.message:
        messages.append(Message(MessageLevel.INFO, f"input: {t.message}"))

    logger.info("MDDC (%s) on a %d x %d table, seed %d", options.method.value, \
        t.shape[0], t.shape[1], seed)
    with stage("residuals"):
        res = std_pearson_residuals(t)

    mc_pval = mc_adj_pval = fisher_pval = fisher_signal = pval = None
    cut_messages = []
    if options.method == Method.BOXPLOT:
        with stage("cutoffs"):
            cut = boxplot_cutoffs(res, t, options.coef, options.col_specific, options.separate, \
                cut_messages)
        with stage("masking"):
            u, signal = build_u_matrix(res, t, cut)
    else:
        with stage("cutoffs"):
            null = mc_null_simulation(t, options.reps, rng.child(0), options.threads)
            cut = mc_cutoffs(null, options.quantile, res, t, options.col_specific, \
                options.separate, options.coef, cut_messages)
        with stage("masking"):
            u, upper_outlier = build_u_matrix(res, t, cut)
        with stage("mc p-values"):
            mc_pval = mc_pvalues(null, res, t, options.col_specific)
            mc_adj_pval = like(bh_adjust(mc_pval.to_numpy()), mc_pval)
            decisive = mc_adj_pval if options.adjust_mc_pval else mc_pval
            # signals stay above c+ so every flagged cell is masked in U
            signal = ((decisive <= options.alpha) & (upper_outlier == 1)).astype(float) \
                .where(decisive.notna())
        with stage("fisher"):
            fisher_pval, fisher_signal = fisher_screen(t, options.class_labels, \
                options.alpha, options.exclude_same_class, messages)
        pval = mc_pval.where(mc_pval.notna(), fisher_pval)
    messages.extend(Message(m.level, f"cutoffs: {m.msg}") for m in cut_messages)

    logger.info("step 3: connecting units at |cor| >= %s", options.c_corr)
    with stage("correlation"):
        graph = connect_aes(u, options.c_corr, options.orientation)
    with stage("prediction"):
        fit = fit_predictions(u, graph)
    with stage("inference"):
        corr_pval, corr_adj, col_mean, col_var = standardize_and_test(res, fit, \
            options.bh_family, messages)

    return MddcResult(method=options.method, seed=seed, univariate_signal=signal, \
        u_matrix=u, cutoffs=cut, mc_pval=mc_pval, mc_adj_pval=mc_adj_pval, \
        fisher_pval=fisher_pval, fisher_signal=fisher_signal, pval=pval, \
        corr_signal_pval=corr_pval, corr_signal_adj_pval=corr_adj, col_mean=col_mean, \
        col_var=col_var, message=Message.join_messages(messages))
