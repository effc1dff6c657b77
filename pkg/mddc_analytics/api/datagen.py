"""
Synthetic contingency tables with clustered, correlated AEs, optionally regenerated until
their grand total is within a tolerance of the original.
"""
# core python dependencies
import logging

# external dependencies
import numpy as np
import pandas as pd
from joblib import Parallel, delayed

# mddc dependencies
from mddc_analytics.api.types import ContinTable, ClusterSpec, GenerationRequest, \
    RngStream, RtdSummary
from mddc_analytics.api.errors import MarginalMismatch, DimensionMismatch, \
    RetryExhausted, EmptyTable, EmptyData
from mddc_analytics.api.contin_table import std_pearson_residuals
from mddc_analytics.api.stats_kernel import mvn_factor
from mddc_analytics.api.utils import Message, resolve_threads, chunk_ranges

logger = logging.getLogger('mddc_analytics')

def _nearest_correlation(corr):
    """Clip negative eigenvalues and rescale to a unit diagonal"""
    sym = (corr + corr.T) / 2
    eigval, eigvec = np.linalg.eigh(sym)
    clipped = (eigvec * np.clip(eigval, 0.0, None)) @ eigvec.T
    scale = np.sqrt(np.clip(np.diag(clipped), 1e-300, None))
    clipped = clipped / np.outer(scale, scale)
    np.fill_diagonal(clipped, 1.0)
    return (clipped + clipped.T) / 2

def estimate_cluster_corr(t: ContinTable, project=True, messages=None):
    """Correlation between the residual rows of t.

    Args:
        t (ContinTable): reference table.
        project (bool): return the nearest PSD correlation matrix instead of the raw one.
        messages (list): collects warnings about rows without variance.

    Returns:
        DataFrame: I x I correlation matrix labeled by AE
    """
    messages = messages if messages is not None else []
    res = std_pearson_residuals(t)
    corr = res.T.corr(method="pearson")
    flat = corr.isna().all(axis=1) | (res.std(axis=1, ddof=0) == 0) | res.isna().all(axis=1)
    if flat.any():
        Message.warn(messages, f"{int(flat.sum())} AE rows have no residual variance; " \
            "their correlations are set to 0")
    values = corr.to_numpy(dtype=np.float64, copy=True)
    values[np.isnan(values)] = 0.0
    values[flat.to_numpy(), :] = 0.0
    values[:, flat.to_numpy()] = 0.0
    np.fill_diagonal(values, 1.0)
    if project:
        values = _nearest_correlation(values)
    return pd.DataFrame(values, index=corr.index, columns=corr.columns)

def cluster_blocks(clusters: ClusterSpec, n_rows):
    """Rows and covariance factor of every cluster.

    All singleton rows share one block with factor None (independent draws).

    Returns:
        list of (ndarray, ndarray or None)
    """
    rho = clusters.within_rho
    if isinstance(rho, np.ndarray):
        matrix = np.atleast_2d(rho.astype(np.float64))
        if matrix.shape != (n_rows, n_rows):
            raise DimensionMismatch(f"correlation matrix is {matrix.shape}, expected " \
                f"{(n_rows, n_rows)}")
        if not np.allclose(np.diag(matrix), 1.0):
            raise ValueError("correlation matrix needs a unit diagonal")
        if clusters.assignment is None:
            return [(np.arange(n_rows), mvn_factor(matrix))]
    if clusters.assignment is None:
        return [(np.arange(n_rows), None)]
    if len(clusters.assignment) != n_rows:
        raise DimensionMismatch(f"{len(clusters.assignment)} cluster ids for {n_rows} AEs")

    members = {}
    for pos, gid in enumerate(clusters.assignment):
        members.setdefault(gid, []).append(pos)
    blocks, singles = [], []
    for gid, rows in members.items():
        rows = np.asarray(rows)
        if rows.size == 1:
            singles.append(rows[0])
            continue
        if isinstance(rho, np.ndarray):
            cov = rho[np.ix_(rows, rows)].astype(np.float64)
        else:
            value = rho.get(gid, 0.0) if isinstance(rho, dict) else float(rho)
            cov = np.full((rows.size, rows.size), value)
            np.fill_diagonal(cov, 1.0)
        blocks.append((rows, mvn_factor(cov)))
    if singles:
        blocks.append((np.asarray(singles), None))
    return blocks

def draw_residuals(gen, blocks, n_rows, n_cols):
    """I x J standard normal residuals, correlated within clusters, independent across
    drug columns"""
    e = np.empty((n_rows, n_cols))
    for rows, factor in blocks:
        z = gen.standard_normal((n_cols, rows.size))
        e[rows, :] = (z if factor is None else z @ factor.T).T
    return e

class TableSampler:
    """
    Everything needed to draw replication r, attempt a of a generation request
    """

    def __init__(self, req: GenerationRequest):
        rows = np.asarray(req.row_marginal, dtype=np.int64)
        cols = np.asarray(req.column_marginal, dtype=np.int64)
        if (rows < 0).any() or (cols < 0).any():
            raise ValueError("marginals must be nonnegative")
        if rows.sum() != cols.sum():
            raise MarginalMismatch(f"row marginals sum to {rows.sum()}, column marginals " \
                f"to {cols.sum()}", row_total=int(rows.sum()), col_total=int(cols.sum()))
        if rows.sum() <= 0:
            raise EmptyTable("marginals sum to zero")
        self.shape = (rows.size, cols.size)
        self.total = int(rows.sum())

        signal = np.ones(self.shape) if req.signal is None \
            else np.asarray(req.signal, dtype=np.float64)
        if signal.shape != self.shape:
            raise DimensionMismatch(f"signal matrix is {signal.shape}, expected {self.shape}")
        if (signal < 1).any():
            raise ValueError("signal strengths must be at least 1")

        p_row = rows / self.total
        p_col = cols / self.total
        expected = np.outer(rows, cols).astype(np.float64) / self.total
        self.mean = expected * signal
        self.scale = np.sqrt(self.mean * np.outer(1 - p_row, 1 - p_col))

        self.row_names = req.row_names or [f"AE_{i}" for i in range(1, rows.size + 1)]
        self.col_names = req.col_names or [f"drug_{j}" for j in range(1, cols.size + 1)]
        if len(self.row_names) != rows.size or len(self.col_names) != cols.size:
            raise DimensionMismatch("labels do not match the marginals")
        self.blocks = cluster_blocks(req.clusters, rows.size)
        self.rng = RngStream(seed=req.seed)

    def sample(self, rep, attempt=0):
        """Counts from stream (rep, attempt): rint(e * scale + mean), negatives mapped to 0"""
        gen = self.rng.child(rep, attempt).generator()
        x = draw_residuals(gen, self.blocks, *self.shape) * self.scale + self.mean
        counts = np.where(x < 0, 0, np.rint(x)).astype(np.int64)
        return ContinTable(counts=pd.DataFrame(counts, index=pd.Index(self.row_names, \
            dtype=object), columns=pd.Index(self.col_names, dtype=object)))

def _sample_chunk(sampler, reps):
    return [sampler.sample(rep) for rep in reps]

def generate_tables(req: GenerationRequest):
    """n_rep tables drawn independently; replication r uses stream (r, 0).

    Raises:
        MarginalMismatch, DimensionMismatch, NotPSD
    """
    sampler = TableSampler(req)
    threads = resolve_threads(req.threads)
    logger.info("generating %d tables of %d x %d", req.n_rep, *sampler.shape)
    chunks = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_sample_chunk)(sampler, chunk) for chunk in chunk_ranges(req.n_rep, threads))
    return [table for chunk in chunks for table in chunk]

def relative_total_deviation(orig_total, sim_total):
    """|orig - sim| / orig in percent"""
    if orig_total <= 0:
        raise ValueError("original total must be positive")
    return abs(orig_total - sim_total) / orig_total * 100

def _sample_within_tol(sampler, rep, tolerance, max_attempts):
    best = np.inf
    for attempt in range(max_attempts):
        table = sampler.sample(rep, attempt)
        rtd = relative_total_deviation(sampler.total, table.total)
        if rtd <= tolerance:
            if attempt:
                logger.debug("table %d accepted after %d regenerations", rep, attempt)
            return table
        best = min(best, rtd)
    raise RetryExhausted(f"table {rep + 1}: RTD stayed above {tolerance}% in " \
        f"{max_attempts} attempts (best {best:.4f}%)", rep=rep, best_rtd=best)

def _tol_chunk(sampler, reps, tolerance, max_attempts):
    return [_sample_within_tol(sampler, rep, tolerance, max_attempts) for rep in reps]

def generate_tables_with_tol(req: GenerationRequest, tolerance=None):
    """Like generate_tables, but a table whose RTD exceeds the tolerance is redrawn from
    stream (r, 1), (r, 2), ... Tables passing on the first attempt equal those of
    generate_tables.

    Raises:
        RetryExhausted: a table never met the tolerance within req.max_attempts draws.
    """
    tolerance = tolerance if tolerance is not None else req.tolerance
    if tolerance is None or tolerance <= 0:
        raise ValueError("a positive tolerance is required")
    sampler = TableSampler(req)
    threads = resolve_threads(req.threads)
    logger.info("generating %d tables of %d x %d within %s%% RTD", req.n_rep, \
        *sampler.shape, tolerance)
    chunks = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_tol_chunk)(sampler, chunk, tolerance, req.max_attempts)
        for chunk in chunk_ranges(req.n_rep, threads))
    return [table for chunk in chunks for table in chunk]

def summarize_rtd(values):
    """Min., Median, Mean, Max. and sample SD of RTD values"""
    rtd = pd.Series(values, dtype=np.float64)
    if rtd.empty:
        raise EmptyData("no RTD values to summarize")
    return RtdSummary(min=rtd.min(), median=rtd.median(), mean=rtd.mean(), max=rtd.max(), \
        sd=rtd.std(ddof=1), count=rtd.size)
