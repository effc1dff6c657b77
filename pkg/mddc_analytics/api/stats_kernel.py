"""
Statistical primitives used by the MDDC engines: quantiles, boxplot fences, the normal
upper tail, Fisher's exact test, Benjamini-Hochberg adjustment and seeded samplers.
"""
# core python dependencies
import logging
import math

# external dependencies
import numpy as np
from scipy.special import gammaln, logsumexp, ndtr
from statsmodels.stats.multitest import multipletests

# mddc dependencies
from mddc_analytics.api.types import BoxplotStats, RngStream
from mddc_analytics.api.errors import EmptyData, BadProbabilityVector, NotPSD
from mddc_analytics.advancedparams import AdvancedParameters

logger = logging.getLogger('mddc_analytics')

def as_generator(rng):
    """Accept an RngStream or an already positioned numpy Generator"""
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng

def quantile(data, q):
    """Linear interpolation quantile (x_(h) + frac * (x_(h+1) - x_(h)), h = (n-1)q + 1).

    Raises:
        EmptyData: data has no elements.
    """
    values = np.asarray(data, dtype=np.float64).ravel()
    if values.size == 0:
        raise EmptyData("quantile of an empty list")
    if not 0 <= q <= 1:
        raise ValueError(f"quantile level {q} outside [0, 1]")
    return float(np.quantile(values, q, method="linear"))

def boxplot_stats(data, coef):
    """Quartiles of the finite values of data, with coef attached"""
    values = np.asarray(data, dtype=np.float64).ravel()
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise EmptyData("boxplot fences need at least one finite value")
    q1, q3 = np.quantile(values, [0.25, 0.75], method="linear")
    return BoxplotStats(q1=float(q1), q3=float(q3), coef=coef)

def boxplot_fences(data, coef):
    """(Q1 - coef * IQR, Q3 + coef * IQR) over the finite values of data"""
    stats = boxplot_stats(data, coef)
    return stats.lower, stats.upper

def normal_upper_tail(z):
    """P(Z >= z) for a standard normal Z; works elementwise on arrays"""
    tail = ndtr(-np.asarray(z, dtype=np.float64))
    return float(tail) if np.ndim(tail) == 0 else tail

def _log_choose(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)

def fisher_exact_greater(a, b, c, d):
    """One-sided (greater) Fisher exact p-value of [[a, b], [c, d]].

    P(A >= a) under the hypergeometric law with the table's margins, summed in log
    space. The sum stops 40 standard deviations (plus 50) past the mode; the
    remaining terms do not register in double precision.
    """
    a, b, c, d = (int(x) for x in (a, b, c, d))
    if min(a, b, c, d) < 0:
        raise ValueError("Fisher's exact test needs nonnegative counts")
    row1, col1, total = a + b, a + c, a + b + c + d
    if total <= 0:
        raise ValueError("Fisher's exact test needs a positive grand total")
    k_min = max(0, row1 + col1 - total)
    k_max = min(row1, col1)
    if a <= k_min:
        return 1.0
    mode = (row1 + 1) * (col1 + 1) / (total + 2)
    spread = math.sqrt(row1 * col1 * (total - row1) * (total - col1) / \
        (total * total * max(total - 1, 1)))
    hi = min(k_max, int(max(a, mode) + 40 * spread + 50))
    ks = np.arange(a, hi + 1, dtype=np.float64)
    log_terms = _log_choose(col1, ks) + _log_choose(total - col1, row1 - ks) \
        - _log_choose(total, row1)
    return float(min(1.0, max(0.0, math.exp(logsumexp(log_terms)))))

def bh_adjust(p):
    """Benjamini-Hochberg step-up adjustment; NaN (MISSING) entries pass through.

    Args:
        p (array-like): p-values of any shape; m counts the non-NaN entries.

    Returns:
        ndarray: adjusted p-values in the shape of p.
    """
    pvals = np.asarray(p, dtype=np.float64)
    adjusted = pvals.copy()
    present = ~np.isnan(pvals)
    if present.any():
        adjusted[present] = multipletests(pvals[present], method="fdr_bh")[1]
    return adjusted

def round_half_even(x):
    """Nearest integer; exact halves go to the even neighbour"""
    return int(np.rint(x))

def sample_multinomial(rng, n, probs, size=None):
    """Multinomial counts summing exactly to n.

    Raises:
        BadProbabilityVector: negative entries or a sum off 1 by more than 1e-9.
    """
    probs = np.asarray(probs, dtype=np.float64).ravel()
    if probs.size == 0 or (probs < 0).any() or abs(probs.sum() - 1.0) > 1e-9:
        raise BadProbabilityVector("probabilities must be nonnegative and sum to 1")
    if n < 0:
        raise ValueError("multinomial size must be nonnegative")
    if n == 0:
        shape = probs.shape if size is None else (size,) + probs.shape
        return np.zeros(shape, dtype=np.int64)
    return as_generator(rng).multinomial(int(n), probs / probs.sum(), size=size) \
        .astype(np.int64)

def mvn_factor(cov):
    """Factor L with L L^T = cov, tolerating semidefinite covariance.

    The matrix is symmetrized and its eigenvalues above -psd_tolerance are clipped at 0.

    Raises:
        NotPSD: an eigenvalue below -psd_tolerance.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    sym = (cov + cov.T) / 2
    eigval, eigvec = np.linalg.eigh(sym)
    if eigval.size and eigval.min() < -AdvancedParameters.psd_tolerance:
        raise NotPSD(f"covariance has eigenvalue {eigval.min():.3g}", \
            eigenvalue=float(eigval.min()))
    return eigvec * np.sqrt(np.clip(eigval, 0.0, None))

def sample_mvn(rng, mean, cov=None, size=None, factor=None):
    """mean + L z with z i.i.d. standard normal; pass factor to reuse a factorization"""
    mean = np.asarray(mean, dtype=np.float64)
    lower = mvn_factor(cov) if factor is None else factor
    shape = (lower.shape[1],) if size is None else (size, lower.shape[1])
    z = as_generator(rng).standard_normal(shape)
    return mean + z @ lower.T
