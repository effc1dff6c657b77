"""
Module containing pydantic data models for mddc analytics
"""
# core python dependencies
from typing import Dict, List, Optional, Sequence, Tuple, Union
from enum import Enum
import logging

# external module dependencies
import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

# mddc dependencies
from mddc_analytics.advancedparams import AdvancedParameters as AP
from mddc_analytics.api.errors import DimensionMismatch

logger = logging.getLogger('mddc_analytics')

#### Enumerations

class Method(str, Enum):
    """
    Cutoff selection method for step 2 of MDDC
    """
    BOXPLOT = "boxplot"
    MONTE_CARLO = "monte-carlo"

class CutoffScope(str, Enum):
    """
    Whether cutoffs are computed within each drug column or over the whole table
    """
    PER_COLUMN = "per-column"
    WHOLE_TABLE = "whole-table"

class CorrOrientation(str, Enum):
    """
    Correlations between AE rows (default) or between drug columns
    """
    ROW = "row"
    COLUMN = "column"

class BhFamily(str, Enum):
    """
    Family over which step-5 p-values are Benjamini-Hochberg adjusted
    """
    TABLE = "table"
    COLUMN = "column"

#### Random streams

class RngStream(BaseModel):
    """
    Counter-based random stream keyed by (seed, stream_id).
    The same key yields the same variates on every platform and for every worker count.
    """
    model_config = ConfigDict(frozen=True)

    seed: int = Field(..., ge=0, lt=2**128, description="seed of the whole run")
    stream_id: Tuple[int, ...] = Field((), description="path of the stream below the seed, \
        e.g. (replication,) or (replication, attempt)")

    @field_validator("stream_id", mode="before")
    @classmethod
    def _int_to_tuple(cls, value):
        if isinstance(value, (int, np.integer)):
            return (int(value),)
        return value

    def child(self, *keys):
        """Stream derived from this one by appending keys to its stream_id"""
        return RngStream(seed=self.seed, stream_id=self.stream_id + tuple(int(k) for k in keys))

    def generator(self):
        """Fresh numpy Generator on a Philox bit generator positioned at the start of the stream"""
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        return np.random.Generator(np.random.Philox(seq))

#### Contingency tables

class ContinTable(BaseModel):
    """
    Labeled I x J matrix of report counts; rows are AEs and columns are drugs.
    Build instances with contin_table.validate_and_fix.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    counts: pd.DataFrame = Field(..., description="int64 counts with AE index and drug columns")
    message: Optional[str] = Field(None, description="warnings recorded while fixing the input")

    @property
    def row_names(self) -> List[str]:
        """AE labels"""
        return list(self.counts.index)

    @property
    def col_names(self) -> List[str]:
        """drug labels"""
        return list(self.counts.columns)

    @property
    def shape(self) -> Tuple[int, int]:
        """(I, J)"""
        return self.counts.shape

    @property
    def values(self) -> np.ndarray:
        """counts as an int64 array"""
        return self.counts.to_numpy(dtype=np.int64)

    @property
    def row_marginals(self) -> np.ndarray:
        """n_i. for every AE"""
        return self.values.sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        """n_.j for every drug"""
        return self.values.sum(axis=0)

    @property
    def total(self) -> int:
        """grand total n.."""
        return int(self.values.sum())

    def copy(self):
        """Deep copy"""
        return ContinTable(counts=self.counts.copy(), message=self.message)

    def equals(self, other) -> bool:
        """Same counts and labels"""
        return self.counts.equals(other.counts) and \
            self.row_names == other.row_names and self.col_names == other.col_names

#### Cutoffs

class BoxplotStats(BaseModel):
    """
    Quartiles of a group of residuals and the coefficient applied to its IQR
    """
    q1: float = Field(..., description="first quartile")
    q3: float = Field(..., description="third quartile")
    coef: float = Field(..., ge=0, description="multiplier of the IQR")

    @property
    def iqr(self) -> float:
        """interquartile range"""
        return self.q3 - self.q1

    @property
    def lower(self) -> float:
        """Q1 - coef * IQR"""
        return self.q1 - self.coef * self.iqr

    @property
    def upper(self) -> float:
        """Q3 + coef * IQR"""
        return self.q3 + self.coef * self.iqr

class CutoffSet(BaseModel):
    """
    Per-column cutoffs for step 2: c+ for nonzero cells and c0 for zero cells
    """
    col_names: List[str] = Field(..., description="drug labels, one per cutoff")
    upper: List[float] = Field(..., description="c+ per drug column")
    zero_lower: List[float] = Field(..., description="c0 per drug column")
    scope: CutoffScope = Field(CutoffScope.PER_COLUMN, description="per-column or whole-table")
    coef: Optional[List[float]] = Field(None, description="boxplot coefficient used per column")
    message: Optional[str] = Field(None, description="warnings about degenerate groups")

    def as_series(self):
        """(upper, zero_lower) as pandas Series indexed by drug"""
        return pd.Series(self.upper, index=self.col_names, name="upper"), \
            pd.Series(self.zero_lower, index=self.col_names, name="zero_lower")

class NullMaxima(BaseModel):
    """
    Column maxima of residuals over admissible cells (n_ij > 5) of simulated null tables.
    -inf marks a replication without any admissible cell in the column.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    col_names: List[str] = Field(..., description="drug labels")
    values: np.ndarray = Field(..., description="J x R matrix of maxima")

    @property
    def reps(self) -> int:
        """number of replications R"""
        return self.values.shape[1]

    def pooled(self) -> np.ndarray:
        """Per-replication maxima over the whole table (1 x R)"""
        return self.values.max(axis=0, keepdims=True)

#### MDDC

class ConnectedAeGraph(BaseModel):
    """
    Connected rows per row of U (AEs by default, drugs when orientation is column)
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    labels: List[str] = Field(..., description="labels of the correlated units")
    neighbors: Dict[int, List[Tuple[int, float]]] = Field(..., \
        description="position -> [(connected position, correlation)]")
    threshold: float = Field(..., ge=0, le=1, description="c_corr")
    orientation: CorrOrientation = Field(CorrOrientation.ROW, description="row or column")
    correlations: pd.DataFrame = Field(..., description="pairwise-complete correlation matrix")

    def pair_count(self) -> int:
        """Number of unordered connected pairs"""
        return sum(len(v) for v in self.neighbors.values()) // 2

class FittedMatrix(BaseModel):
    """
    Predicted U values from connected units, with the per-pair fits kept for diagnostics
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    fitted: pd.DataFrame = Field(..., description="u-hat; NaN when no prediction is available")
    intercepts: Dict[Tuple[str, str], float] = Field({}, description="alpha_ik")
    slopes: Dict[Tuple[str, str], float] = Field({}, description="beta_ik")
    weights: Dict[Tuple[str, str], float] = Field({}, description="|cor_ik| / sum |cor_il|")

class MddcOptions(BaseModel):
    """
    Options of an MDDC run; defaults follow the published package defaults
    """
    method: Method = Field(Method.MONTE_CARLO, description="cutoff selection method")
    coef: Union[float, List[float]] = Field(AP.boxplot_coef, \
        description="boxplot coefficient, scalar or one per drug column")
    col_specific: bool = Field(True, description="cutoffs within each drug column")
    separate: bool = Field(True, description="separate fences for zero and nonzero cells")
    c_corr: float = Field(AP.corr_limit, ge=0, le=1, description="correlation threshold")
    orientation: CorrOrientation = Field(CorrOrientation.ROW, \
        description="correlate AE rows or drug columns in step 3")
    reps: int = Field(AP.mc_reps, ge=1, description="Monte Carlo replications")
    quantile: float = Field(AP.mc_quantile, gt=0, le=1, description="quantile of null maxima")
    exclude_same_class: bool = Field(True, \
        description="drop same-class drugs from Fisher comparison columns")
    class_labels: Optional[List[str]] = Field(None, description="drug class per column")
    alpha: float = Field(AP.signal_alpha, gt=0, lt=1, description="signal threshold for \
        step-2 p-values")
    adjust_mc_pval: bool = Field(False, description="apply BH to MC p-values before \
        thresholding")
    bh_family: BhFamily = Field(BhFamily.TABLE, description="family for step-5 BH")
    seed: Optional[int] = Field(None, ge=0, description="seed; drawn from entropy when None")
    threads: Optional[int] = Field(None, ge=1, description="worker cap; MDDC_THREADS when None")

class MddcResult(BaseModel):
    """
    Output of an MDDC run. Matrices are labeled DataFrames; NaN is MISSING.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    method: Method = Field(..., description="cutoff selection method")
    seed: Optional[int] = Field(None, description="seed actually used")
    univariate_signal: pd.DataFrame = Field(..., description="step-2 signals (0/1)")
    u_matrix: pd.DataFrame = Field(..., description="residuals with outliers masked")
    cutoffs: CutoffSet = Field(..., description="step-2 cutoffs")
    mc_pval: Optional[pd.DataFrame] = Field(None, description="MC p-values, cells n > 5")
    mc_adj_pval: Optional[pd.DataFrame] = Field(None, description="BH-adjusted MC p-values")
    fisher_pval: Optional[pd.DataFrame] = Field(None, description="Fisher p-values, 0 < n <= 5")
    fisher_signal: Optional[pd.DataFrame] = Field(None, description="Fisher signals (0/1)")
    pval: Optional[pd.DataFrame] = Field(None, description="MC or Fisher p-value per cell")
    corr_signal_pval: pd.DataFrame = Field(..., description="step-5 p-values")
    corr_signal_adj_pval: pd.DataFrame = Field(..., description="step-5 BH-adjusted p-values")
    col_mean: Dict[str, float] = Field({}, description="A_j")
    col_var: Dict[str, float] = Field({}, description="B_j")
    message: Optional[str] = Field(None, description="warnings collected over the run")

    @property
    def coef(self) -> Optional[List[float]]:
        """boxplot coefficient used per drug column"""
        return self.cutoffs.coef

    def corr_signal(self, threshold: float = AP.signal_alpha, adjusted: bool = True):
        """Step-5 signals: 1 where the (adjusted) p-value is below threshold, NaN when MISSING"""
        pvals = self.corr_signal_adj_pval if adjusted else self.corr_signal_pval
        return (pvals < threshold).astype(float).where(pvals.notna())

#### Data generation

class ClusterSpec(BaseModel):
    """
    Grouping of AE rows into clusters with their within-cluster correlation
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    assignment: Optional[List[str]] = Field(None, description="cluster id per AE row; \
        None means one cluster per row, or a single cluster with an explicit matrix")
    within_rho: Union[float, Dict[str, float], np.ndarray] = Field(AP.within_cluster_rho, \
        description="scalar rho, rho per cluster id, or an explicit I x I correlation matrix")
    message: Optional[str] = Field(None, description="notes recorded while assigning clusters")

    @classmethod
    def from_ae_idx(cls, ae_idx: pd.DataFrame, row_names: Sequence[str], \
        within_rho=AP.within_cluster_rho):
        """Clusters from an idx/AE frame (one row per AE, idx = cluster id).

        AEs of the table missing from ae_idx become singleton clusters.

        Raises:
            DimensionMismatch: ae_idx lists an AE that is not a row of the table, or
                lacks the idx/AE columns.
        """
        if not {"idx", "AE"} <= set(ae_idx.columns):
            raise DimensionMismatch("cluster index needs columns 'idx' and 'AE'")
        lookup = {str(ae): str(idx) for idx, ae in zip(ae_idx["idx"], ae_idx["AE"])}
        unknown = sorted(set(lookup) - {str(x) for x in row_names})
        if unknown:
            raise DimensionMismatch(f"cluster index lists AEs absent from the table: " \
                f"{', '.join(unknown[:5])}", labels=unknown)
        assignment, singletons = [], []
        for name in row_names:
            if str(name) in lookup:
                assignment.append(lookup[str(name)])
            else:
                singletons.append(str(name))
                assignment.append(f"singleton:{name}")
        message = None
        if singletons:
            message = f"Info: {len(singletons)} AEs without a cluster are singletons"
            logger.info(message)
        return cls(assignment=assignment, within_rho=within_rho, message=message)

class GenerationRequest(BaseModel):
    """
    Request for synthetic tables with clustered AEs
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    row_marginal: List[int] = Field(..., description="n_i. per AE")
    column_marginal: List[int] = Field(..., description="n_.j per drug")
    signal: Optional[np.ndarray] = Field(None, description="I x J lambda matrix; all ones if None")
    clusters: ClusterSpec = Field(ClusterSpec(), description="AE clusters")
    n_rep: int = Field(1, ge=1, description="number of tables")
    seed: int = Field(0, ge=0, description="seed of the run")
    tolerance: Optional[float] = Field(None, gt=0, description="maximum RTD in percent")
    max_attempts: int = Field(AP.max_regeneration_attempts, ge=1, \
        description="regeneration ceiling per table")
    row_names: Optional[List[str]] = Field(None, description="AE labels")
    col_names: Optional[List[str]] = Field(None, description="drug labels")
    threads: Optional[int] = Field(None, ge=1, description="worker cap")

    @classmethod
    def from_table(cls, table: ContinTable, clusters: Optional[ClusterSpec] = None, \
        **kwargs):
        """Request reproducing the marginals and labels of table.

        Without clusters, the correlation matrix estimated from the table is used as
        a single cluster over all AEs.
        """
        if clusters is None:
            # imported here: datagen depends on this module
            from mddc_analytics.api.datagen import estimate_cluster_corr
            clusters = ClusterSpec(within_rho=estimate_cluster_corr(table).to_numpy())
        return cls(row_marginal=table.row_marginals.tolist(), \
            column_marginal=table.col_marginals.tolist(), clusters=clusters, \
            row_names=table.row_names, col_names=table.col_names, **kwargs)

#### Reports and runs

class ReportRow(BaseModel):
    """
    One flagged (drug, AE) pair with its observed and expected count
    """
    drug: str = Field(..., description="drug label")
    ae: str = Field(..., description="AE label")
    observed: int = Field(..., ge=0, description="observed count")
    expected: float = Field(..., ge=0, description="expected count under independence")
    std_pearson_res: Optional[float] = Field(None, description="standardized Pearson residual")

class RtdSummary(BaseModel):
    """
    Summary statistics of relative total deviations, in percent
    """
    min: float = Field(..., description="Min.")
    median: float = Field(..., description="Median")
    mean: float = Field(..., description="Mean")
    max: float = Field(..., description="Max.")
    sd: float = Field(..., description="SD (sample)")
    count: int = Field(..., ge=1, description="number of tables")

class RunManifest(BaseModel):
    """
    Provenance written next to the outputs of every CLI run
    """
    command: str = Field(..., description="subcommand")
    tool_version: str = Field(..., description="mddc_analytics version")
    inputs: Dict[str, Optional[str]] = Field({}, description="input paths or fixture names")
    parameters: Dict[str, object] = Field({}, description="effective parameters")
    seed: Optional[int] = Field(None, description="seed actually used")
    outputs: Sequence[str] = Field([], description="files written")
