"""Tests for module mddc_analytics.api.mddc_engine"""
# standard python stuff
import logging
import unittest

# python libraries
import numpy as np
import pandas as pd
import pytest

from mddc_analytics import cli
from mddc_analytics.config import env_config
import mddc_analytics.constants as constants
from mddc_analytics.api.types import CutoffSet, ConnectedAeGraph, MddcOptions, Method, \
    BhFamily, CorrOrientation
from mddc_analytics.api.contin_table import validate_and_fix
from mddc_analytics.api.datagen import generate_tables
from mddc_analytics.api.io_report import load_fixture, fixture_request
from mddc_analytics.api.stats_kernel import fisher_exact_greater
from mddc_analytics.api.mddc_engine import build_u_matrix, fisher_screen, connect_aes, \
    fit_predictions, standardize_and_test, run_mddc
from mddc_analytics.api.errors import NoComparisonColumns, AllInfinite
from mddc_analytics.api.examples.examples_tables import fisher_2x2

logger = logging.getLogger('mddc_analytics')
if not logger.handlers:
    cli.config_logger(env_config[constants.LOG_LEVEL])

def table(counts, rows=None, cols=None):
    counts = np.asarray(counts)
    rows = rows or [f"AE{i}" for i in range(counts.shape[0])]
    cols = cols or [f"D{j}" for j in range(counts.shape[1])]
    return validate_and_fix(pd.DataFrame(counts, index=rows, columns=cols))

def units(rows):
    rows = np.asarray(rows, dtype=np.float64)
    return pd.DataFrame(rows, index=[f"AE{i}" for i in range(rows.shape[0])], \
        columns=[f"D{j}" for j in range(rows.shape[1])])

class TestBuildUMatrix(unittest.TestCase):
    """build_u_matrix"""

    def test_cases(self):
        t = table([[5, 5], [5, 0]])
        res = pd.DataFrame([[3.0, 5.0], [-5.0, -3.0]], index=t.counts.index, \
            columns=t.counts.columns)
        cut = CutoffSet(col_names=t.col_names, upper=[4.0, 4.0], zero_lower=[-1.0, -2.0])
        u, signal = build_u_matrix(res, t, cut)
        # inside fence
        assert u.iat[0, 0] == 3.0 and signal.iat[0, 0] == 0
        # upper outlier
        assert np.isnan(u.iat[0, 1]) and signal.iat[0, 1] == 1
        # lower outlier is masked, not a signal
        assert np.isnan(u.iat[1, 0]) and signal.iat[1, 0] == 0
        # zero cell below c0
        assert np.isnan(u.iat[1, 1]) and signal.iat[1, 1] == 0

    def test_zero_cells_are_never_signals(self):
        t = table([[5, 5], [5, 0]])
        res = pd.DataFrame([[0.0, 0.0], [0.0, 9.0]], index=t.counts.index, \
            columns=t.counts.columns)
        cut = CutoffSet(col_names=t.col_names, upper=[4.0, 4.0], zero_lower=[-1.0, -1.0])
        u, signal = build_u_matrix(res, t, cut)
        assert u.iat[1, 1] == 9.0
        assert signal.iat[1, 1] == 0

class TestFisherScreen(unittest.TestCase):
    """fisher_screen"""

    def test_single_extreme_table(self):
        t = table(fisher_2x2["counts"], fisher_2x2["row_names"], fisher_2x2["col_names"])
        messages = []
        pvals, signal = fisher_screen(t, messages=messages)
        assert pvals.loc["Nausea", "DrugA"] == pytest.approx(1 / 70)
        assert signal.loc["Nausea", "DrugA"] == 1
        assert pvals.loc["Headache", "DrugB"] == pytest.approx(1 / 70)
        # zero cells are skipped
        assert np.isnan(pvals.loc["Nausea", "DrugB"])
        assert np.isnan(signal.loc["Nausea", "DrugB"])
        assert len(messages) == 1

    def test_same_class_leaves_nothing(self):
        t = table(fisher_2x2["counts"], fisher_2x2["row_names"], fisher_2x2["col_names"])
        with pytest.raises(NoComparisonColumns):
            fisher_screen(t, class_labels=["beta", "beta"])
        pvals, _ = fisher_screen(t, class_labels=["beta", "beta"], exclude_same_class=False)
        assert pvals.loc["Nausea", "DrugA"] == pytest.approx(1 / 70)

    def test_other_column_is_the_pool(self):
        t = table([[3, 40, 10], [20, 2, 30], [25, 30, 80]], cols=["A", "B", "Other"])
        pvals, _ = fisher_screen(t)
        n = t.values
        expected = fisher_exact_greater(3, n[0, 2], n[:, 0].sum() - 3, n[:, 2].sum() - n[0, 2])
        assert pvals.loc["AE0", "A"] == pytest.approx(expected)
        expected = fisher_exact_greater(2, n[1, 2], n[:, 1].sum() - 2, n[:, 2].sum() - n[1, 2])
        assert pvals.loc["AE1", "B"] == pytest.approx(expected)
        # only counts 1..5 are screened
        assert pvals.notna().sum().sum() == 2

    def test_class_labels(self):
        t = table([[3, 40, 10], [20, 2, 30], [25, 30, 80]], cols=["A", "B", "C"])
        pvals, _ = fisher_screen(t, class_labels=["x", "x", "y"])
        n = t.values
        expected = fisher_exact_greater(3, n[0, 2], n[:, 0].sum() - 3, n[:, 2].sum() - n[0, 2])
        assert pvals.loc["AE0", "A"] == pytest.approx(expected)

class TestConnectAes(unittest.TestCase):
    """connect_aes"""

    def setUp(self):
        self.u = units([[1, 2, 3, 4, 5], [2, 4, 6, 8, 10], [-1, -2, -3, -4, -5], \
            [np.nan, np.nan, np.nan, 1, 3], [1, -1, 0, 1, -1]])

    def test_connections(self):
        g = connect_aes(self.u, 0.8)
        connected = dict(g.neighbors[0])
        assert connected[1] == pytest.approx(1.0)
        assert connected[2] == pytest.approx(-1.0)
        # only two overlapping positions
        assert g.neighbors[3] == []
        assert np.isnan(g.correlations.iat[0, 3])
        assert g.correlations.iat[0, 1] == pytest.approx(g.correlations.iat[1, 0])
        assert (g.correlations.abs().fillna(0) <= 1).all().all()

    def test_threshold_monotone(self):
        gen = np.random.default_rng(1)
        u = units(gen.normal(size=(12, 6)))
        counts = [connect_aes(u, c).pair_count() for c in (0.1, 0.2, 0.4, 0.8)]
        assert counts == sorted(counts, reverse=True)

    def test_column_orientation(self):
        g = connect_aes(self.u.T, 0.8, CorrOrientation.COLUMN)
        assert g.labels == list(self.u.index)
        assert dict(g.neighbors[0])[1] == pytest.approx(1.0)

class TestFitPredictions(unittest.TestCase):
    """fit_predictions"""

    def test_identical_rows(self):
        u = units([[1, 2, 3, 4], [1, 2, 3, 4], [1, -1, -1, 1]])
        fit = fit_predictions(u, connect_aes(u, 0.8))
        assert fit.fitted.iloc[0].to_numpy() == pytest.approx([1, 2, 3, 4])
        assert fit.intercepts[("AE0", "AE1")] == pytest.approx(0)
        assert fit.slopes[("AE0", "AE1")] == pytest.approx(1)
        # no connected AE
        assert fit.fitted.iloc[2].isna().all()

    def test_abs_cor_weights(self):
        u = units([[1, 2, 3, 4], [2, 4, 6, np.nan], [4, 3, 2, 1]])
        g = ConnectedAeGraph(labels=list(u.index), neighbors={0: [(1, 0.9), (2, -0.9)], \
            1: [], 2: []}, threshold=0.8, correlations=u.T.corr())
        fit = fit_predictions(u, g)
        assert fit.weights[("AE0", "AE1")] == pytest.approx(0.5)
        assert fit.weights[("AE0", "AE2")] == pytest.approx(0.5)
        assert fit.fitted.iloc[0].to_numpy() == pytest.approx([1, 2, 3, 4])
        assert fit.fitted.iloc[1].isna().all()

class TestStandardizeAndTest(unittest.TestCase):
    """standardize_and_test"""

    def test_deviations(self):
        res = pd.DataFrame({"a": [1.0, 2.0, 3.0], "b": [4.0, 4.0, 4.0]}, \
            index=["x", "y", "z"])
        messages = []
        pvals, adj, col_mean, col_var = standardize_and_test(res, res * 0, \
            messages=messages)
        assert col_mean["a"] == pytest.approx(2)
        assert col_var["a"] == pytest.approx(2 / 3)
        assert pvals["a"].to_numpy() == pytest.approx([0.8896, 0.5, 0.1104], abs=1e-4)
        assert pvals["b"].isna().all()
        assert "b" not in col_var
        assert any("column b" in m.msg for m in messages)
        assert (adj["a"] >= pvals["a"]).all()

    def test_missing_predictions(self):
        res = pd.DataFrame({"a": [1.0, 2.0, 3.0]}, index=["x", "y", "z"])
        fitted = pd.DataFrame({"a": [np.nan, np.nan, 0.0]}, index=["x", "y", "z"])
        pvals, _, _, _ = standardize_and_test(res, fitted)
        assert pvals["a"].isna().all()

    def test_bh_family(self):
        gen = np.random.default_rng(2)
        res = pd.DataFrame(gen.normal(size=(20, 3)), columns=["a", "b", "c"])
        fitted = res * 0
        pvals, adj_table, _, _ = standardize_and_test(res, fitted)
        _, adj_column, _, _ = standardize_and_test(res, fitted, BhFamily.COLUMN)
        assert (adj_table >= pvals - 1e-15).all().all()
        assert (adj_column >= pvals - 1e-15).all().all()

class TestRunMddc(unittest.TestCase):
    """run_mddc"""

    @classmethod
    def setUpClass(cls):
        cls.t = load_fixture("synthetic_statin49")

    def test_boxplot(self):
        result = run_mddc(self.t, Method.BOXPLOT)
        assert result.mc_pval is None and result.fisher_signal is None
        assert result.univariate_signal.shape == self.t.shape
        flagged = result.univariate_signal.to_numpy() == 1
        assert np.isnan(result.u_matrix.to_numpy()[flagged]).all()
        assert result.univariate_signal.loc["Rhabdomyolysis", "Atorvastatin"] == 1
        adj, raw = result.corr_signal_adj_pval.to_numpy(), result.corr_signal_pval.to_numpy()
        ok = ~np.isnan(raw)
        assert (adj[ok] >= raw[ok] - 1e-15).all()
        assert result.coef == [1.5] * 7

    def test_monte_carlo(self):
        options = MddcOptions(reps=300, seed=4, threads=1)
        result = run_mddc(self.t, options=options)
        again = run_mddc(self.t, options=options.model_copy(update={"threads": 3}))
        pd.testing.assert_frame_equal(result.pval, again.pval)
        pd.testing.assert_frame_equal(result.corr_signal_pval, again.corr_signal_pval)
        assert result.seed == 4

        n = self.t.values
        mc_present = result.mc_pval.notna().to_numpy()
        fisher_present = result.fisher_pval.notna().to_numpy()
        assert not (mc_present & fisher_present).any()
        assert ((mc_present | fisher_present) == (n > 0)).all()
        assert result.pval.notna().to_numpy().sum() == (n > 0).sum()
        assert result.univariate_signal.loc["Rhabdomyolysis", "Atorvastatin"] == 1

    def test_signal_implies_masked(self):
        result = run_mddc(self.t, options=MddcOptions(reps=1000, seed=9))
        flagged = result.univariate_signal.to_numpy() == 1
        assert np.isnan(result.u_matrix.to_numpy()[flagged]).all()

    def test_signal_implies_masked_with_sparse_column(self):
        # few null tables reach a count above 5 in D2, so most of its maxima are -inf
        for trial in range(12):
            gen = np.random.default_rng(100 + trial)
            counts = np.column_stack([gen.poisson(40, 25), gen.poisson(60, 25), \
                gen.poisson(1.2, 25)])
            counts[trial, 2] = 7 + trial % 4
            result = run_mddc(table(counts), options=MddcOptions(reps=2000, seed=trial, \
                threads=1))
            flagged = result.univariate_signal.to_numpy() == 1
            assert np.isnan(result.u_matrix.to_numpy()[flagged]).all()
            assert (result.mc_pval.to_numpy()[flagged] <= 0.05).all()

    def test_cutoff_warnings_are_not_nested(self):
        counts = np.random.default_rng(2).integers(10, 60, size=(8, 4))
        counts[0, 2] = 0
        result = run_mddc(table(counts), Method.BOXPLOT)
        assert "cutoffs: column D2 zero cells" in result.message
        assert "cutoffs: Warning" not in result.message

    def test_stage_in_error(self):
        t = table(fisher_2x2["counts"], fisher_2x2["row_names"], fisher_2x2["col_names"])
        with pytest.raises(AllInfinite) as err:
            run_mddc(t, options=MddcOptions(reps=10, seed=1))
        assert str(err.value).startswith("cutoffs: ")

    def test_row_permutation(self):
        perm = np.random.default_rng(0).permutation(self.t.shape[0])
        permuted = validate_and_fix(self.t.counts.iloc[perm], strict=True)
        first = run_mddc(self.t, Method.BOXPLOT)
        second = run_mddc(permuted, Method.BOXPLOT)
        pd.testing.assert_frame_equal(second.univariate_signal, \
            first.univariate_signal.iloc[perm])
        pd.testing.assert_frame_equal(second.corr_signal_pval, \
            first.corr_signal_pval.iloc[perm], check_exact=False, atol=1e-9)

def test_signal_recovery():
    req = fixture_request("synthetic_statin49").model_copy(update={"n_rep": 20, "seed": 77})
    hits, null_rates = 0, []
    for k, t in enumerate(generate_tables(req)):
        result = run_mddc(t, options=MddcOptions(reps=300, seed=k, threads=1))
        signal = result.univariate_signal.fillna(0)
        hits += int(signal.loc["Rhabdomyolysis", "Atorvastatin"] == 1)
        others = signal.to_numpy().copy()
        others[t.row_names.index("Rhabdomyolysis"), t.col_names.index("Atorvastatin")] = np.nan
        null_rates.append(np.nanmean(others))
    assert hits >= 19
    assert np.mean(null_rates) <= 0.07
