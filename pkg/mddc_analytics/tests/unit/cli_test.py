"""Tests for module mddc_analytics.cli"""
# standard python stuff
import logging

# python libraries
import pandas as pd
import pytest
import yaml
from click.testing import CliRunner

from mddc_analytics import cli
from mddc_analytics.config import env_config
import mddc_analytics.constants as constants
from mddc_analytics.api.io_report import read_contin_csv, read_matrix_csv, \
    write_contin_csv, load_fixture

logger = logging.getLogger('mddc_analytics')
if not logger.handlers:
    cli.config_logger(env_config[constants.LOG_LEVEL])

@pytest.fixture
def runner():
    return CliRunner()

@pytest.fixture
def statin_csv(tmp_path):
    path = tmp_path / "statin.csv"
    write_contin_csv(load_fixture("synthetic_statin49"), path)
    return path

def invoke(runner, args):
    result = runner.invoke(cli.main, [str(a) for a in args])
    assert result.exit_code == 0, result.output
    return result

def test_analyze_monte_carlo(runner, statin_csv, tmp_path):
    out = tmp_path / "mc"
    invoke(runner, ["analyze", statin_csv, "--reps", 200, "--seed", 3, "--out", out, \
        "--heatmap"])
    for name in ["pval", "signal", "fisher_signal", "corr_signal_pval", \
        "corr_signal_adj_pval"]:
        assert (out / f"{name}.csv").exists()
    for name in ["signal", "fisher_signal", "corr_signal"]:
        assert (out / f"report_{name}.csv").exists()
        assert (out / f"heatmap_{name}.svg").exists()
    signal = read_matrix_csv(out / "signal.csv")
    assert signal.shape == (49, 7)
    assert signal.loc["Rhabdomyolysis", "Atorvastatin"] == 1
    report = pd.read_csv(out / "report_signal.csv")
    assert ((report["Drug"] == "Atorvastatin") & (report["AE"] == "Rhabdomyolysis")).any()
    manifest = yaml.safe_load((out / constants.MANIFEST_FILE).read_text())
    assert manifest["command"] == "analyze"
    assert manifest["seed"] == 3
    assert manifest["parameters"]["reps"] == 200

def test_analyze_boxplot(runner, tmp_path):
    out = tmp_path / "box"
    invoke(runner, ["analyze", "--fixture", "synthetic_statin49", "--method", "boxplot", \
        "--out", out])
    assert (out / "boxplot_signal.csv").exists()
    assert (out / "corr_signal_pval.csv").exists()
    assert not (out / "pval.csv").exists()
    assert not (out / "fisher_signal.csv").exists()

def test_analyze_thread_count_does_not_change_output(runner, statin_csv, tmp_path):
    for threads in (1, 2):
        invoke(runner, ["analyze", statin_csv, "--reps", 100, "--seed", 8, "--threads", \
            threads, "--out", tmp_path / f"t{threads}"])
    for name in ["pval.csv", "signal.csv", "corr_signal_pval.csv"]:
        assert (tmp_path / "t1" / name).read_text() == (tmp_path / "t2" / name).read_text()

def test_analyze_coef_file(runner, statin_csv, tmp_path):
    coef = tmp_path / "coef.csv"
    names = load_fixture("synthetic_statin49").col_names
    coef.write_text("drug,coef\n" + "".join(f"{n},2.0\n" for n in names))
    invoke(runner, ["analyze", statin_csv, "--method", "boxplot", "--coef", f"@{coef}", \
        "--out", tmp_path / "box"])
    manifest = yaml.safe_load((tmp_path / "box" / constants.MANIFEST_FILE).read_text())
    assert manifest["parameters"]["coef"] == [2.0] * 7

def test_analyze_error_exit(runner, tmp_path):
    path = tmp_path / "tiny.csv"
    path.write_text(",DrugA,DrugB\nNausea,4,0\nHeadache,0,4\n")
    result = runner.invoke(cli.main, ["analyze", str(path), "--reps", "10", "--out", \
        str(tmp_path / "out")])
    assert result.exit_code == 1
    assert "error: AllInfinite" in result.output

def test_analyze_bad_input(runner, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(",x,y\na,1,-2\nb,3,4\n")
    result = runner.invoke(cli.main, ["analyze", str(path), "--out", str(tmp_path / "o")])
    assert result.exit_code == 1
    assert "error: NegativeCount" in result.output

def test_generate(runner, tmp_path):
    out = tmp_path / "tables"
    invoke(runner, ["generate", "--row-marginal", "300,200,500", "--column-marginal", \
        "600,400", "--n-rep", 3, "--seed", 2, "--out", out])
    tables = sorted(out.glob("table_*.csv"))
    assert [p.name for p in tables] == ["table_001.csv", "table_002.csv", "table_003.csv"]
    t = read_contin_csv(tables[0])
    assert t.row_names == ["AE_1", "AE_2", "AE_3"]
    assert (out / constants.MANIFEST_FILE).exists()

def test_generate_from_fixture_and_rtd(runner, tmp_path):
    out = tmp_path / "tables"
    invoke(runner, ["generate", "--fixture", "synthetic_statin49", "--rho", 0.5, \
        "--n-rep", 4, "--tol", 5, "--out", out])
    original = load_fixture("synthetic_statin49")
    for path in out.glob("table_*.csv"):
        t = read_contin_csv(path)
        assert t.col_names == original.col_names
        assert abs(t.total - original.total) / original.total * 100 <= 5
    result = invoke(runner, ["rtd", out, "--original-total", original.total, "--out", \
        out / "rtd.csv"])
    for column in cli.RTD_COLUMNS:
        assert column in result.output
    summary = read_matrix_csv(out / "rtd.csv")
    assert summary.loc["RTD", "Max."] <= 5

def test_generate_needs_a_source(runner, tmp_path):
    result = runner.invoke(cli.main, ["generate", "--out", str(tmp_path / "x")])
    assert result.exit_code != 0

def test_generate_marginal_mismatch(runner, tmp_path):
    result = runner.invoke(cli.main, ["generate", "--row-marginal", "10,10", \
        "--column-marginal", "5,5", "--out", str(tmp_path / "x")])
    assert result.exit_code == 1
    assert "error: MarginalMismatch" in result.output

def test_optimal_coef(runner, statin_csv, tmp_path):
    out = tmp_path / "coef.csv"
    invoke(runner, ["optimal-coef", statin_csv, "--reps", 20, "--target-fdr", 1, \
        "--seed", 1, "--out", out])
    coefs = pd.read_csv(out)
    assert list(coefs.columns) == ["drug", "coef"]
    assert len(coefs) == 7
    assert (coefs["coef"] == 1.5).all()
    assert (tmp_path / "coef.manifest.yaml").exists()

def test_report_and_heatmap(runner, tmp_path):
    table = tmp_path / "table.csv"
    table.write_text(",DrugA,DrugB\nNausea,2,0\nHeadache,0,2\n")
    signal = tmp_path / "signal.csv"
    signal.write_text(",DrugA,DrugB\nNausea,1,0\nHeadache,0,NA\n")

    out = tmp_path / "report.csv"
    invoke(runner, ["report", table, "--signal", signal, "--out", out])
    lines = out.read_text().splitlines()
    assert lines[1] == "DrugA,Nausea,2,1.0000,2.0000"
    assert len(lines) == 2

    svg = tmp_path / "signal.svg"
    invoke(runner, ["heatmap", signal, "--out", svg, "--drop-column", "DrugB"])
    assert svg.read_text().count("<rect") == 2

def test_rtd_needs_one_original(runner, tmp_path):
    result = runner.invoke(cli.main, ["rtd", str(tmp_path)])
    assert result.exit_code != 0

def test_version(runner):
    result = runner.invoke(cli.main, ["--version"])
    assert result.exit_code == 0
