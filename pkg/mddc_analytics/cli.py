"""Command line interface of mddc analytics.
"""
# core python dependencies
import functools
import logging
from pathlib import Path
import sys

# external dependencies
import click
import pandas as pd

# mddc dependencies
from mddc_analytics import __version__
import mddc_analytics.constants as constants
import mddc_analytics.config as config
from mddc_analytics.advancedparams import AdvancedParameters as AP
from mddc_analytics.api.types import MddcOptions, Method, CorrOrientation, BhFamily, \
    ClusterSpec, GenerationRequest, RunManifest, RngStream
from mddc_analytics.api.errors import MddcError, DimensionMismatch
from mddc_analytics.api.mddc_engine import run_mddc, resolve_seed
from mddc_analytics.api.cutoff_engine import find_optimal_coef
from mddc_analytics.api.datagen import generate_tables, generate_tables_with_tol, \
    relative_total_deviation, summarize_rtd
from mddc_analytics.api.io_report import load_table, read_contin_csv, read_matrix_csv, \
    write_matrix_csv, write_contin_csv, write_report_csv, report_drug_ae_pairs, \
    emit_heatmap_svg, read_coef_csv, write_coef_csv, read_ae_idx_csv, \
    read_class_labels_csv, write_manifest

logger = logging.getLogger('mddc_analytics')

RTD_COLUMNS = ["Min.", "Median", "Mean", "Max.", "SD"]

def config_logger(log_level="debug"):
    """Configures the package logger

    Args:
        log_level (str): log level ('debug', 'info', ...)
    """
    level = {
        'info': logging.INFO,
        'warning': logging.WARNING,
        'error': logging.ERROR,
        'critical': logging.CRITICAL,
    }.get(str.lower(log_level), logging.DEBUG)
    logger.setLevel(level)
    if logger.handlers:
        for handler in logger.handlers:
            handler.setLevel(level)
        return

    handler = logging.StreamHandler()
    handler.setLevel(level)
    formatter = logging.Formatter(
        fmt='%(asctime)s - %(name)s - %(levelname)s'
            ' - %(filename)s:%(lineno)d - %(message)s')
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.debug("Configured logger")

def handle_errors(func):
    """Turn mddc errors into a one-line diagnostic and exit code 1"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (MddcError, ValueError) as err:
            click.echo(f"error: {type(err).__name__}: {err}", err=True)
            sys.exit(1)
    return wrapper

def _manifest(command, inputs, parameters, seed, outputs, path):
    write_manifest(RunManifest(command=command, tool_version=__version__, inputs=inputs, \
        parameters=parameters, seed=seed, outputs=[str(x) for x in outputs]), path)

def _manifest_path(path):
    path = Path(path)
    return path.with_name(f"{path.stem}.manifest.yaml")

def _out_dir(out):
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path

def _parse_coef(text, col_names):
    """Scalar, comma-separated list or @file"""
    if text.startswith("@"):
        return read_coef_csv(text[1:], col_names)
    try:
        values = [float(x) for x in text.split(",")]
    except ValueError as err:
        raise click.BadParameter(f"cannot parse coefficient {text!r}") from err
    return values[0] if len(values) == 1 else values

def _parse_ints(text, name):
    try:
        return [int(x) for x in text.split(",")]
    except ValueError as err:
        raise click.BadParameter(f"{name} must be comma-separated integers") from err

table_source = [
    click.argument("input_csv", required=False, \
        type=click.Path(exists=True, dir_okay=False)),
    click.option("--fixture", default=None, help="bundled synthetic table instead of a CSV"),
]

def with_table_source(func):
    """INPUT_CSV argument or --fixture"""
    for decorator in reversed(table_source):
        func = decorator(func)
    return func

@click.group()
@click.version_option(__version__)
@click.option("--log-level", default=None, \
    help=f"debug, info, warning, error; defaults to ${constants.MDDC_LOG_LEVEL_ENV}")
def main(log_level):
    """Modified detecting deviating cells for adverse event signal detection."""
    config_logger(log_level or config.env_config[constants.LOG_LEVEL])

@main.command()
@with_table_source
@click.option("--method", type=click.Choice([m.value for m in Method]), \
    default=Method.MONTE_CARLO.value, show_default=True)
@click.option("--reps", type=click.IntRange(min=1), default=AP.mc_reps, show_default=True)
@click.option("--quantile", type=click.FloatRange(0, 1, min_open=True), \
    default=AP.mc_quantile, show_default=True)
@click.option("--coef", default=str(AP.boxplot_coef), show_default=True, \
    help="boxplot coefficient: scalar, comma-separated list or @file (drug,coef CSV)")
@click.option("--corr-lim", type=click.FloatRange(0, 1), default=AP.corr_limit, \
    show_default=True)
@click.option("--col-specific/--no-col-specific", default=True, show_default=True)
@click.option("--separate/--no-separate", default=True, show_default=True)
@click.option("--col-corr", is_flag=True, help="correlate drug columns instead of AE rows")
@click.option("--exclude-same-class/--no-exclude-same-class", default=True, \
    show_default=True)
@click.option("--class-labels", type=click.Path(exists=True, dir_okay=False), \
    help="drug,class CSV")
@click.option("--alpha", type=click.FloatRange(0, 1, min_open=True, max_open=True), \
    default=AP.signal_alpha, show_default=True)
@click.option("--adjust-mc-pval", is_flag=True, help="threshold BH-adjusted MC p-values")
@click.option("--bh-per-column", is_flag=True, help="adjust step-5 p-values per column")
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--threads", type=click.IntRange(min=1), default=None)
@click.option("--out", type=click.Path(file_okay=False), default="mddc_out", \
    show_default=True)
@click.option("--heatmap", is_flag=True, help="also write SVG heatmaps of signal matrices")
@click.option("--lenient", is_flag=True, help="fix non-integral counts and duplicate labels")
@handle_errors
def analyze(input_csv, fixture, method, reps, quantile, coef, corr_lim, col_specific, \
    separate, col_corr, exclude_same_class, class_labels, alpha, adjust_mc_pval, \
    bh_per_column, seed, threads, out, heatmap, lenient):
    """Run MDDC on a contingency table and write signals and p-values."""
    t = load_table(input_csv, fixture, strict=not lenient)
    options = MddcOptions(method=method, coef=_parse_coef(coef, t.col_names), \
        col_specific=col_specific, separate=separate, c_corr=corr_lim, \
        orientation=CorrOrientation.COLUMN if col_corr else CorrOrientation.ROW, \
        reps=reps, quantile=quantile, exclude_same_class=exclude_same_class, \
        class_labels=read_class_labels_csv(class_labels, t.col_names) if class_labels \
        else None, alpha=alpha, adjust_mc_pval=adjust_mc_pval, \
        bh_family=BhFamily.COLUMN if bh_per_column else BhFamily.TABLE, seed=seed, \
        threads=threads)
    result = run_mddc(t, options=options)
    out = _out_dir(out)

    if result.method == Method.BOXPLOT:
        matrices = {"boxplot_signal": result.univariate_signal}
        signals = {"boxplot_signal": result.univariate_signal}
    else:
        matrices = {"pval": result.pval, "signal": result.univariate_signal, \
            "fisher_signal": result.fisher_signal}
        signals = {"signal": result.univariate_signal, \
            "fisher_signal": result.fisher_signal}
    matrices["corr_signal_pval"] = result.corr_signal_pval
    matrices["corr_signal_adj_pval"] = result.corr_signal_adj_pval
    signals["corr_signal"] = result.corr_signal(alpha)

    written = []
    for name, matrix in matrices.items():
        write_matrix_csv(matrix, out / f"{name}.csv")
        written.append(f"{name}.csv")
    for name, matrix in signals.items():
        write_report_csv(report_drug_ae_pairs(t, matrix), out / f"report_{name}.csv")
        written.append(f"report_{name}.csv")
        if heatmap:
            emit_heatmap_svg(matrix, out / f"heatmap_{name}.svg")
            written.append(f"heatmap_{name}.svg")

    parameters = options.model_dump(mode="json", exclude={"seed"})
    _manifest("analyze", {"table": input_csv, "fixture": fixture}, parameters, \
        result.seed, written, out / constants.MANIFEST_FILE)
    if result.message:
        logger.warning(result.message)
    click.echo(f"wrote {len(written)} files to {out}")

def _signal_matrix(path, row_names, col_names):
    frame = read_matrix_csv(path)
    if set(frame.index) == set(row_names) and set(frame.columns) == set(col_names):
        return frame.loc[row_names, col_names].to_numpy()
    if frame.shape == (len(row_names), len(col_names)):
        return frame.to_numpy()
    raise DimensionMismatch(f"{path}: signal matrix is {frame.shape}, expected " \
        f"{(len(row_names), len(col_names))}")

@main.command()
@click.option("--table", "table_csv", type=click.Path(exists=True, dir_okay=False), \
    help="reference table supplying marginals and labels")
@click.option("--fixture", default=None, help="bundled table supplying marginals and labels")
@click.option("--row-marginal", default=None, help="comma-separated AE totals")
@click.option("--column-marginal", default=None, help="comma-separated drug totals")
@click.option("--ae-idx", type=click.Path(exists=True, dir_okay=False), \
    help="idx,AE cluster assignment CSV")
@click.option("--signal-mat", type=click.Path(exists=True, dir_okay=False), \
    help="signal strength matrix CSV; all ones when omitted")
@click.option("--rho", type=click.FloatRange(0, 1), default=None, \
    help="within-cluster correlation")
@click.option("--n-rep", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--tol", type=click.FloatRange(0, min_open=True), default=None, \
    help="maximum relative total deviation in percent")
@click.option("--max-retries", type=click.IntRange(min=1), \
    default=AP.max_regeneration_attempts, show_default=True)
@click.option("--threads", type=click.IntRange(min=1), default=None)
@click.option("--out", type=click.Path(file_okay=False), default="mddc_tables", \
    show_default=True)
@handle_errors
def generate(table_csv, fixture, row_marginal, column_marginal, ae_idx, signal_mat, rho, \
    n_rep, seed, tol, max_retries, threads, out):
    """Generate contingency tables with clustered AEs."""
    reference = None
    if table_csv is not None or fixture is not None:
        reference = load_table(table_csv, fixture)
        rows, cols = reference.row_marginals.tolist(), reference.col_marginals.tolist()
        row_names, col_names = reference.row_names, reference.col_names
    elif row_marginal is not None and column_marginal is not None:
        rows = _parse_ints(row_marginal, "--row-marginal")
        cols = _parse_ints(column_marginal, "--column-marginal")
        row_names = [f"AE_{i}" for i in range(1, len(rows) + 1)]
        col_names = [f"drug_{j}" for j in range(1, len(cols) + 1)]
    else:
        raise click.UsageError("give --table, --fixture or both marginals")

    within = rho if rho is not None else AP.within_cluster_rho
    if ae_idx is not None:
        clusters = ClusterSpec.from_ae_idx(read_ae_idx_csv(ae_idx), row_names, within)
    elif rho is not None:
        clusters = ClusterSpec(assignment=["all"] * len(row_names), within_rho=rho)
    elif reference is not None:
        clusters = None
    else:
        clusters = ClusterSpec(within_rho=0.0)

    kwargs = {"signal": _signal_matrix(signal_mat, row_names, col_names) if signal_mat \
        else None, "n_rep": n_rep, "seed": seed, "tolerance": tol, \
        "max_attempts": max_retries, "threads": threads}
    if reference is not None:
        req = GenerationRequest.from_table(reference, clusters, **kwargs)
    else:
        req = GenerationRequest(row_marginal=rows, column_marginal=cols, clusters=clusters, \
            row_names=row_names, col_names=col_names, **kwargs)
    tables = generate_tables_with_tol(req) if tol is not None else generate_tables(req)

    out = _out_dir(out)
    written = []
    for k, table in enumerate(tables, start=1):
        write_contin_csv(table, out / f"table_{k:03d}.csv")
        written.append(f"table_{k:03d}.csv")
    parameters = {"n_rep": n_rep, "rho": rho, "tol": tol, "max_retries": max_retries, \
        "ae_idx": ae_idx, "signal_mat": signal_mat, "threads": threads}
    _manifest("generate", {"table": table_csv, "fixture": fixture, \
        "row_marginal": row_marginal, "column_marginal": column_marginal}, parameters, \
        seed, written, out / constants.MANIFEST_FILE)
    click.echo(f"wrote {len(written)} tables to {out}")

@main.command("optimal-coef")
@with_table_source
@click.option("--reps", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--target-fdr", type=click.FloatRange(0, 1, min_open=True), \
    default=AP.target_fdr, show_default=True)
@click.option("--step", type=click.FloatRange(0, min_open=True), default=AP.coef_step, \
    show_default=True)
@click.option("--whole-table", is_flag=True, help="one coefficient for the whole table")
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--threads", type=click.IntRange(min=1), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default="optimal_coef.csv", \
    show_default=True)
@handle_errors
def optimal_coef(input_csv, fixture, reps, target_fdr, step, whole_table, seed, threads, \
    out):
    """Search the smallest boxplot coefficients meeting a target FDR."""
    t = load_table(input_csv, fixture)
    seed = resolve_seed(seed)
    coefs = find_optimal_coef(t, reps=reps, target_fdr=target_fdr, step=step, \
        rng=RngStream(seed=seed), col_specific=not whole_table, threads=threads)
    write_coef_csv(t.col_names, coefs, out)
    _manifest("optimal-coef", {"table": input_csv, "fixture": fixture}, {"reps": reps, \
        "target_fdr": target_fdr, "step": step, "whole_table": whole_table, \
        "threads": threads}, seed, [Path(out).name], _manifest_path(out))
    click.echo(f"wrote {len(coefs)} coefficients to {out}")

@main.command()
@click.argument("matrix_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default="heatmap.svg", \
    show_default=True)
@click.option("--color-scheme", default="Blues", show_default=True, \
    help="matplotlib colormap name")
@click.option("--drop-column", "drop_columns", multiple=True, help="column to leave out")
@click.option("--max-rows", type=click.IntRange(min=1), default=None)
@handle_errors
def heatmap(matrix_csv, out, color_scheme, drop_columns, max_rows):
    """Write an SVG heatmap of a signal or p-value matrix."""
    emit_heatmap_svg(read_matrix_csv(matrix_csv), out, color_scheme, \
        drop_columns=drop_columns or None, max_rows=max_rows)
    _manifest("heatmap", {"matrix": matrix_csv}, {"color_scheme": color_scheme, \
        "drop_columns": list(drop_columns), "max_rows": max_rows}, None, \
        [Path(out).name], _manifest_path(out))
    click.echo(f"wrote {out}")

@main.command()
@with_table_source
@click.option("--signal", "signal_csv", type=click.Path(exists=True, dir_okay=False), \
    required=True, help="0/1 signal matrix CSV")
@click.option("--out", type=click.Path(dir_okay=False), default="report.csv", \
    show_default=True)
@handle_errors
def report(input_csv, fixture, signal_csv, out):
    """Tabulate flagged drug-AE pairs with observed and expected counts."""
    t = load_table(input_csv, fixture)
    rows = report_drug_ae_pairs(t, read_matrix_csv(signal_csv))
    write_report_csv(rows, out)
    _manifest("report", {"table": input_csv, "fixture": fixture, "signal": signal_csv}, \
        {}, None, [Path(out).name], _manifest_path(out))
    click.echo(f"wrote {len(rows)} pairs to {out}")

@main.command()
@click.argument("tables_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--original-total", type=click.IntRange(min=1), default=None)
@click.option("--original", "original_csv", type=click.Path(exists=True, dir_okay=False), \
    default=None, help="original table; its grand total is used")
@click.option("--out", type=click.Path(dir_okay=False), default=None, \
    help="also write the summary as CSV")
@handle_errors
def rtd(tables_dir, original_total, original_csv, out):
    """Summarize relative total deviations of generated tables."""
    if (original_total is None) == (original_csv is None):
        raise click.UsageError("give exactly one of --original-total and --original")
    if original_csv is not None:
        original_total = read_contin_csv(original_csv).total
    paths = sorted(Path(tables_dir).glob("*.csv"))
    if out is not None:
        paths = [p for p in paths if p.resolve() != Path(out).resolve()]
    values = [relative_total_deviation(original_total, read_contin_csv(p).total) \
        for p in paths]
    summary = summarize_rtd(values)
    frame = pd.DataFrame([[summary.min, summary.median, summary.mean, summary.max, \
        summary.sd]], columns=RTD_COLUMNS)
    click.echo(frame.to_string(index=False, float_format=lambda x: f"{x:.3f}"))
    if out is not None:
        write_matrix_csv(frame.set_index(pd.Index(["RTD"])), out)
        _manifest("rtd", {"tables": tables_dir, "original": original_csv}, \
            {"original_total": original_total, "tables": len(paths)}, None, \
            [Path(out).name], _manifest_path(out))

if __name__ == '__main__':
    main()
