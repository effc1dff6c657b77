"""
CSV input and output, drug-AE signal reports, SVG heatmaps, run manifests and the
bundled synthetic fixtures.
"""
# core python dependencies
import io
import logging
from pathlib import Path

# external dependencies
import numpy as np
import pandas as pd
import yaml
from cachetools import cached, LRUCache
from jinja2 import Environment
from matplotlib import colormaps
from matplotlib.colors import Normalize, to_hex

# mddc dependencies
from mddc_analytics.api.types import ContinTable, ReportRow, ClusterSpec, \
    GenerationRequest, RunManifest
from mddc_analytics.api.errors import MddcError, ParseError, IoError, DimensionMismatch, \
    InvalidSignalValue, UnknownFixture
from mddc_analytics.api.contin_table import validate_and_fix, expected_counts, \
    std_pearson_residuals
from mddc_analytics.api.datagen import generate_tables
from mddc_analytics.api.examples.examples_statin import statin49_recipe, statin101_recipe
from mddc_analytics.api.examples.examples_betablocker import betablocker500_recipe
from mddc_analytics.api.examples.examples_sedative import sedative1000_recipe
from mddc_analytics.advancedparams import AdvancedParameters as AP

logger = logging.getLogger('mddc_analytics')

REPORT_COLUMNS = ["Drug", "AE", "Observed Count", "Expected Count", "Std Pearson Resid"]

#### CSV

def _read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as err:
        raise IoError(f"cannot read {path}: {err}", path=str(path)) from err

def _read_frame(path, **kwargs):
    """Header row plus label column; ParseError on empty or ragged files.

    pandas renames repeated header cells (A, A.1), so the header cells as written are
    kept in frame.attrs["header"].
    """
    text = _read_text(path)
    if not text.strip():
        raise ParseError(f"{path}: empty file", line=1)
    try:
        header = pd.read_csv(io.StringIO(text), header=None, nrows=1, dtype=str, \
            keep_default_na=False).iloc[0].tolist()[1:]
        frame = pd.read_csv(io.StringIO(text), header=0, index_col=0, **kwargs)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as err:
        raise ParseError(f"{path}: {err}") from err
    first = frame.index.name
    if first is not None and str(first) not in ("", "AE"):
        raise ParseError(f"{path}: first header cell must be empty or 'AE', got {first!r}", \
            line=1, column=1)
    frame.index.name = None
    if len(header) != frame.shape[1]:
        raise ParseError(f"{path}: header has {len(header)} drug labels for " \
            f"{frame.shape[1]} columns", line=1)
    frame.attrs["header"] = header
    return frame

def read_contin_csv(path, strict=True):
    """Contingency table from a CSV with AE rows and drug columns.

    Raises:
        ParseError: empty or malformed file, or (strict) a cell that is not a count.
        DuplicateLabel: (strict) a drug or AE label that appears twice.
        IoError: the file cannot be read.
    """
    frame = _read_frame(path, dtype=str, keep_default_na=False)
    if frame.shape[1] == 0:
        raise ParseError(f"{path}: no drug columns", line=1)
    numeric = frame.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    bad = numeric.isna().to_numpy()
    if strict and bad.any():
        i, j = np.argwhere(bad)[0]
        raise ParseError(f"{path}: line {i + 2}, column {j + 2}: {frame.iat[i, j]!r} " \
            "is not a count", line=int(i + 2), column=int(j + 2))
    table = validate_and_fix(numeric, strict=strict, col_names=frame.attrs["header"])
    logger.debug("read %d x %d table from %s", *table.shape, path)
    return table

def read_matrix_csv(path, missing_token=AP.missing_token):
    """Real-valued labeled matrix; the missing token becomes NaN"""
    frame = _read_frame(path, na_values=[missing_token], keep_default_na=False)
    try:
        frame = frame.astype(np.float64)
    except ValueError as err:
        raise ParseError(f"{path}: {err}") from err
    frame.index = pd.Index([str(x) for x in frame.index], dtype=object)
    frame.columns = pd.Index([str(x) for x in frame.columns], dtype=object)
    return frame

def _to_text(m, missing_token):
    frame = m.counts if isinstance(m, ContinTable) else pd.DataFrame(m)
    values = frame.to_numpy(dtype=np.float64)
    present = values[~np.isnan(values)]
    if np.isfinite(present).all() and (present == np.rint(present)).all():
        frame = frame.astype("Int64")
    return frame.to_csv(index_label="", na_rep=missing_token, lineterminator="\n")

def _write_text(text, path):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as err:
        raise IoError(f"cannot write {path}: {err}", path=str(path)) from err

def write_matrix_csv(m, path, missing_token=AP.missing_token):
    """Write a labeled matrix; integral matrices without fractions are written as
    integers, other reals in shortest round-trip form."""
    _write_text(_to_text(m, missing_token), path)
    logger.debug("wrote %s", path)

def write_contin_csv(t: ContinTable, path):
    """Write a contingency table in the layout read_contin_csv reads"""
    write_matrix_csv(t, path)

def read_coef_csv(path, col_names=None):
    """Boxplot coefficients from a drug,coef CSV, ordered like col_names when given"""
    text = _read_text(path)
    try:
        frame = pd.read_csv(io.StringIO(text))
        coefs = pd.Series(frame["coef"].astype(np.float64).to_numpy(), \
            index=frame["drug"].astype(str))
    except (KeyError, ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise ParseError(f"{path}: expected columns drug,coef ({err})") from err
    if col_names is None:
        return coefs.tolist()
    missing = [c for c in col_names if c not in coefs.index]
    if missing:
        raise DimensionMismatch(f"{path}: no coefficient for {', '.join(missing)}", \
            columns=missing)
    return coefs.loc[list(col_names)].tolist()

def write_coef_csv(col_names, coefs, path):
    """One drug,coef line per column"""
    frame = pd.DataFrame({"drug": list(col_names), "coef": list(coefs)})
    _write_text(frame.to_csv(index=False, lineterminator="\n"), path)

def read_ae_idx_csv(path):
    """idx/AE cluster index"""
    text = _read_text(path)
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise ParseError(f"{path}: {err}") from err
    if not {"idx", "AE"} <= set(frame.columns):
        raise ParseError(f"{path}: expected columns idx,AE", line=1)
    return frame[["idx", "AE"]]

def read_class_labels_csv(path, col_names):
    """Drug class per column from a drug,class CSV"""
    text = _read_text(path)
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
        classes = dict(zip(frame["drug"], frame["class"]))
    except (KeyError, pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise ParseError(f"{path}: expected columns drug,class ({err})") from err
    missing = [c for c in col_names if c not in classes]
    if missing:
        raise DimensionMismatch(f"{path}: no class for {', '.join(missing)}", \
            columns=missing)
    return [classes[c] for c in col_names]

def write_manifest(manifest: RunManifest, path):
    """YAML provenance of a run"""
    text = yaml.safe_dump(manifest.model_dump(mode="json"), sort_keys=False)
    _write_text(text, path)

#### Reports

def _signal_values(t: ContinTable, signal):
    if isinstance(signal, pd.DataFrame):
        if signal.shape != t.shape or list(signal.index) != t.row_names or \
            list(signal.columns) != t.col_names:
            raise DimensionMismatch("signal matrix labels do not match the table")
        values = signal.to_numpy(dtype=np.float64)
    else:
        values = np.asarray(signal, dtype=np.float64)
        if values.shape != t.shape:
            raise DimensionMismatch(f"signal matrix is {values.shape}, table is {t.shape}")
    values = np.where(np.isnan(values), 0.0, values)
    if not np.isin(values, (0.0, 1.0)).all():
        raise InvalidSignalValue("signal entries must be 0, 1 or missing")
    return values

def report_drug_ae_pairs(t: ContinTable, signal):
    """One ReportRow per flagged cell, by drug and then by descending expected count.

    Args:
        t (ContinTable): source table; expected counts and residuals are recomputed.
        signal (DataFrame or array-like): 0/1 matrix; MISSING counts as 0 and booleans
            are accepted.
    """
    flags = _signal_values(t, signal)
    expected = expected_counts(t).to_numpy()
    res = std_pearson_residuals(t).to_numpy()
    observed = t.values
    rows = []
    for j, drug in enumerate(t.col_names):
        hits = np.flatnonzero(flags[:, j] == 1)
        for i in hits[np.argsort(-expected[hits, j], kind="stable")]:
            rows.append(ReportRow(drug=str(drug), ae=str(t.row_names[i]), \
                observed=int(observed[i, j]), expected=float(expected[i, j]), \
                std_pearson_res=None if np.isnan(res[i, j]) else float(res[i, j])))
    return rows

def report_frame(rows):
    """Report rows as a DataFrame with the printed column names"""
    return pd.DataFrame([[r.drug, r.ae, r.observed, r.expected, r.std_pearson_res] \
        for r in rows], columns=REPORT_COLUMNS)

def write_report_csv(rows, path, decimals=AP.report_decimals):
    """Report CSV with reals fixed at decimals places"""
    text = report_frame(rows).to_csv(index=False, float_format=f"%.{decimals}f", \
        na_rep=AP.missing_token, lineterminator="\n")
    _write_text(text, path)

#### Heatmap

CELL = 18
MISSING_FILL = "#d9d9d9"

SVG_TEMPLATE = """<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{{ width }}" height="{{ height }}" font-family="sans-serif" font-size="11">
{%- for label in row_labels %}
<text x="{{ label.x }}" y="{{ label.y }}" text-anchor="end" dominant-baseline="middle">{{ label.text }}</text>
{%- endfor %}
{%- for cell in cells %}
<rect x="{{ cell.x }}" y="{{ cell.y }}" width="{{ size }}" height="{{ size }}" fill="{{ cell.fill }}" stroke="#ffffff"><title>{{ cell.title }}</title></rect>
{%- endfor %}
{%- for label in col_labels %}
<text x="{{ label.x }}" y="{{ label.y }}" text-anchor="start" transform="rotate(45 {{ label.x }} {{ label.y }})">{{ label.text }}</text>
{%- endfor %}
</svg>
"""

svg_env = Environment(autoescape=True, keep_trailing_newline=True)

def _subset(frame, rows=None, drop_columns=None, max_rows=None):
    if drop_columns:
        frame = frame.drop(columns=list(drop_columns))
    if rows is not None:
        frame = frame.loc[list(rows)]
    if max_rows is not None:
        frame = frame.iloc[:max_rows]
    return frame

def _fills(values, color_scheme):
    try:
        cmap = colormaps[color_scheme]
    except KeyError as err:
        raise ValueError(f"unknown color scheme {color_scheme!r}") from err
    present = ~np.isnan(values)
    fills = np.full(values.shape, MISSING_FILL, dtype=object)
    if not present.any():
        return fills
    if np.isin(values[present], (0.0, 1.0)).all():
        low, high = to_hex(cmap(0.0)), to_hex(cmap(1.0))
        fills[present] = np.where(values[present] == 1.0, high, low)
        return fills
    norm = Normalize(vmin=float(values[present].min()), vmax=float(values[present].max()))
    fills[present] = [to_hex(c) for c in cmap(norm(values[present]))]
    return fills

def emit_heatmap_svg(m, path=None, color_scheme="Blues", rows=None, drop_columns=None, \
    max_rows=None):
    """Standalone SVG heatmap of a labeled matrix.

    Binary matrices get the two ends of the colormap, other matrices a sequential ramp
    between their minimum and maximum; MISSING cells are grey.

    Returns:
        str: the SVG document (also written to path when given)
    """
    frame = _subset(pd.DataFrame(m), rows, drop_columns, max_rows)
    values = frame.to_numpy(dtype=np.float64)
    fills = _fills(values, color_scheme)
    row_names = [str(x) for x in frame.index]
    col_names = [str(x) for x in frame.columns]
    left = 8 + 7 * max([len(x) for x in row_names] + [1])
    bottom = 8 + 5 * max([len(x) for x in col_names] + [1])

    cells = []
    for i, ae in enumerate(row_names):
        for j, drug in enumerate(col_names):
            value = "NA" if np.isnan(values[i, j]) else f"{values[i, j]:.6g}"
            cells.append({"x": left + j * CELL, "y": 4 + i * CELL, "fill": fills[i, j], \
                "title": f"{ae} / {drug}: {value}"})
    row_labels = [{"x": left - 4, "y": 4 + i * CELL + CELL // 2, "text": name} \
        for i, name in enumerate(row_names)]
    top = 4 + len(row_names) * CELL
    col_labels = [{"x": left + j * CELL + CELL // 2, "y": top + 6, "text": name} \
        for j, name in enumerate(col_names)]
    svg = svg_env.from_string(SVG_TEMPLATE).render(width=left + len(col_names) * CELL + \
        bottom, height=top + bottom, size=CELL, cells=cells, row_labels=row_labels, \
        col_labels=col_labels)
    if path is not None:
        _write_text(svg, path)
    return svg

#### Fixtures

fixture_recipes = {recipe["name"]: recipe for recipe in \
    (statin49_recipe, statin101_recipe, betablocker500_recipe, sedative1000_recipe)}

def fixture_names():
    """Names accepted by load_fixture"""
    return sorted(fixture_recipes)

def split_total(weights, total):
    """Integers proportional to weights summing exactly to total (largest remainder)"""
    share = np.asarray(weights, dtype=np.float64)
    share = share / share.sum() * total
    counts = np.floor(share).astype(np.int64)
    short = int(total - counts.sum())
    counts[np.argsort(-(share - counts), kind="stable")[:short]] += 1
    return counts

def _recipe(name):
    try:
        return fixture_recipes[name]
    except KeyError:
        raise UnknownFixture(f"no fixture named {name!r}; known: " \
            f"{', '.join(fixture_names())}", name=name) from None

def fixture_request(name):
    """GenerationRequest reproducing a fixture"""
    recipe = _recipe(name)
    rows, cols = recipe["row_names"], recipe["col_names"]
    signal = np.ones((len(rows), len(cols)))
    for (ae, drug), strength in recipe["signals"].items():
        signal[rows.index(ae), cols.index(drug)] = strength
    if recipe["ae_clusters"]:
        clusters = ClusterSpec.from_ae_idx(load_fixture_ae_idx(name), rows, recipe["rho"])
    else:
        clusters = ClusterSpec(within_rho=recipe["rho"])
    return GenerationRequest(row_marginal=split_total(recipe["row_weights"], \
        recipe["total"]).tolist(), column_marginal=split_total(recipe["col_weights"], \
        recipe["total"]).tolist(), signal=signal, clusters=clusters, n_rep=1, \
        seed=recipe["seed"], row_names=rows, col_names=cols, threads=1)

@cached(cache=LRUCache(maxsize=8))
def _build_fixture(name):
    logger.info("building fixture %s", name)
    table = generate_tables(fixture_request(name))[0]
    return validate_and_fix(table.counts, strict=True)

def load_fixture(name):
    """Bundled synthetic table; built once per process, a fresh copy per call.

    Raises:
        UnknownFixture
    """
    _recipe(name)
    return _build_fixture(name).copy()

def load_fixture_ae_idx(name):
    """idx/AE cluster index of a clustered fixture"""
    clusters = _recipe(name)["ae_clusters"]
    if not clusters:
        raise UnknownFixture(f"fixture {name!r} has no AE clusters", name=name)
    return pd.DataFrame([(idx, ae) for idx, aes in clusters.items() for ae in aes], \
        columns=["idx", "AE"])

def load_table(path=None, fixture=None, strict=True):
    """Table from a CSV path or a fixture name (exactly one of them)"""
    if (path is None) == (fixture is None):
        raise MddcError("give either an input path or a fixture name")
    return load_fixture(fixture) if fixture is not None else read_contin_csv(path, strict)
