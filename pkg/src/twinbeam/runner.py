"""Scenario configs, sweep tables and deterministic file emission.

A scenario is described by a TOML file with sections mirroring
ScenarioConfig: [source], [filters.signal], [filters.idler], [gain],
[k_table] and [run].  Every key is optional; defaults come from the
bundled calibrated source profile.  Unknown keys are hard errors so a
typo cannot silently fall back to a default.

Tables carry their resolved config in the metadata together with the
engine version and a grid-convergence indicator, and serialize to CSV
or JSON byte-deterministically (no timestamps, fixed key order,
shortest round-trip floats).
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from . import correlators as _co
from . import schmidt as _sch
from .errors import ConfigError, UndefinedMomentError
from .spectral import (
    C_NM_PER_PS,
    PhaseMatching,
    PumpEnvelope,
    bandwidth_to_detuning_fwhm,
    build_grid,
    build_jsa,
    make_filter,
    wavelength_to_detuning,
)

__all__ = [
    "SourceSpec",
    "FilterSpec",
    "ScenarioConfig",
    "ResultTable",
    "OUTPUT_NAMES",
    "load_config",
    "config_from_dict",
    "bundled_config",
    "run_k_table",
    "run_g_sweep",
    "run_scenario",
    "emit",
]

OUTPUT_NAMES = ("K_table", "g2_vs_B", "g12_vs_g11", "g2click_vs_g11", "nrf")

_FILTER_KINDS = ("none", "gaussian", "rectangular")
_KTABLE_KINDS = ("gaussian", "rectangular")
_DEFAULT_GAINS = (0.005, 0.3, 10)  # log-spaced start, stop, points
_DEFAULT_KTABLE_FWHMS = (1.0, 2.5, 10.0, math.inf)

# columns of the full sweep table each named output file selects
_OUTPUT_COLUMNS = {
    "g2_vs_B": ("B", "mean_ns", "mean_ni", "g20", "g02"),
    "g12_vs_g11": ("B", "g11", "g12"),
    "g2click_vs_g11": ("B", "g11", "g2_click"),
    "nrf": ("B", "mean_ns", "mean_ni", "nrf"),
}


@dataclass(frozen=True)
class SourceSpec:
    """Type-II source parameters; units rad/ps, mm, ps/mm and nm."""

    pump_sigma: float
    length_mm: float
    kappa_s: float
    kappa_i: float
    grid_points: int
    span: float
    center_wavelength_nm: float


@dataclass(frozen=True)
class FilterSpec:
    kind: str = "none"
    center_nm: float | None = None  # None: centered on the carrier
    fwhm_nm: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    source: SourceSpec
    filter_s: FilterSpec
    filter_i: FilterSpec
    gains: tuple
    trigger_beam: str
    outputs: tuple
    seed: int
    k_table_fwhms_nm: tuple
    k_table_kind: str


@dataclass(frozen=True)
class ResultTable:
    """Named columns of equal length plus run metadata.

    Cells are floats or None (undefined quantity, e.g. any g at B = 0).
    """

    name: str
    columns: dict
    metadata: dict

    def __post_init__(self):
        cols = {str(k): tuple(v) for k, v in self.columns.items()}
        lengths = {len(v) for v in cols.values()}
        if len(lengths) > 1:
            raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
        object.__setattr__(self, "columns", cols)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def select(self, name: str, column_names) -> "ResultTable":
        """Sub-table with a subset of columns and the same metadata."""
        return ResultTable(
            name=name,
            columns={k: self.columns[k] for k in column_names},
            metadata=self.metadata,
        )


# --------------------------------------------------------------- config


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _number(table: dict, key: str, path: str, default):
    v = table.get(key, default)
    if not _is_number(v):
        raise ConfigError(f"{path}.{key} must be a number")
    return float(v)


def _positive(table: dict, key: str, path: str, default):
    v = _number(table, key, path, default)
    if not v > 0:
        raise ConfigError(f"{path}.{key} must be positive")
    return v


def _check_keys(table: dict, allowed, path: str):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key '{path}.{key}'" if path else f"unknown key '{key}'")


@lru_cache(maxsize=1)
def _calibrated_source_dict() -> dict:
    text = resources.files("twinbeam.data").joinpath("calibrated_source.toml").read_text()
    return tomllib.loads(text)["source"]


def _parse_source(table: dict) -> SourceSpec:
    base = _calibrated_source_dict()
    _check_keys(table, set(base), "source")
    merged = {**base, **table}
    points = merged.get("grid_points")
    if not isinstance(points, int) or isinstance(points, bool) or points < 2:
        raise ConfigError("source.grid_points must be an integer >= 2")
    return SourceSpec(
        pump_sigma=_positive(merged, "pump_sigma", "source", None),
        length_mm=_positive(merged, "length_mm", "source", None),
        kappa_s=_number(merged, "kappa_s", "source", None),
        kappa_i=_number(merged, "kappa_i", "source", None),
        grid_points=points,
        span=_positive(merged, "span", "source", None),
        center_wavelength_nm=_positive(merged, "center_wavelength_nm", "source", None),
    )


def _parse_filter(table: dict, path: str, center_default: float) -> FilterSpec:
    _check_keys(table, {"kind", "center_nm", "fwhm_nm"}, path)
    kind = table.get("kind", "none")
    if kind not in _FILTER_KINDS:
        raise ConfigError(f"{path}.kind must be one of {_FILTER_KINDS}")
    if kind == "none":
        if "fwhm_nm" in table or "center_nm" in table:
            raise ConfigError(f"{path}: center_nm/fwhm_nm make no sense with kind 'none'")
        return FilterSpec()
    center = _positive(table, "center_nm", path, center_default)
    if "fwhm_nm" not in table:
        raise ConfigError(f"{path}.fwhm_nm is required when kind is not 'none'")
    fwhm = _positive(table, "fwhm_nm", path, None)
    return FilterSpec(kind=kind, center_nm=center, fwhm_nm=fwhm)


def _parse_gains(table: dict) -> tuple:
    _check_keys(table, {"values", "start", "stop", "points", "spacing"}, "gain")
    has_values = "values" in table
    has_range = any(k in table for k in ("start", "stop", "points", "spacing"))
    if has_values and has_range:
        raise ConfigError("gain: give either values or a start/stop range, not both")
    if has_values:
        vals = table["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError("gain.values must be a non-empty list")
        out = []
        for k, v in enumerate(vals):
            if not _is_number(v) or v < 0:
                raise ConfigError(f"gain.values[{k}] must be a number >= 0")
            out.append(float(v))
        return tuple(out)
    if not has_range:
        start, stop, points = _DEFAULT_GAINS
        return tuple(float(x) for x in np.geomspace(start, stop, points))
    start = _number(table, "start", "gain", None)
    stop = _number(table, "stop", "gain", None)
    points = table.get("points")
    if not isinstance(points, int) or isinstance(points, bool) or points < 2:
        raise ConfigError("gain.points must be an integer >= 2")
    spacing = table.get("spacing", "log")
    if spacing not in ("log", "linear"):
        raise ConfigError("gain.spacing must be 'log' or 'linear'")
    if start < 0 or stop <= start:
        raise ConfigError("gain range needs 0 <= start < stop")
    if spacing == "log":
        if start == 0:
            raise ConfigError("gain.start must be positive for log spacing")
        return tuple(float(x) for x in np.geomspace(start, stop, points))
    return tuple(float(x) for x in np.linspace(start, stop, points))


def _parse_k_table(table: dict) -> tuple:
    _check_keys(table, {"fwhms_nm", "kind"}, "k_table")
    fwhms = table.get("fwhms_nm", list(_DEFAULT_KTABLE_FWHMS))
    if not isinstance(fwhms, list) or not fwhms:
        raise ConfigError("k_table.fwhms_nm must be a non-empty list")
    out = []
    for k, v in enumerate(fwhms):
        if not _is_number(v) or not v > 0:
            raise ConfigError(f"k_table.fwhms_nm[{k}] must be positive (inf = unfiltered)")
        out.append(float(v))
    kind = table.get("kind", "gaussian")
    if kind not in _KTABLE_KINDS:
        raise ConfigError(f"k_table.kind must be one of {_KTABLE_KINDS}")
    return tuple(out), kind


def _parse_run(table: dict) -> tuple:
    _check_keys(table, {"trigger_beam", "outputs", "seed"}, "run")
    trigger = table.get("trigger_beam", "signal")
    if trigger not in ("signal", "idler"):
        raise ConfigError("run.trigger_beam must be 'signal' or 'idler'")
    outputs = table.get("outputs", list(OUTPUT_NAMES))
    if not isinstance(outputs, list) or not outputs:
        raise ConfigError("run.outputs must be a non-empty list")
    seen = []
    for name in outputs:
        if name not in OUTPUT_NAMES:
            raise ConfigError(f"run.outputs: unknown quantity {name!r}; choose from {OUTPUT_NAMES}")
        if name not in seen:
            seen.append(name)
    seed = table.get("seed", 1234)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("run.seed must be an integer")
    return trigger, tuple(seen), seed


def config_from_dict(data: dict) -> ScenarioConfig:
    """Validated config from a parsed TOML document (empty = all defaults)."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    _check_keys(data, {"source", "filters", "gain", "k_table", "run"}, "")
    for key in data:
        if not isinstance(data[key], dict):
            raise ConfigError(f"'{key}' must be a section, not a value")
    source = _parse_source(data.get("source", {}))
    filters = data.get("filters", {})
    _check_keys(filters, {"signal", "idler"}, "filters")
    for key in filters:
        if not isinstance(filters[key], dict):
            raise ConfigError(f"'filters.{key}' must be a section, not a value")
    center = source.center_wavelength_nm
    filter_s = _parse_filter(filters.get("signal", {}), "filters.signal", center)
    filter_i = _parse_filter(filters.get("idler", {}), "filters.idler", center)
    gains = _parse_gains(data.get("gain", {}))
    k_fwhms, k_kind = _parse_k_table(data.get("k_table", {}))
    trigger, outputs, seed = _parse_run(data.get("run", {}))
    return ScenarioConfig(
        source=source,
        filter_s=filter_s,
        filter_i=filter_i,
        gains=gains,
        trigger_beam=trigger,
        outputs=outputs,
        seed=seed,
        k_table_fwhms_nm=k_fwhms,
        k_table_kind=k_kind,
    )


def load_config(path) -> ScenarioConfig:
    """Read and fully validate a scenario file; errors name the field."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def bundled_config(name: str) -> ScenarioConfig:
    """One of the packaged scenarios ('table1' or 'fig2')."""
    if name not in ("table1", "fig2"):
        raise ConfigError(f"no bundled scenario named {name!r}")
    text = resources.files("twinbeam.data").joinpath(f"{name}.toml").read_text()
    return config_from_dict(tomllib.loads(text))


def _config_echo(config: ScenarioConfig) -> dict:
    s = config.source
    def filt(f):
        if f.kind == "none":
            return {"kind": "none"}
        return {"kind": f.kind, "center_nm": f.center_nm, "fwhm_nm": f.fwhm_nm}
    return {
        "source": {
            "pump_sigma": s.pump_sigma,
            "length_mm": s.length_mm,
            "kappa_s": s.kappa_s,
            "kappa_i": s.kappa_i,
            "grid_points": s.grid_points,
            "span": s.span,
            "center_wavelength_nm": s.center_wavelength_nm,
        },
        "filters": {"signal": filt(config.filter_s), "idler": filt(config.filter_i)},
        "gain": {"values": list(config.gains)},
        "k_table": {"fwhms_nm": list(config.k_table_fwhms_nm), "kind": config.k_table_kind},
        "run": {
            "trigger_beam": config.trigger_beam,
            "outputs": list(config.outputs),
            "seed": config.seed,
        },
    }


# -------------------------------------------------------------- physics


def _build_jsa(source: SourceSpec, grid_points: int):
    carrier = 2.0 * math.pi * C_NM_PER_PS / source.center_wavelength_nm
    grid = build_grid(carrier, carrier, source.span, grid_points)
    jsa = build_jsa(
        grid,
        PumpEnvelope(sigma=source.pump_sigma),
        PhaseMatching(
            length_mm=source.length_mm,
            kappa_s=source.kappa_s,
            kappa_i=source.kappa_i,
        ),
    )
    return grid, jsa


def _spectral_filter(spec: FilterSpec, source: SourceSpec, grid):
    if spec.kind == "none":
        return None
    center_nm = spec.center_nm if spec.center_nm is not None else source.center_wavelength_nm
    center = wavelength_to_detuning(center_nm, source.center_wavelength_nm)
    fwhm = bandwidth_to_detuning_fwhm(spec.fwhm_nm, center_nm)
    return make_filter(spec.kind, center, fwhm, grid)


def _k_rows(source: SourceSpec, fwhms, kind: str, grid_points: int):
    """(K_s, K_i) per filter bandwidth; equal filters on both beams."""
    grid, jsa = _build_jsa(source, grid_points)
    ker_s = _sch.marginal_kernel(jsa, "signal")
    ker_i = _sch.marginal_kernel(jsa, "idler")
    rows = []
    for fwhm_nm in fwhms:
        if math.isinf(fwhm_nm):
            rows.append((_sch.effective_k(ker_s), _sch.effective_k(ker_i)))
            continue
        spec = FilterSpec(kind=kind, center_nm=source.center_wavelength_nm, fwhm_nm=fwhm_nm)
        filt = _spectral_filter(spec, source, grid)
        rows.append(
            (
                _sch.effective_k(_sch.filtered_kernel(ker_s, filt)),
                _sch.effective_k(_sch.filtered_kernel(ker_i, filt)),
            )
        )
    return rows


def _convergence_flag(config: ScenarioConfig, grid_points: int) -> tuple:
    """K table at G and 2G; > 0.5% movement in any entry = unconverged."""
    rows = _k_rows(config.source, config.k_table_fwhms_nm, config.k_table_kind, grid_points)
    rows2 = _k_rows(config.source, config.k_table_fwhms_nm, config.k_table_kind, 2 * grid_points)
    worst = 0.0
    for (ks, ki), (ks2, ki2) in zip(rows, rows2):
        worst = max(worst, abs(ks - ks2) / ks2, abs(ki - ki2) / ki2)
    flag = "converged" if worst <= 5e-3 else "unconverged"
    return flag, rows


def _metadata(config: ScenarioConfig, grid_points: int, flag: str) -> dict:
    return {
        "engine_version": __version__,
        "grid_points": grid_points,
        "grid_convergence": flag,
        "config": _config_echo(config),
    }


def run_k_table(config: ScenarioConfig, grid_points: int | None = None, _flag=None) -> ResultTable:
    """Effective mode numbers behind equal filters, one row per bandwidth."""
    g = grid_points or config.source.grid_points
    if _flag is None:
        flag, rows = _convergence_flag(config, g)
    else:
        flag = _flag
        rows = _k_rows(config.source, config.k_table_fwhms_nm, config.k_table_kind, g)
    return ResultTable(
        name="K_table",
        columns={
            "filter_fwhm_nm": config.k_table_fwhms_nm,
            "K_s": tuple(r[0] for r in rows),
            "K_i": tuple(r[1] for r in rows),
        },
        metadata=_metadata(config, g, flag),
    )


def _sweep_row(dec, filter_s, filter_i, trigger: str, b: float) -> dict:
    corr = _co.apply_filters(_co.build_correlators(dec, b), filter_s, filter_i)
    row = {"B": b, "mean_ns": corr.mean_signal, "mean_ni": corr.mean_idler}
    try:
        g11 = _co.g(corr, 1, 1)
        row["g20"] = _co.g(corr, 2, 0)
        row["g02"] = _co.g(corr, 0, 2)
        row["g11"] = g11
        row["g12"] = _co.g(corr, 1, 2)
        numerator = row["g12"] if trigger == "signal" else _co.g(corr, 2, 1)
        row["g2_click"] = numerator / g11**2
        row["nrf"] = _co.noise_reduction_factor(corr)
    except UndefinedMomentError:
        for key in ("g20", "g02", "g11", "g12", "g2_click", "nrf"):
            row[key] = None
    return row


def run_g_sweep(config: ScenarioConfig, grid_points: int | None = None, _flag=None) -> ResultTable:
    """Means, g^(n,m), click-conditioned g2 and NRF per gain value.

    The g12-vs-g11 linear fit (unweighted least squares over the rows
    where both are defined) lands in the metadata as fit_slope and
    fit_intercept; rows at B = 0 hold None for every normalized column.
    """
    g = grid_points or config.source.grid_points
    if _flag is None:
        flag, _ = _convergence_flag(config, g)
    else:
        flag = _flag
    grid, jsa = _build_jsa(config.source, g)
    dec = _sch.schmidt_decompose(jsa)
    filter_s = _spectral_filter(config.filter_s, config.source, grid)
    filter_i = _spectral_filter(config.filter_i, config.source, grid)

    workers = max(1, int(os.environ.get("TWINBEAM_THREADS", "1")))
    def one(b):
        return _sweep_row(dec, filter_s, filter_i, config.trigger_beam, b)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, config.gains))
    else:
        rows = [one(b) for b in config.gains]

    names = ("B", "mean_ns", "mean_ni", "g20", "g02", "g11", "g12", "g2_click", "nrf")
    columns = {k: tuple(r[k] for r in rows) for k in names}

    pairs = [
        (r["g11"], r["g12"]) for r in rows if r["g11"] is not None and r["g12"] is not None
    ]
    metadata = _metadata(config, g, flag)
    if len(pairs) >= 2:
        x = np.array([p[0] for p in pairs])
        y = np.array([p[1] for p in pairs])
        slope, intercept = np.polyfit(x, y, 1)
        metadata["fit_slope"] = float(slope)
        metadata["fit_intercept"] = float(intercept)
    else:
        metadata["fit_slope"] = None
        metadata["fit_intercept"] = None
    return ResultTable(name="g_sweep", columns=columns, metadata=metadata)


def run_scenario(config: ScenarioConfig, out_dir, fmt: str = "csv", grid_points: int | None = None):
    """Compute every requested output and write one file per quantity."""
    g = grid_points or config.source.grid_points
    flag, _ = _convergence_flag(config, g)
    tables = []
    if "K_table" in config.outputs:
        tables.append(run_k_table(config, g, _flag=flag))
    sweep_names = [n for n in config.outputs if n != "K_table"]
    if sweep_names:
        sweep = run_g_sweep(config, g, _flag=flag)
        for name in sweep_names:
            tables.append(sweep.select(name, _OUTPUT_COLUMNS[name]))
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for table in tables:
        path = os.path.join(out_dir, f"{table.name}.{fmt}")
        emit(table, fmt, path)
        paths.append(path)
    return paths


# ------------------------------------------------------------- emission


def _cell(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def emit(table: ResultTable, fmt: str, path) -> None:
    """Write a table as CSV (RFC 4180) or JSON ({metadata, columns}).

    Identical tables serialize to identical bytes: no timestamps, dict
    order fixed by construction, floats as their shortest round-trip
    repr, empty CSV cell / JSON null for undefined values.
    """
    if fmt == "csv":
        names = list(table.columns)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(names)
            for k in range(table.n_rows):
                writer.writerow([_cell(table.columns[n][k]) for n in names])
    elif fmt == "json":
        doc = {"metadata": table.metadata, "columns": table.columns}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json'")
