"""Experiment orchestration: config parsing, mode dispatch, report emission.

Configs are flat JSON documents with nested PSD blocks; a single master seed
drives every Monte Carlo stage through labeled substreams, so one (config,
seed) pair reproduces an entire run byte-for-byte (wall time aside).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .detection import (
    DEFAULT_TILT_GRID,
    MixtureWeights,
    derive_seed,
    empirical_exponent,
)
from .dominance import find_dominated
from .errors import ConfigError, RobustSpecError
from .exponent import error_exponent, genie_bound
from .gaussian_model import build_model, sample_gaussian, white_model
from .minimax import kkt_certificate, minimize_mixture_weights
from .spectral import DEFAULT_GRID_SIZE, PsdGrid, UncertaintySet, make_psd

MODES = ("exponent", "dominance", "simulate", "minimax", "full")

#: Frozen CSV column order; downstream plotting depends on this.
CSV_COLUMNS = (
    "mode",
    "label",
    "n",
    "value",
    "fa_hat",
    "miss_hat",
    "miss_count",
    "miss_log",
    "censored",
)

_TOP_LEVEL_KEYS = {
    "mode",
    "grid_size",
    "sigma2",
    "alpha",
    "seed",
    "trials",
    "n_values",
    "candidate_label",
    "psds",
    "output_path",
    "tilt_grid",
}

_PSD_BLOCK_KEYS = {"label", "family", "params"}


@dataclass
class ExperimentConfig:
    mode: str
    grid_size: int
    sigma2: float
    alpha: float
    seed: int
    trials: int
    n_values: List[int]
    psd_specs: List[dict]
    candidate_label: Optional[str]
    output_path: Optional[str]
    tilt_grid: List[float]

    def echo(self) -> dict:
        """Config with all resolved defaults, as recorded in reports."""
        return {
            "mode": self.mode,
            "grid_size": self.grid_size,
            "sigma2": self.sigma2,
            "alpha": self.alpha,
            "seed": self.seed,
            "trials": self.trials,
            "n_values": list(self.n_values),
            "candidate_label": self.candidate_label,
            "psds": self.psd_specs,
            "output_path": self.output_path,
            "tilt_grid": list(self.tilt_grid),
        }

    def build_psds(self) -> UncertaintySet:
        members = []
        for block in self.psd_specs:
            params = dict(block.get("params", {}))
            members.append(
                make_psd(
                    block["family"],
                    grid_size=self.grid_size,
                    label=block["label"],
                    **params,
                )
            )
        candidate_index = None
        if self.candidate_label is not None:
            labels = [p.label for p in members]
            candidate_index = labels.index(self.candidate_label)
        return UncertaintySet(members=tuple(members), candidate_index=candidate_index)


@dataclass
class ReportRecord:
    mode: str
    config: dict
    payload: dict
    seed: int
    wall_time_ms: float
    toolkit_version: str = __version__

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "config": self.config,
            "payload": self.payload,
            "seed": self.seed,
            "wall_time_ms": self.wall_time_ms,
            "toolkit_version": self.toolkit_version,
        }

    @staticmethod
    def from_json(doc: dict) -> "ReportRecord":
        return ReportRecord(
            mode=doc["mode"],
            config=doc["config"],
            payload=doc["payload"],
            seed=doc["seed"],
            wall_time_ms=doc["wall_time_ms"],
            toolkit_version=doc["toolkit_version"],
        )


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON experiment document, resolving defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    mode = doc.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")

    grid_size = _as_int(doc.get("grid_size", DEFAULT_GRID_SIZE), "grid_size")
    if grid_size < 8:
        raise ConfigError(f"grid_size must be >= 8, got {grid_size}")

    sigma2 = _as_float(doc.get("sigma2", 1.0), "sigma2")
    if sigma2 <= 0:
        raise ConfigError(f"sigma2 must be > 0, got {sigma2}")

    alpha = _as_float(doc.get("alpha", 0.1), "alpha")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0,1), got {alpha}")

    seed = _as_int(doc.get("seed", 0), "seed")
    trials = _as_int(doc.get("trials", 10000), "trials")
    if mode in ("simulate", "minimax", "full") and trials < 1000:
        raise ConfigError(
            f"trials must be >= 1000 for mode {mode!r}, got {trials}"
        )

    n_values = [_as_int(v, "n_values entry") for v in doc.get("n_values", [64, 256])]
    if not n_values or any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ConfigError("n_values must be nonempty and strictly increasing")

    raw_psds = doc.get("psds")
    if not isinstance(raw_psds, list) or not raw_psds:
        raise ConfigError("psds must be a nonempty list of PSD blocks")
    psd_specs = []
    labels = set()
    for i, block in enumerate(raw_psds):
        if not isinstance(block, dict):
            raise ConfigError(f"psds[{i}] must be an object")
        extra = set(block) - _PSD_BLOCK_KEYS
        if extra:
            raise ConfigError(f"psds[{i}] has unknown keys: {sorted(extra)}")
        label = block.get("label")
        family = block.get("family")
        if not isinstance(label, str) or not label:
            raise ConfigError(f"psds[{i}].label must be a nonempty string")
        if label in labels:
            raise ConfigError(f"duplicate PSD label {label!r}")
        labels.add(label)
        if not isinstance(family, str):
            raise ConfigError(f"psds[{i}].family must be a string")
        params = block.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError(f"psds[{i}].params must be an object")
        psd_specs.append({"label": label, "family": family, "params": params})

    candidate_label = doc.get("candidate_label")
    if candidate_label is not None and candidate_label not in labels:
        raise ConfigError(f"candidate_label {candidate_label!r} matches no PSD")

    tilt_grid = [
        _as_float(t, "tilt_grid entry") for t in doc.get("tilt_grid", DEFAULT_TILT_GRID)
    ]

    return ExperimentConfig(
        mode=mode,
        grid_size=grid_size,
        sigma2=sigma2,
        alpha=alpha,
        seed=seed,
        trials=trials,
        n_values=n_values,
        psd_specs=psd_specs,
        candidate_label=candidate_label,
        output_path=doc.get("output_path"),
        tilt_grid=tilt_grid,
    )


def _as_int(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return value


def _as_float(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def run_experiment(config: ExperimentConfig) -> ReportRecord:
    """Execute the configured mode and wrap the result in a report record."""
    start = time.perf_counter()
    uset = config.build_psds()
    stage = config.mode
    try:
        if config.mode == "exponent":
            payload = _run_exponent(config, uset)
        elif config.mode == "dominance":
            payload = _run_dominance(config, uset)
        elif config.mode == "simulate":
            payload = _run_simulate(config, uset)
        elif config.mode == "minimax":
            payload = _run_minimax(config, uset)
        else:
            payload = _run_full(config, uset)
    except RobustSpecError as exc:
        raise type(exc)(f"[stage {stage}] {exc}") from exc
    wall = (time.perf_counter() - start) * 1000.0
    return ReportRecord(
        mode=config.mode,
        config=config.echo(),
        payload=payload,
        seed=config.seed,
        wall_time_ms=wall,
    )


def _run_exponent(config: ExperimentConfig, uset: UncertaintySet) -> dict:
    exponents = [
        {"label": psd.label, "value": error_exponent(psd, config.sigma2).value}
        for psd in uset.members
    ]
    value, idx = genie_bound(uset, config.sigma2)
    return {
        "exponents": exponents,
        "genie": {"value": value, "index": idx, "label": uset.members[idx].label},
    }


def _run_dominance(config: ExperimentConfig, uset: UncertaintySet) -> dict:
    idx, report = find_dominated(uset, config.sigma2)
    if idx is None:
        return {"dominated": False, "candidate_index": None, "report": None}
    return {
        "dominated": True,
        "candidate_index": idx,
        "candidate_label": uset.members[idx].label,
        "report": report.to_json(),
    }


def _candidate_index(config: ExperimentConfig, uset: UncertaintySet) -> int:
    return uset.candidate_index if uset.candidate_index is not None else 0


def _run_simulate(config: ExperimentConfig, uset: UncertaintySet) -> dict:
    cand = _candidate_index(config, uset)
    weights = MixtureWeights.singleton(cand, len(uset))
    estimates = []
    for truth in range(len(uset)):
        est = empirical_exponent(
            uset,
            config.sigma2,
            weights,
            truth,
            config.n_values,
            config.trials,
            config.alpha,
            derive_seed(config.seed, f"simulate:{truth}"),
        )
        estimates.append(
            {
                "truth_label": uset.members[truth].label,
                "rows": est.to_rows(),
                "slope": est.slope,
                "ci_half_width": est.ci_half_width,
            }
        )
    return {"detector_label": uset.members[cand].label, "estimates": estimates}


def _run_minimax(config: ExperimentConfig, uset: UncertaintySet) -> dict:
    cand = _candidate_index(config, uset)
    certificates = []
    for n in config.n_values:
        models = [build_model(psd, config.sigma2, n) for psd in uset.members]
        cert = kkt_certificate(cand, models, config.sigma2)
        certificates.append({"n": n, "certificate": cert.to_json()})
    n_opt = config.n_values[0]
    models = [build_model(psd, config.sigma2, n_opt) for psd in uset.members]
    frozen = sample_gaussian(
        white_model(config.sigma2, n_opt),
        config.trials,
        derive_seed(config.seed, "frozen-h0"),
    )
    weights, value, trace = minimize_mixture_weights(
        models, config.sigma2, frozen, MixtureWeights.uniform(len(uset))
    )
    return {
        "kkt": certificates,
        "optimizer": {
            "n": n_opt,
            "weights": [float(w) for w in weights.w],
            "value": value,
            "trace": trace,
        },
    }


def _run_full(config: ExperimentConfig, uset: UncertaintySet) -> dict:
    dominance = _run_dominance(config, uset)
    exponents = _run_exponent(config, uset)
    if not dominance["dominated"]:
        return {
            "dominance": dominance,
            "exponents": exponents,
            "kkt": None,
            "simulation": None,
            "ordering_consistent": None,
        }
    cand = dominance["candidate_index"]
    config_cand = replace(config, candidate_label=uset.members[cand].label)
    minimax = _run_minimax(config_cand, uset)

    detectors = {}
    for det in range(len(uset)):
        weights = MixtureWeights.singleton(det, len(uset))
        worst_slope = np.inf
        worst = None
        for truth in range(len(uset)):
            est = empirical_exponent(
                uset,
                config.sigma2,
                weights,
                truth,
                config.n_values,
                config.trials,
                config.alpha,
                derive_seed(config.seed, f"full:{truth}"),
            )
            if est.slope < worst_slope:
                worst_slope = est.slope
                worst = {
                    "truth_label": uset.members[truth].label,
                    "slope": est.slope,
                    "ci_half_width": est.ci_half_width,
                    "rows": est.to_rows(),
                }
        detectors[uset.members[det].label] = {
            "worst_case_slope": float(worst_slope),
            "worst_case": worst,
        }
    robust = detectors[uset.members[cand].label]
    ordering = all(
        robust["worst_case_slope"]
        >= entry["worst_case_slope"] - 2.0 * entry["worst_case"]["ci_half_width"]
        for entry in detectors.values()
    )
    return {
        "dominance": dominance,
        "exponents": exponents,
        "kkt": minimax["kkt"],
        "optimizer": minimax["optimizer"],
        "simulation": detectors,
        "ordering_consistent": bool(ordering),
    }


def payload_rows(mode: str, payload: dict) -> List[dict]:
    """Flatten a payload into CSV rows under the frozen column order."""
    rows: List[dict] = []

    def row(**kw):
        base = {c: "" for c in CSV_COLUMNS}
        base["mode"] = mode
        base.update(kw)
        rows.append(base)

    if mode == "exponent":
        for entry in payload["exponents"]:
            row(label=entry["label"], value=entry["value"])
        row(label=f"genie:{payload['genie']['label']}", value=payload["genie"]["value"])
    elif mode == "dominance":
        if payload["dominated"]:
            report = payload["report"]
            for i, margin in enumerate(report["margins"]):
                row(label=f"{report['candidate_label']}:member{i}", value=margin)
    elif mode == "simulate":
        for est in payload["estimates"]:
            for r in est["rows"]:
                row(label=est["truth_label"], **r)
    elif mode == "minimax":
        for cert in payload["kkt"]:
            row(
                label=f"kkt:{cert['certificate']['candidate_index']}",
                n=cert["n"],
                value=cert["certificate"]["max_violation"],
            )
        row(label="optimizer", n=payload["optimizer"]["n"], value=payload["optimizer"]["value"])
    else:  # full
        if payload.get("simulation"):
            for det_label, entry in payload["simulation"].items():
                for r in entry["worst_case"]["rows"]:
                    row(label=f"{det_label}|{entry['worst_case']['truth_label']}", **r)
    return rows


def write_report(record: ReportRecord, path: str, format: str = "json") -> None:
    """Serialize a report record to JSON (full record) or CSV (flat series)."""
    if format not in ("json", "csv"):
        raise ConfigError(f"format must be 'json' or 'csv', got {format!r}")
    try:
        if format == "json":
            with open(path, "w") as fh:
                json.dump(record.to_json(), fh, indent=2)
                fh.write("\n")
        else:
            import csv as _csv

            with open(path, "w", newline="") as fh:
                writer = _csv.DictWriter(fh, fieldnames=list(CSV_COLUMNS))
                writer.writeheader()
                for r in payload_rows(record.mode, record.payload):
                    writer.writerow(
                        {
                            k: (f"{v:.17g}" if isinstance(v, float) else v)
                            for k, v in r.items()
                        }
                    )
    except OSError as exc:
        raise OSError(f"failed writing report to {path}: {exc}") from exc


def read_report(path: str) -> ReportRecord:
    with open(path) as fh:
        return ReportRecord.from_json(json.load(fh))
