"""Scenario files: parsing, validation and the sweep driver."""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from . import fox_h
from .channel import MAX_LAYERS, CascadeChannel, EggLayer, enumerate_terms
from .metrics import (
    InapplicableRegimeWarning,
    Modulation,
    SweepPoint,
    SweepResult,
    _ber_params,
    _capacity_params,
    avg_ber_asymptotic,
    avg_ber_asymptotic_residues,
    avg_ber_exact,
    ergodic_capacity_asymptotic,
    ergodic_capacity_exact,
    outage_probability,
    outage_probability_asymptotic,
)
from .montecarlo import RngSpec, estimate_ber, estimate_capacity, estimate_outage

__all__ = [
    "Scenario",
    "ScenarioError",
    "ScenarioReport",
    "load_scenario",
    "validate_scenario",
    "load_modulation_table",
    "run_sweep",
    "METRICS",
]

METRICS = ("ber", "capacity", "outage")
_LAYER_KEYS = ("omega", "lambda", "a", "b", "c")


class ScenarioError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


@dataclass
class Scenario:
    layers: list
    r: int
    grid_db: list
    modulations: list = field(default_factory=list)
    mc_samples: int = 0
    rng: RngSpec = field(default_factory=RngSpec)
    gamma_th_db: float = 10.0
    capacity_unit: str = "nats"
    metadata: Any = None
    source: Path | None = None

    def channel(self, mu_db: float) -> CascadeChannel:
        return CascadeChannel(self.layers, self.r, 10.0 ** (mu_db / 10.0))


@dataclass
class ScenarioReport:
    path: str
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    scenario: Scenario | None = None

    @property
    def ok(self) -> bool:
        return not self.errors

    def lines(self) -> list[str]:
        out = [f"{self.path}: {'OK' if self.ok else 'INVALID'}"]
        out += [f"  error: {e}" for e in self.errors]
        out += [f"  warning: {w}" for w in self.warnings]
        return out


def load_modulation_table(path: str | Path | None = None) -> dict[str, Modulation]:
    if path is None:
        text = resources.files("egg_cascade").joinpath("data/modulations.json").read_text()
    else:
        text = Path(path).read_text()
    return {d["name"]: Modulation.from_dict(d) for d in json.loads(text)}


def _read_json(path: Path, where: str, errors: list[str]):
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        errors.append(f"{where}: file not found: {path}")
    except json.JSONDecodeError as exc:
        errors.append(f"{where}: {path}: line {exc.lineno} column {exc.colno}: {exc.msg}")
    return None


def _number(obj: dict, key: str, where: str, errors: list[str]):
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errors.append(f"{where}.{key}: expected a number, got {v!r}")
        return None
    if not math.isfinite(v):
        errors.append(f"{where}.{key}: must be finite")
        return None
    return float(v)


def _parse_layers(raw, base: Path, errors: list[str]):
    r_from_file = None
    if isinstance(raw, str):
        doc = _read_json(base / raw, "layers", errors)
        if doc is None:
            return [], None
        if isinstance(doc, dict):
            r_from_file = doc.get("r")
            raw = doc.get("layers")
        else:
            raw = doc
    if not isinstance(raw, list) or not raw:
        errors.append("layers: expected a non-empty array of layer objects")
        return [], r_from_file
    if len(raw) > MAX_LAYERS:
        errors.append(f"layers: {len(raw)} layers exceeds the supported maximum of {MAX_LAYERS}")
        return [], r_from_file
    layers = []
    for k, obj in enumerate(raw):
        where = f"layers[{k}]"
        if not isinstance(obj, dict):
            errors.append(f"{where}: expected an object")
            continue
        vals = {key: _number(obj, key, where, errors) for key in _LAYER_KEYS}
        if any(v is None for v in vals.values()):
            continue
        if not 0.0 <= vals["omega"] <= 1.0:
            errors.append(f"{where}.omega: must lie in [0, 1], got {vals['omega']}")
            continue
        bad = [key for key in ("lambda", "a", "b", "c") if vals[key] <= 0]
        if bad:
            errors.extend(f"{where}.{key}: must be > 0, got {vals[key]}" for key in bad)
            continue
        layers.append(EggLayer.from_dict({**vals, "label": obj.get("label", "")}))
    return layers, r_from_file


def _parse_modulations(raw, base: Path, r, errors: list[str], warns: list[str]):
    table_path = None
    if isinstance(raw, dict) and "file" in raw:
        table_path = base / raw["file"]
        raw = raw.get("use")
    if isinstance(raw, str):
        doc = _read_json(base / raw, "modulations", errors)
        if doc is None:
            return []
        raw = doc
    try:
        table = load_modulation_table(table_path)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        errors.append(f"modulations.file: {exc}")
        return []
    if raw is None:
        return []
    if not isinstance(raw, list):
        errors.append("modulations: expected an array of names or objects")
        return []
    mods = []
    for k, item in enumerate(raw):
        where = f"modulations[{k}]"
        try:
            if isinstance(item, str):
                if item not in table:
                    errors.append(f"{where}: unknown modulation {item!r} (known: {', '.join(sorted(table))})")
                    continue
                mod = table[item]
            elif isinstance(item, dict):
                mod = Modulation.from_dict(item)
            else:
                errors.append(f"{where}: expected a name or an object")
                continue
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(f"{where}: {exc}")
            continue
        if mod.detection is not None and r in (1, 2) and mod.detection != r:
            warns.append(f"{where}: {mod.name} is tabulated for r={mod.detection}, scenario uses r={r}")
        mods.append(mod)
    return mods


def _preflight(layers, r, mods: list[Modulation], errors: list[str]) -> None:
    """Pole-separation check for every H-function the metrics will build."""
    try:
        channel = CascadeChannel(layers, r, 1.0)
    except ValueError as exc:
        errors.append(f"channel: {exc}")
        return
    from .channel import _cdf_params

    for term in enumerate_terms(channel, "snr"):
        candidates = [("pdf", term.params), ("cdf", _cdf_params(term.params)),
                      ("capacity", _capacity_params(term, r))]
        candidates += [(f"ber[{m.name}]", _ber_params(term, m.p)) for m in mods]
        for what, params in candidates:
            try:
                fox_h.validate(params)
            except fox_h.PoleCollisionError as exc:
                errors.append(f"term {term.index} {what}: {exc}")


def validate_scenario(path: str | Path) -> ScenarioReport:
    path = Path(path)
    report = ScenarioReport(str(path))
    errors, warns = report.errors, report.warnings
    doc = _read_json(path, "scenario", errors)
    if doc is None:
        return report
    if not isinstance(doc, dict):
        errors.append("scenario: top level must be an object")
        return report
    base = path.parent

    layers, r_file = _parse_layers(doc.get("layers"), base, errors)
    r = doc.get("r", r_file)
    if r not in (1, 2) or isinstance(r, bool):
        errors.append(f"r: must be 1 (heterodyne) or 2 (IM/DD), got {r!r}")

    grid = []
    g = doc.get("mu_r_db")
    if not isinstance(g, dict):
        errors.append("mu_r_db: expected an object {start, stop, step}")
    else:
        vals = {k: _number(g, k, "mu_r_db", errors) for k in ("start", "stop", "step")}
        if None not in vals.values():
            if vals["step"] <= 0:
                errors.append("mu_r_db.step: must be > 0")
            elif vals["stop"] < vals["start"]:
                errors.append("mu_r_db: stop must be >= start")
            else:
                count = int(math.floor((vals["stop"] - vals["start"]) / vals["step"] + 1e-9)) + 1
                grid = [vals["start"] + k * vals["step"] for k in range(count)]

    mods = _parse_modulations(doc.get("modulations", []), base, r, errors, warns)

    mc = doc.get("mc", {})
    samples, seed, streams = 0, 0, 1
    if not isinstance(mc, dict):
        errors.append("mc: expected an object {samples, seed, streams}")
    else:
        samples = mc.get("samples", 0)
        seed = mc.get("seed", 0)
        streams = mc.get("streams", 1)
        for key, v, lo in (("samples", samples, 0), ("seed", seed, 0), ("streams", streams, 1)):
            if isinstance(v, bool) or not isinstance(v, int) or v < lo:
                errors.append(f"mc.{key}: expected an integer >= {lo}, got {v!r}")
        if isinstance(seed, int) and seed >= 2**64:
            errors.append("mc.seed: must fit in 64 bits")
        if isinstance(samples, int) and 0 < samples < 1000:
            errors.append("mc.samples: use 0 to disable or at least 1000")

    gamma_th_db = 10.0
    out = doc.get("outage", {})
    if isinstance(out, dict) and "gamma_th_db" in out:
        v = _number(out, "gamma_th_db", "outage", errors)
        gamma_th_db = v if v is not None else gamma_th_db

    unit = (doc.get("output") or {}).get("capacity_unit", "nats")
    if unit not in ("nats", "bits"):
        errors.append(f"output.capacity_unit: expected 'nats' or 'bits', got {unit!r}")

    if layers and r in (1, 2) and not errors:
        _preflight(layers, r, mods, errors)

    if not errors:
        report.scenario = Scenario(
            layers=layers, r=r, grid_db=grid, modulations=mods, mc_samples=samples,
            rng=RngSpec(seed, streams), gamma_th_db=gamma_th_db, capacity_unit=unit,
            metadata=doc.get("metadata"), source=path,
        )
    return report


def load_scenario(path: str | Path) -> Scenario:
    report = validate_scenario(path)
    if not report.ok:
        raise ScenarioError(report.errors)
    return report.scenario


def _point(scenario: Scenario, metric: str, mod: Modulation | None, k: int, mu_db: float) -> SweepPoint:
    pt = SweepPoint(mu_db)
    channel = scenario.channel(mu_db)
    rng = scenario.rng.child(k)
    gamma_th = 10.0 ** (scenario.gamma_th_db / 10.0)
    scale = 1.0 / math.log(2.0) if (metric == "capacity" and scenario.capacity_unit == "bits") else 1.0
    problems = []
    try:
        if metric == "ber":
            pt.exact = avg_ber_exact(channel, mod)
        elif metric == "capacity":
            pt.exact = ergodic_capacity_exact(channel) * scale
        else:
            pt.exact = outage_probability(channel, gamma_th)
    except (fox_h.FoxHError, ValueError, OverflowError) as exc:
        problems.append(f"exact: {exc}")
    try:
        if metric == "ber":
            if channel.N == 2:
                try:
                    pt.asymptotic = avg_ber_asymptotic(channel, mod)
                except ValueError:
                    pt.asymptotic = avg_ber_asymptotic_residues(channel, mod, count=3)
            else:
                pt.asymptotic = avg_ber_asymptotic_residues(channel, mod, count=3)
        elif metric == "capacity":
            pt.asymptotic = ergodic_capacity_asymptotic(channel) * scale
        else:
            pt.asymptotic = outage_probability_asymptotic(channel, gamma_th, count=3)
    except (fox_h.FoxHError, ValueError, OverflowError) as exc:
        problems.append(f"asymptotic: {exc}")
    if scenario.mc_samples:
        if metric == "ber":
            est = estimate_ber(channel, mod, scenario.mc_samples, rng)
        elif metric == "capacity":
            est = estimate_capacity(channel, scenario.mc_samples, rng)
        else:
            est = estimate_outage(channel, gamma_th, scenario.mc_samples, rng)
        pt.mc, pt.mc_stderr = est.value * scale, est.stderr * scale
    pt.error = " | ".join(problems)
    return pt


def run_sweep(scenario: Scenario, metric: str, workers: int = 1) -> list[SweepResult]:
    """One SweepResult per modulation for ``ber``, a single one otherwise.

    Grid points are independent; MC streams for point k are seeded from
    (seed, k), so the output does not depend on ``workers``.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    if metric == "ber":
        if not scenario.modulations:
            raise ScenarioError(["modulations: a BER sweep needs at least one modulation"])
        groups = [(m.name, m) for m in scenario.modulations]
    else:
        groups = [("", None)]
    jobs = [(label, mod, k, mu) for label, mod in groups for k, mu in enumerate(scenario.grid_db)]

    def work(job):
        label, mod, k, mu = job
        return _point(scenario, metric, mod, k, mu)

    # the asymptotic column is filled at every point, also where the
    # high-SNR expansion is poor, so regime warnings are silenced here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InapplicableRegimeWarning)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                points = list(ex.map(work, jobs))
        else:
            points = [work(j) for j in jobs]
    results = []
    for label, _ in groups:
        res = SweepResult(metric, label)
        res.points = [pt for (lab, _, _, _), pt in zip(jobs, points) if lab == label]
        results.append(res)
    return results
