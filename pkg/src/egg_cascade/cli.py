"""Command-line interface: sweeps, scenario checks, PDF tables and MC reports.

    egg-cascade sweep    --scenario S.json --metric ber --out ber.csv
    egg-cascade validate --scenario S.json
    egg-cascade pdf      --scenario S.json --domain snr --mu-db 20 --out pdf.csv
    egg-cascade mc-check --scenario S.json --metric capacity
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from .channel import CascadeChannel, cascade_irradiance_cdf, cascade_irradiance_pdf, cascade_snr_cdf, cascade_snr_pdf
from .montecarlo import RngSpec
from .scenario import METRICS, ScenarioError, load_scenario, run_sweep, validate_scenario

EXIT_OK = 0
EXIT_MC_MISMATCH = 1
EXIT_INVALID = 2
EXIT_ALL_FAILED = 3

SWEEP_COLUMNS = ["mu_r_db", "exact", "asymptotic", "mc", "mc_stderr", "error"]


def fmt(v) -> str:
    """17 significant digits, empty for missing values."""
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def write_csv(rows: list[list[str]], header: list[str], out: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        Path(out).write_text(buf.getvalue())


def sweep_rows(results) -> tuple[list[str], list[list[str]]]:
    with_mod = results[0].metric == "ber"
    header = (["modulation"] if with_mod else []) + SWEEP_COLUMNS
    rows = []
    for res in results:
        for p in res.points:
            row = [fmt(p.mu_r_db), fmt(p.exact), fmt(p.asymptotic), fmt(p.mc), fmt(p.mc_stderr), p.error]
            rows.append(([res.label] if with_mod else []) + row)
    return header, rows


def _load(args):
    scenario = load_scenario(args.scenario)
    if getattr(args, "seed", None) is not None or getattr(args, "streams", None) is not None:
        seed = scenario.rng.seed if args.seed is None else args.seed
        streams = scenario.rng.streams if args.streams is None else args.streams
        scenario = replace(scenario, rng=RngSpec(seed, streams))
    if getattr(args, "samples", None) is not None:
        scenario = replace(scenario, mc_samples=args.samples)
    if getattr(args, "bits", False):
        scenario = replace(scenario, capacity_unit="bits")
    return scenario


def cmd_sweep(args) -> int:
    scenario = _load(args)
    results = run_sweep(scenario, args.metric, workers=args.workers)
    header, rows = sweep_rows(results)
    write_csv(rows, header, args.out)
    points = [p for res in results for p in res.points]
    if points and all(p.exact is None for p in points):
        print("error: numerical failure at every grid point", file=sys.stderr)
        return EXIT_ALL_FAILED
    return EXIT_OK


def cmd_validate(args) -> int:
    report = validate_scenario(args.scenario)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_pdf(args) -> int:
    scenario = _load(args)
    mu_db = scenario.grid_db[0] if args.mu_db is None else args.mu_db
    channel = CascadeChannel(scenario.layers, scenario.r, 10.0 ** (mu_db / 10.0))
    if args.domain == "snr":
        lo, hi = args.min or 1e-3 * channel.mu_r, args.max or 1e2 * channel.mu_r
        pdf, cdf = cascade_snr_pdf, cascade_snr_cdf
    else:
        lo, hi = args.min or 1e-3, args.max or 10.0
        pdf, cdf = cascade_irradiance_pdf, cascade_irradiance_cdf
    if not 0 < lo < hi:
        print("error: need 0 < --min < --max", file=sys.stderr)
        return EXIT_INVALID
    xs = np.geomspace(lo, hi, args.points)
    rows = [[fmt(x), fmt(pdf(channel, x)), fmt(cdf(channel, x))] for x in xs]
    write_csv(rows, ["x", "pdf", "cdf"], args.out)
    return EXIT_OK


def cmd_mc_check(args) -> int:
    scenario = _load(args)
    if scenario.mc_samples == 0:
        scenario = replace(scenario, mc_samples=100_000)
    results = run_sweep(scenario, args.metric, workers=args.workers)
    worst = 0.0
    for res in results:
        title = f"{args.metric}" + (f" [{res.label}]" if res.label else "")
        print(f"{title}: {scenario.mc_samples} samples, threshold {args.sigma:g} sigma")
        for p in res.points:
            if p.exact is None or p.mc is None:
                print(f"  {p.mu_r_db:7.2f} dB  skipped ({p.error or 'no estimate'})")
                continue
            z = 0.0 if p.mc_stderr == 0 else (p.mc - p.exact) / p.mc_stderr
            worst = max(worst, abs(z))
            flag = "ok" if abs(z) <= args.sigma else "MISMATCH"
            print(f"  {p.mu_r_db:7.2f} dB  exact={p.exact:.6e}  mc={p.mc:.6e} +/- {p.mc_stderr:.2e}  z={z:+.2f}  {flag}")
    print(f"max |z| = {worst:.2f}")
    return EXIT_OK if worst <= args.sigma else EXIT_MC_MISMATCH


def cmd_template(args) -> int:
    text = resources.files("egg_cascade").joinpath("data/scenario_template.json").read_text()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="egg-cascade", description="Cascaded EGG channel performance metrics")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, mc=True):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", default=None, help="output CSV (default: stdout)")
        if mc:
            p.add_argument("--seed", type=int, default=None, help="override mc.seed (unsigned 64-bit)")
            p.add_argument("--samples", type=int, default=None, help="override mc.samples (0 disables MC)")
            p.add_argument("--streams", type=int, default=None, help="override mc.streams")
            p.add_argument("--workers", type=int, default=1, help="grid points evaluated concurrently")
            p.add_argument("--bits", action="store_true", help="report capacity in bits instead of nats")

    p = sub.add_parser("sweep", help="exact / asymptotic / MC metric over the SNR grid")
    common(p)
    p.add_argument("--metric", choices=METRICS, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("pdf", help="tabulate the cascade PDF and CDF")
    common(p, mc=False)
    p.add_argument("--domain", choices=("irradiance", "snr"), default="irradiance")
    p.add_argument("--mu-db", type=float, default=None, help="average SNR for --domain snr (default: grid start)")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--min", type=float, default=None)
    p.add_argument("--max", type=float, default=None)
    p.set_defaults(func=cmd_pdf)

    p = sub.add_parser("mc-check", help="compare closed forms against Monte Carlo")
    common(p)
    p.add_argument("--metric", choices=METRICS, required=True)
    p.add_argument("--sigma", type=float, default=3.0, help="allowed |z| (default 3)")
    p.set_defaults(func=cmd_mc_check)

    p = sub.add_parser("template", help="print the bundled scenario template")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_template)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
