"""Command-line entry point: bind TOML campaign configs to runners, manage
seeds, and emit results with full provenance.

Every run writes a manifest (tool version, config digest, master seed,
generator id, output paths) next to its results.  Result bodies are
deterministic: re-running a manifest's inputs reproduces them byte-for-byte
at any worker count.  Timing goes to a separate sidecar so it never breaks
that contract.

Exit codes: 0 success, 1 unknown subcommand, 2 configuration/validation
error, 3 numerical guard failure (such as an aliasing violation).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from .brownian import GENERATOR_ALGORITHM, EnsembleSpec, sample_path
from .campaigns import (
    CampaignConfig,
    CampaignValidationError,
    initial_coefficients,
    verify_homog_l4,
    verify_inhomog_l4,
    verify_l6,
    verify_xsb_embedding,
)
from .lattice_counts import quintic_resonant_count, s_kj_count, zero_product_count
from .moments import mc_vs_exact_fourth
from .propagation import solve_nls
from .quintic import growth_scan
from .torus import AliasingError, SpectralField, TorusGrid, serialize_field

SUBCOMMANDS = ("simulate", "moments", "strichartz", "l6", "xsb", "resonance", "quintic-witness")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


# --- config loading and validation -------------------------------------------


def _load_config(config_path) -> dict:
    path = Path(config_path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
    try:
        cfg = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"config {config_path} is not valid TOML: {exc}") from exc
    cfg["_digest"] = hashlib.sha256(raw).hexdigest()
    return cfg


def _ensemble_from(cfg: dict, seed_override=None) -> EnsembleSpec:
    ens = cfg.get("ensemble")
    if ens is None:
        raise ConfigError("missing [ensemble] section")
    seed = seed_override if seed_override is not None else cfg.get("run", {}).get("master_seed", 0)
    try:
        return EnsembleSpec(
            num_paths=int(ens["num_paths"]),
            master_seed=int(seed),
            horizon=float(ens["horizon"]),
            step=float(ens["step"]),
        )
    except KeyError as exc:
        raise ConfigError(f"[ensemble] missing key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid [ensemble]: {exc}") from exc


def _data_from(cfg: dict) -> tuple:
    data = cfg.get("data", {})
    family = data.get("family", "smooth_random")
    params = {k: v for k, v in data.items() if k != "family"}
    return family, params


def _campaign_config(cfg: dict, estimate_id: str, section: dict, seed_override=None) -> CampaignConfig:
    family, params = _data_from(cfg)
    config = CampaignConfig(
        estimate_id=estimate_id,
        ensemble=_ensemble_from(cfg, seed_override),
        grid_max_mode=int(cfg.get("grid", {}).get("max_mode", 16)),
        data_family=family,
        data_params=params,
        t_sweep=tuple(float(t) for t in section.get("t_sweep", ())),
        n_sweep=tuple(int(n) for n in section.get("n_sweep", ())),
        alpha=float(section.get("alpha", 1.0)),
        b=float(section.get("b", 0.35)),
        b_sweep=tuple(float(b) for b in section.get("b_sweep", ())),
        epsilon=float(section.get("epsilon", 0.1)),
        forcing=section.get("forcing", "deterministic_mode"),
        ratio_cap=float(section.get("ratio_cap", 10.0)),
        nonlinearity=float(section.get("p", 3.0)),
    )
    config.validate()
    return config


def validate(config_path) -> list:
    """Schema and theorem-range diagnostics for a config, without running it."""
    diagnostics = []
    try:
        cfg = _load_config(config_path)
    except ConfigError as exc:
        return [str(exc)]
    campaign = cfg.get("run", {}).get("campaign")
    if campaign not in SUBCOMMANDS:
        diagnostics.append(
            f"[run].campaign must be one of {SUBCOMMANDS}, got {campaign!r}"
        )
        return diagnostics
    checks = {
        "strichartz": (("homog_l4", "homog_l4"), ("inhomog_l4", "inhomog_l4")),
        "l6": (("l6", "l6"),),
        "xsb": (("xsb", "xsb_embed"),),
    }
    if campaign in checks:
        present = False
        for section_name, estimate_id in checks[campaign]:
            section = cfg.get(section_name)
            if section is None:
                continue
            present = True
            try:
                _campaign_config(cfg, estimate_id, section)
            except (CampaignValidationError, ConfigError, ValueError) as exc:
                diagnostics.append(f"[{section_name}] {exc}")
        if not present:
            diagnostics.append(f"campaign {campaign!r} has no campaign section in the config")
    elif campaign == "simulate":
        try:
            _ensemble_from(cfg)
        except ConfigError as exc:
            diagnostics.append(str(exc))
        p = float(cfg.get("simulate", {}).get("p", 3.0))
        if p <= 1:
            diagnostics.append(f"[simulate] nonlinearity exponent p={p} must exceed 1")
        scheme = cfg.get("simulate", {}).get("scheme", "strang")
        if scheme not in ("lie", "strang"):
            diagnostics.append(f"[simulate] unknown scheme {scheme!r}")
    elif campaign == "moments":
        sec = cfg.get("moments", {})
        if not sec.get("datum"):
            diagnostics.append("[moments] needs at least one [[moments.datum]] entry")
        try:
            _ensemble_from(cfg)
        except ConfigError as exc:
            diagnostics.append(str(exc))
    elif campaign == "resonance":
        sec = cfg.get("resonance", {})
        if not any(key in sec for key in ("zero_product_m", "quintic", "skj")):
            diagnostics.append(
                "[resonance] needs zero_product_m, quintic, or skj entries"
            )
    elif campaign == "quintic-witness":
        sec = cfg.get("witness", {})
        ns = sec.get("n_list", [])
        if not ns:
            diagnostics.append("[witness] needs a nonempty n_list")
        elif list(ns) != sorted(set(int(n) for n in ns)):
            diagnostics.append("[witness] n_list must be strictly ascending")
    return diagnostics


# --- deterministic writers ----------------------------------------------------


def _fmt(cell) -> str:
    if isinstance(cell, (np.floating, float)):
        return repr(float(cell))
    if isinstance(cell, (np.integer, int)):
        return str(int(cell))
    return str(cell)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(c) for c in row])


def _write_jsonl(path: Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


@dataclass
class RunManifest:
    """Provenance record; re-running with these inputs reproduces every
    result body bit-exactly (all floating-point reductions are order-fixed)."""

    tool_version: str
    subcommand: str
    config_digest: str
    master_seed: int
    generator: str
    workers: int
    timestamp: str
    config: dict
    outputs: dict = field(default_factory=dict)

    def write(self, out_dir: Path) -> None:
        payload = {
            "tool_version": self.tool_version,
            "subcommand": self.subcommand,
            "config_digest": self.config_digest,
            "master_seed": self.master_seed,
            "generator": self.generator,
            "workers": self.workers,
            "timestamp": self.timestamp,
            "config": self.config,
            "outputs": self.outputs,
        }
        (out_dir / "manifest.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n", encoding="utf-8"
        )


# --- campaign runners ----------------------------------------------------------


def _field_header(K: int):
    cols = ["knot", "t", "W", "K", "M"]
    for k in range(-K, K + 1):
        cols.extend((f"re_{k}", f"im_{k}"))
    return cols


def _grid_from(cfg: dict) -> TorusGrid:
    sec = cfg.get("grid", {})
    K = int(sec.get("max_mode", 16))
    if "phys_points" in sec:
        try:
            return TorusGrid(K, int(sec["phys_points"]))
        except ValueError as exc:
            raise ConfigError(f"[grid] {exc}") from exc
    return TorusGrid.for_bandwidth(K)


def _run_simulate(cfg, out_dir, workers, seed) -> dict:
    sec = cfg.get("simulate", {})
    spec = _ensemble_from(cfg, seed)
    p = float(sec.get("p", 3.0))
    scheme = sec.get("scheme", "strang")
    path_index = int(sec.get("path_index", 0))
    grid = _grid_from(cfg)
    family, params = _data_from(cfg)
    u0 = SpectralField(grid, initial_coefficients(family, params, grid, spec.master_seed, path_index))
    path = sample_path(spec, path_index)
    traj = solve_nls(u0, path, p, scheme)
    rows = []
    for j, (t, fld) in enumerate(zip(traj.times(), traj.fields)):
        rec = serialize_field(fld)
        rows.append([j, float(t), float(path.values[j])] + rec)
    _write_csv(out_dir / "trajectory.csv", _field_header(grid.max_mode), rows)
    return {"trajectory": "trajectory.csv"}


def _run_moments(cfg, out_dir, workers, seed) -> dict:
    sec = cfg.get("moments", {})
    spec = _ensemble_from(cfg, seed)
    n_steps = int(sec.get("n_steps", spec.n_steps))
    horizon = float(sec.get("horizon", spec.horizon))
    rows = []
    for datum in sec.get("datum", []):
        name = datum.get("name", "datum")
        coeffs = datum.get("coeffs", {})
        K = max(abs(int(k)) for k in coeffs) if coeffs else 1
        grid = TorusGrid.for_bandwidth(max(K, 1))
        u0 = SpectralField(
            grid, initial_coefficients("coeffs", {"coeffs": coeffs}, grid, spec.master_seed, 0)
        )
        check = mc_vs_exact_fourth(
            u0, horizon, spec.num_paths, spec.master_seed, n_steps, workers=workers
        )
        rows.append(
            [
                name,
                4.0, 4.0, 4.0, horizon,
                check.mc.value,
                check.mc.std_error,
                spec.num_paths,
                spec.master_seed,
                check.exact,
                check.fourth_power_mean,
                check.fourth_power_se,
                check.z_score,
            ]
        )
    _write_csv(
        out_dir / "fourth_moment.csv",
        ["datum", "rho", "q", "r", "horizon", "value", "std_error", "n_paths",
         "master_seed", "exact_fourth", "fourth_power_mean", "fourth_power_se", "z_score"],
        rows,
    )
    return {"fourth_moment": "fourth_moment.csv"}


def _report_files(report, out_dir, stem) -> dict:
    header, rows = report.csv_rows()
    _write_csv(out_dir / f"{stem}.csv", header, rows)
    (out_dir / f"{stem}_summary.txt").write_text(report.summary() + "\n", encoding="utf-8")
    return {stem: f"{stem}.csv", f"{stem}_summary": f"{stem}_summary.txt"}


def _run_strichartz(cfg, out_dir, workers, seed) -> dict:
    outputs = {}
    ran = False
    if "homog_l4" in cfg:
        config = _campaign_config(cfg, "homog_l4", cfg["homog_l4"], seed)
        config = _with_workers(config, workers)
        outputs.update(_report_files(verify_homog_l4(config), out_dir, "homog_l4"))
        ran = True
    if "inhomog_l4" in cfg:
        config = _campaign_config(cfg, "inhomog_l4", cfg["inhomog_l4"], seed)
        config = _with_workers(config, workers)
        outputs.update(_report_files(verify_inhomog_l4(config), out_dir, "inhomog_l4"))
        ran = True
    if not ran:
        raise ConfigError("strichartz campaign needs a [homog_l4] or [inhomog_l4] section")
    return outputs


def _with_workers(config: CampaignConfig, workers: int) -> CampaignConfig:
    from dataclasses import replace

    return replace(config, workers=workers)


def _run_l6(cfg, out_dir, workers, seed) -> dict:
    if "l6" not in cfg:
        raise ConfigError("l6 campaign needs an [l6] section")
    config = _with_workers(_campaign_config(cfg, "l6", cfg["l6"], seed), workers)
    report = verify_l6(config)
    outputs = _report_files(report, out_dir, "l6")
    lower = report.extra["lower_table"]
    _write_csv(
        out_dir / "l6_lower.csv",
        ["N", "T", "lower_sixth_power", "level_sum", "log_N"],
        [[r["N"], r["T"], r["lower_sixth_power"], r["level_sum"], r["log_N"]] for r in lower],
    )
    outputs["l6_lower"] = "l6_lower.csv"
    return outputs


def _run_xsb(cfg, out_dir, workers, seed) -> dict:
    if "xsb" not in cfg:
        raise ConfigError("xsb campaign needs an [xsb] section")
    config = _with_workers(_campaign_config(cfg, "xsb_embed", cfg["xsb"], seed), workers)
    return _report_files(verify_xsb_embedding(config), out_dir, "xsb_embed")


def _run_resonance(cfg, out_dir, workers, seed) -> dict:
    sec = cfg.get("resonance", {})
    rows = []
    timing = []

    def add(kind, params, count, method, elapsed):
        p = list(params) + [""] * (3 - len(params))
        rows.append([kind, *p, count, method])
        timing.append([kind, *p, method, elapsed])

    for m in sec.get("zero_product_m", []):
        t0 = time.perf_counter()
        c = zero_product_count(int(m))
        add("zero_product", [int(m)], c, "histogram", time.perf_counter() - t0)
        if int(m) <= 20:
            t0 = time.perf_counter()
            cb = zero_product_count(int(m), method="brute")
            add("zero_product", [int(m)], cb, "brute", time.perf_counter() - t0)
    for pair in sec.get("quintic", []):
        n, k = int(pair[0]), int(pair[1])
        t0 = time.perf_counter()
        c = quintic_resonant_count(n, k).count
        add("quintic", [n, k], c, "reparam", time.perf_counter() - t0)
        if n <= 8:
            t0 = time.perf_counter()
            cd = quintic_resonant_count(n, k, method="direct").count
            add("quintic", [n, k], cd, "direct", time.perf_counter() - t0)
    for triple in sec.get("skj", []):
        k, j, bound = (int(v) for v in triple)
        t0 = time.perf_counter()
        c = s_kj_count(k, j, bound).count
        add("skj", [k, j, bound], c, "enumeration", time.perf_counter() - t0)
    if not rows:
        raise ConfigError("[resonance] produced no work")
    _write_csv(out_dir / "resonance.csv",
               ["kind", "param1", "param2", "param3", "count", "method"], rows)
    _write_csv(out_dir / "resonance_timing.csv",
               ["kind", "param1", "param2", "param3", "method", "wall_time_s"], timing)
    return {"resonance": "resonance.csv", "resonance_timing": "resonance_timing.csv"}


def _run_witness(cfg, out_dir, workers, seed) -> dict:
    sec = cfg.get("witness", {})
    n_list = [int(n) for n in sec.get("n_list", [])]
    if not n_list:
        raise ConfigError("[witness] needs a nonempty n_list")
    t_rule = sec.get("t_rule", "constant")
    if t_rule == "constant":
        t_rule_arg = float(sec.get("t_value", 1.0))
    elif t_rule == "1/log^2":
        t_rule_arg = "1/log^2"
    else:
        raise ConfigError(f"unknown t_rule {t_rule!r}")
    master_seed = seed if seed is not None else cfg.get("run", {}).get("master_seed", 0)
    t0 = time.perf_counter()
    report = growth_scan(
        n_list,
        t_rule=t_rule_arg,
        exact_cap=int(sec.get("exact_cap", 16)),
        mc_paths=int(sec.get("mc_paths", 0)),
        mc_dt=float(sec.get("mc_dt", 1.0 / 256)),
        master_seed=int(master_seed),
        workers=workers,
    )
    elapsed = time.perf_counter() - t0
    header, rows = report.csv_rows()
    _write_csv(out_dir / "witness_growth.csv", header, rows)
    records = []
    for r in report.rows:
        records.append(
            {
                "N": r.n_band,
                "t": r.t,
                "lower_bound": r.lower_bound,
                "exact_norm": r.exact_norm,
                "mc_estimate": r.mc_estimate,
                "mc_se": r.mc_se,
                "divergence_diag": r.divergence_diag,
                "master_seed": int(master_seed),
            }
        )
    records.append(
        {
            "fit_log": report.fit_log,
            "fit_sqrt_log": report.fit_sqrt_log,
            "better_fit": report.better_fit,
            "master_seed": int(master_seed),
        }
    )
    _write_jsonl(out_dir / "witness.jsonl", records)
    _write_csv(out_dir / "witness_timing.csv", ["scope", "wall_time_s"], [["growth_scan", elapsed]])
    return {
        "witness_growth": "witness_growth.csv",
        "witness": "witness.jsonl",
        "witness_timing": "witness_timing.csv",
    }


_RUNNERS = {
    "simulate": _run_simulate,
    "moments": _run_moments,
    "strichartz": _run_strichartz,
    "l6": _run_l6,
    "xsb": _run_xsb,
    "resonance": _run_resonance,
    "quintic-witness": _run_witness,
}


def run(subcommand: str, config_path, out_dir, workers: int = 1, seed_override=None,
        dry_run: bool = False) -> int:
    """Execute one campaign; returns the process exit status."""
    if subcommand not in SUBCOMMANDS:
        print(f"unknown subcommand {subcommand!r}; expected one of {', '.join(SUBCOMMANDS)}",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _load_config(config_path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    campaign = cfg.get("run", {}).get("campaign")
    if campaign is not None and campaign != subcommand:
        print(f"error: config declares campaign {campaign!r}, not {subcommand!r}", file=sys.stderr)
        return EXIT_CONFIG
    diagnostics = validate(config_path)
    if diagnostics:
        for d in diagnostics:
            print(f"invalid config: {d}", file=sys.stderr)
        return EXIT_CONFIG
    if dry_run:
        print(f"dry run: {subcommand} with config digest {cfg['_digest'][:12]} is valid")
        return EXIT_OK
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    master_seed = seed_override if seed_override is not None else cfg.get("run", {}).get("master_seed", 0)
    digest = cfg.pop("_digest")
    try:
        outputs = _RUNNERS[subcommand](cfg, out, workers, seed_override)
    except AliasingError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, CampaignValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = RunManifest(
        tool_version=__version__,
        subcommand=subcommand,
        config_digest=digest,
        master_seed=int(master_seed),
        generator=GENERATOR_ALGORITHM,
        workers=workers,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        config=cfg,
        outputs=outputs,
    )
    manifest.write(out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wndisp",
        description="Campaign runner for the stochastic-dispersion NLS verification suite.",
    )
    parser.add_argument("subcommand", help=f"one of: {', '.join(SUBCOMMANDS)}, or validate")
    parser.add_argument("--config", required=True, help="TOML campaign configuration")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--workers", type=int, default=1, help="worker process count")
    parser.add_argument("--seed-override", type=int, default=None,
                        help="replace the config master seed")
    parser.add_argument("--dry-run", action="store_true", help="validate and exit")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.subcommand == "validate":
        try:
            diagnostics = validate(args.config)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        for d in diagnostics:
            print(d)
        return EXIT_OK if not diagnostics else EXIT_CONFIG
    if args.subcommand not in SUBCOMMANDS:
        parser.print_usage(sys.stderr)
        print(f"unknown subcommand {args.subcommand!r}", file=sys.stderr)
        return EXIT_USAGE
    return run(
        args.subcommand,
        args.config,
        args.out,
        workers=args.workers,
        seed_override=args.seed_override,
        dry_run=args.dry_run,
    )


if __name__ == "__main__":
    sys.exit(main())
