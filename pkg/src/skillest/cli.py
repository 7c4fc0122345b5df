"""Command-line interface.

Subcommands: simulate, estimate, sweep, baseball, plot, validate-config.
All randomness flows from --seed through named substreams, so repeated
invocations with identical flags produce byte-identical outputs.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numerical
degeneracy.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .agents import Observation
from .baseball import (
    StrikeZone,
    build_pitch_reward,
    confidence_ellipse,
    default_pitch_filter_config,
    default_pitch_jeeds_config,
    estimate_pitcher,
    ingest_pitches,
    list_pitchers,
)
from .darts import ActionGrid, DartboardState, rasterize_reward
from .errors import (
    DataError,
    DegenerateFilterError,
    InvalidParameterError,
    SkillEstimationError,
)
from .experiment import (
    AGENT_CHOICES,
    SweepSpec,
    build_agent_spec,
    simulate_observations,
    write_sweep_csv,
    parameter_sweep,
)
from .jeeds import JeedsConfig, JeedsEstimator
from .mcse import FilterConfig, SkillFilter
from .noise import ExecutionSkillParams
from .rng import derive_seed, substream
from .traces import read_trace_csv, write_trace_csv

OUTPUT_DIR_ENV = "SKILLEST_OUTPUT_DIR"


def _out_dir(args) -> Path:
    out = args.out_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise DataError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise DataError("config file must contain a JSON object")
    return cfg


def _merged(args, config: dict, key: str, default):
    """Flag value if given, else config-file value, else default."""
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


def _parse_sigma(text: str) -> ExecutionSkillParams:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 3:
        raise InvalidParameterError(f"--sigma expects 'sx,sy,rho', got {text!r}")
    return ExecutionSkillParams(*parts)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    config = _load_config_file(args.config)
    agent = _merged(args, config, "agent", "rational")
    n = int(_merged(args, config, "n", 100))
    seed = int(_merged(args, config, "seed", 0))
    resolution = float(_merged(args, config, "resolution", 5.0))
    lam = _merged(args, config, "lam", None)
    sigma = _merged(args, config, "sigma", None)
    sigma_final = _merged(args, config, "sigma_final", None)
    change_step = _merged(args, config, "change_step", None)

    spec_rng = substream(seed, "agent-spec")
    spec = build_agent_spec(
        agent,
        spec_rng,
        n,
        skill=_parse_sigma(sigma) if isinstance(sigma, str) else sigma,
        final_skill=_parse_sigma(sigma_final) if isinstance(sigma_final, str) else sigma_final,
        lam=float(lam) if lam is not None else None,
        change_step=int(change_step) if change_step is not None else None,
    )
    states, observations, truths = simulate_observations(
        spec, seed, n, agent_id=agent, resolution=resolution
    )

    out = _out_dir(args)
    with open(out / "observations.csv", "w", newline="") as fh:
        fh.write("obs_index,state_id,executed_x,executed_y\n")
        for i, obs in enumerate(observations):
            fh.write(f"{i},{obs.state_id},{obs.executed_action[0]!r},{obs.executed_action[1]!r}\n")
    geometry = states[0].geometry
    _write_json(
        out / "states.json",
        {
            "geometry": {
                "board_radius": geometry.board_radius,
                "bull_radius": geometry.bull_radius,
                "outer_bull_radius": geometry.outer_bull_radius,
                "treble_inner": geometry.treble_inner,
                "treble_outer": geometry.treble_outer,
                "double_inner": geometry.double_inner,
                "double_outer": geometry.double_outer,
                "sector_count": geometry.sector_count,
            },
            "resolution": resolution,
            "states": [s.to_record() for s in states],
        },
    )
    dyn = spec.dynamics
    _write_json(
        out / "truth.json",
        {
            "agent": agent,
            "lambda": spec.decision.lam,
            "n_observations": n,
            "seed": seed,
            "skill_initial": dict(zip(("sigma_x", "sigma_y", "rho"), spec.skill.as_tuple())),
            "skill_final": (
                dict(zip(("sigma_x", "sigma_y", "rho"), dyn.final.as_tuple()))
                if hasattr(dyn, "final")
                else None
            ),
            "change_step": getattr(dyn, "change_step", None),
            "per_observation": [
                dict(zip(("sigma_x", "sigma_y", "rho"), t.as_tuple())) for t in truths
            ],
        },
    )
    print(f"wrote {n} observations to {out}")
    return 0


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------

def _read_observations(path: Path) -> list[Observation]:
    import csv as _csv

    observations = []
    with open(path, newline="") as fh:
        reader = _csv.DictReader(fh)
        if reader.fieldnames is None or not {
            "obs_index",
            "state_id",
            "executed_x",
            "executed_y",
        }.issubset(reader.fieldnames):
            raise DataError(f"observation file {path} has unexpected columns {reader.fieldnames}")
        for rec in reader:
            observations.append(
                Observation(
                    state_id=int(rec["state_id"]),
                    executed_action=(float(rec["executed_x"]), float(rec["executed_y"])),
                )
            )
    return observations


def _read_states(path: Path):
    with open(path) as fh:
        data = json.load(fh)
    try:
        resolution = float(data["resolution"])
        states = {int(r["state_id"]): DartboardState.from_record(r) for r in data["states"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"states file {path} does not match the expected schema: {exc}") from exc
    return resolution, states


def _read_truth(path: Path) -> list[ExecutionSkillParams] | None:
    if not path.exists():
        return None
    with open(path) as fh:
        data = json.load(fh)
    return [
        ExecutionSkillParams(t["sigma_x"], t["sigma_y"], t["rho"])
        for t in data["per_observation"]
    ]


def cmd_estimate(args) -> int:
    config = _load_config_file(args.config)
    obs_dir = Path(_merged(args, config, "obs_dir", "."))
    method = _merged(args, config, "method", "mcse")
    seed = int(_merged(args, config, "seed", 0))

    obs_path = Path(args.obs) if args.obs else obs_dir / "observations.csv"
    states_path = Path(args.states) if args.states else obs_dir / "states.json"
    truth_path = Path(args.truth) if args.truth else obs_dir / "truth.json"
    if not obs_path.exists():
        raise DataError(f"observation file not found: {obs_path}")
    if not states_path.exists():
        raise DataError(f"states file not found: {states_path}")

    observations = _read_observations(obs_path)
    resolution, states = _read_states(states_path)
    truths = _read_truth(truth_path)
    if truths is not None and len(truths) < len(observations):
        raise DataError("truth file has fewer entries than observations")

    grid = ActionGrid(resolution=resolution, half_extent=next(iter(states.values())).geometry.board_radius)
    rewards = {sid: rasterize_reward(s, grid) for sid, s in states.items()}

    if method == "mcse":
        fc = FilterConfig(
            n_particles=int(_merged(args, config, "m", 1000)),
            resample_fraction=float(_merged(args, config, "r", 0.9)),
            perturb_fraction=float(_merged(args, config, "w_pct", 0.005)),
            resample_strategy=(
                "always" if _merged(args, config, "resample", "neff") == "always" else "neff_threshold"
            ),
            neff_threshold=float(_merged(args, config, "tau", 0.5)),
            neff_mode=(
                "normalized_ess"
                if _merged(args, config, "neff_mode", "rawsum") == "ess"
                else "raw_sum_fraction"
            ),
            seed=derive_seed(seed, "estimator", "mcse"),
            lambda_log_uniform=bool(_merged(args, config, "lambda_log_uniform", False)),
            precision=_merged(args, config, "precision", "float32"),
            fft_workers=int(_merged(args, config, "fft_workers", 1)),
        )
        runner = SkillFilter(fc)
        run_flags = {
            "m": fc.n_particles,
            "r": fc.resample_fraction,
            "w_pct": fc.perturb_fraction,
            "resample_strategy": fc.resample_strategy,
            "tau": fc.neff_threshold,
            "neff_mode": fc.neff_mode,
        }
    elif method == "jeeds":
        jc = JeedsConfig(
            sigma_spacing=_merged(args, config, "sigma_spacing", "linear"),
            precision=_merged(args, config, "precision", "float32"),
            fft_workers=int(_merged(args, config, "fft_workers", 1)),
        )
        runner = JeedsEstimator(jc)
        run_flags = {"n_sigma": jc.n_sigma, "n_lambda": jc.n_lambda, "sigma_spacing": jc.sigma_spacing}
    else:
        raise InvalidParameterError(f"unknown method {method!r}")

    est = None
    for i, obs in enumerate(observations):
        if obs.state_id not in rewards:
            raise DataError(f"observation {i} references unknown state {obs.state_id}")
        truth = truths[i] if truths is not None else None
        est = runner.update(obs, rewards[obs.state_id], truth=truth)

    out = _out_dir(args)
    write_trace_csv(out / f"trace_{method}.csv", runner.trace)
    cov = est.covariance()
    _write_json(
        out / f"final_{method}.json",
        {
            "method": method,
            "seed": seed,
            "n_observations": len(observations),
            "estimate": {
                "sigma_x": float(est.sigma_x),
                "sigma_y": float(est.sigma_y),
                "rho": float(est.rho),
                "lambda": float(est.lam),
            },
            "covariance": [[float(cov[0, 0]), float(cov[0, 1])], [float(cov[1, 0]), float(cov[1, 1])]],
            "gv": float(np.linalg.det(cov)),
            "flags": run_flags,
        },
    )
    print(f"wrote trace_{method}.csv and final_{method}.json to {out}")
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _float_list(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).split(","))


def _int_list(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).split(","))


def cmd_sweep(args) -> int:
    config = _load_config_file(args.config)
    strategies_raw = _merged(args, config, "strategies", "neff,always")
    if isinstance(strategies_raw, str):
        strategies_raw = strategies_raw.split(",")
    strategies = tuple(
        "neff_threshold" if s.strip() in ("neff", "neff_threshold") else "always"
        for s in strategies_raw
    )
    spec = SweepSpec(
        w_pct_values=_float_list(_merged(args, config, "w_pct", "0.002,0.005,0.020")),
        r_values=_float_list(_merged(args, config, "r", "0.75,0.90,0.95")),
        strategies=strategies,
        m_values=_int_list(_merged(args, config, "m", "1000")),
        n_seeds=int(_merged(args, config, "seeds", 10)),
        n_observations=int(_merged(args, config, "n", 100)),
        seed=int(_merged(args, config, "seed", 0)),
        neff_threshold=float(_merged(args, config, "tau", 0.5)),
        workers=int(_merged(args, config, "workers", 1)),
    )
    table = parameter_sweep(spec)
    out = _out_dir(args)
    write_sweep_csv(out / "sweep.csv", table)
    print(f"wrote {len(table)}-row ranking to {out / 'sweep.csv'}")
    return 0


# ---------------------------------------------------------------------------
# baseball
# ---------------------------------------------------------------------------

def cmd_baseball(args) -> int:
    config = _load_config_file(args.config)
    pitches_path = _merged(args, config, "pitches", None)
    if not pitches_path:
        raise DataError("--pitches is required")
    pitch_type = _merged(args, config, "pitch_type", "FF")
    min_count = int(_merged(args, config, "min_count", 100))
    seed = int(_merged(args, config, "seed", 0))
    n_samples = int(_merged(args, config, "samples", 1_000_000))
    methods_raw = _merged(args, config, "methods", "mcse,jeeds")
    methods = [m.strip() for m in (methods_raw.split(",") if isinstance(methods_raw, str) else methods_raw)]
    zone_raw = _merged(args, config, "zone", None)
    if zone_raw:
        hw, zlo, zhi = (float(v) for v in str(zone_raw).split(","))
        zone = StrikeZone(x_half_width=hw, z_low=zlo, z_high=zhi)
    else:
        zone = StrikeZone()
    resolution = float(_merged(args, config, "resolution", 0.05))
    margin = float(_merged(args, config, "margin", 3.0))
    m = int(_merged(args, config, "m", 500))

    if args.pitchers:
        pitcher_ids = [p.strip() for p in args.pitchers.split(",")]
    else:
        counts = list_pitchers(pitches_path, pitch_type=pitch_type)
        pitcher_ids = sorted(p for p, c in counts.items() if c >= min_count)
        if not pitcher_ids:
            raise DataError(f"no pitcher has at least {min_count} {pitch_type} pitches")

    reward = build_pitch_reward(zone, resolution=resolution, margin=margin)
    out = _out_dir(args)
    reports_by_method: dict[str, list] = {mth: [] for mth in methods}
    for pid in pitcher_ids:
        records = ingest_pitches(
            pitches_path, pitcher=pid, pitch_type=pitch_type, min_count=min_count
        )
        for mth in methods:
            fc = replace(
                default_pitch_filter_config(),
                n_particles=m,
                seed=derive_seed(seed, "pitcher", pid),
            )
            report = estimate_pitcher(
                records,
                estimator=mth,
                zone=zone,
                reward=reward,
                filter_config=fc if mth == "mcse" else None,
                jeeds_config=default_pitch_jeeds_config() if mth == "jeeds" else None,
                n_samples=n_samples,
                seed=seed,
            )
            reports_by_method[mth].append(report)
            _write_json(out / f"pitcher_{pid}_{mth}.json", report.to_json_dict())

    from .plots import plot_ellipses

    for mth, reports in reports_by_method.items():
        ellipses = [
            (r.pitcher_id, confidence_ellipse(r.covariance(), 0.5, center=r.mean_location))
            for r in reports
        ]
        plot_ellipses(
            ellipses,
            out / f"ellipses_{mth}.svg",
            zone_bounds=zone.bounds,
            title=f"50% confidence ellipses ({mth})",
        )
    print(f"wrote {sum(len(v) for v in reports_by_method.values())} pitcher reports to {out}")
    return 0


# ---------------------------------------------------------------------------
# plot
# ---------------------------------------------------------------------------

def cmd_plot(args) -> int:
    from .plots import plot_ellipses, plot_jd_curves

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if args.traces:
        labels = args.labels.split(",") if args.labels else None
        curves = {}
        for i, tpath in enumerate(args.traces):
            rows = read_trace_csv(tpath)
            rows = [r for r in rows if r.jd is not None]
            if not rows:
                raise DataError(f"trace {tpath} has no scored rows (jd column empty)")
            label = labels[i] if labels and i < len(labels) else Path(tpath).stem
            curves[label] = (
                np.array([r.obs_index for r in rows]),
                np.array([r.jd for r in rows]),
            )
        plot_jd_curves(curves, out_path)
    elif args.ellipses:
        entries = []
        for fpath in args.ellipses:
            with open(fpath) as fh:
                data = json.load(fh)
            cov = np.array(data["covariance"])
            entries.append((Path(fpath).stem, confidence_ellipse(cov, 0.5)))
        plot_ellipses(entries, out_path)
    else:
        raise DataError("plot needs --traces or --ellipses inputs")
    print(f"wrote {out_path}")
    return 0


# ---------------------------------------------------------------------------
# validate-config
# ---------------------------------------------------------------------------

_KNOWN_KEYS = {
    "simulate": {
        "agent", "sigma", "sigma_final", "lam", "change_step", "n", "seed", "resolution",
    },
    "estimate": {
        "obs_dir", "method", "seed", "m", "r", "w_pct", "resample", "tau", "neff_mode",
        "lambda_log_uniform", "precision", "fft_workers", "sigma_spacing",
    },
    "sweep": {
        "w_pct", "r", "strategies", "m", "seeds", "n", "seed", "tau", "workers",
    },
    "baseball": {
        "pitches", "pitch_type", "min_count", "seed", "samples", "methods", "zone",
        "resolution", "margin", "m",
    },
}


def cmd_validate_config(args) -> int:
    cfg = _load_config_file(args.config)
    schema = args.schema
    unknown = set(cfg) - _KNOWN_KEYS[schema]
    if unknown:
        print(f"unknown {schema} config keys: {sorted(unknown)}", file=sys.stderr)
        return 2
    if schema == "simulate" and "agent" in cfg and cfg["agent"] not in AGENT_CHOICES:
        print(f"unknown agent {cfg['agent']!r}", file=sys.stderr)
        return 2
    if schema == "estimate" and "method" in cfg and cfg["method"] not in ("mcse", "jeeds"):
        print(f"unknown method {cfg['method']!r}", file=sys.stderr)
        return 2
    print(f"{args.config}: valid {schema} config")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skillest",
        description="Skill estimation: simulation, estimators, sweeps, baseball analysis, plots.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate an agent and write observations + truth")
    p.add_argument("--agent", choices=AGENT_CHOICES, help="agent type (default rational)")
    p.add_argument("--sigma", help="initial skill as 'sx,sy,rho' (random if omitted)")
    p.add_argument("--sigma-final", dest="sigma_final", help="final skill for dynamic agents")
    p.add_argument("--lambda", dest="lam", type=float, help="rationality parameter")
    p.add_argument("--change-step", dest="change_step", type=int, help="abrupt change index")
    p.add_argument("--n", type=int, help="number of observations (default 100)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--resolution", type=float, help="action grid resolution in mm (default 5.0)")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--config", help="JSON config file (flags win)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="run an estimator over an observation file")
    p.add_argument("--method", choices=("mcse", "jeeds"), help="estimator (default mcse)")
    p.add_argument("--obs-dir", dest="obs_dir", help="directory with observations/states/truth files")
    p.add_argument("--obs", help="observations CSV path")
    p.add_argument("--states", help="states JSON path")
    p.add_argument("--truth", help="truth JSON path (enables JD scoring)")
    p.add_argument("--m", type=int, help="particle count (default 1000)")
    p.add_argument("--r", type=float, help="resample fraction (default 0.9)")
    p.add_argument("--w-pct", dest="w_pct", type=float, help="perturbation fraction (default 0.005)")
    p.add_argument("--resample", choices=("always", "neff"), help="resample strategy (default neff)")
    p.add_argument("--tau", type=float, help="n_eff threshold (default 0.5)")
    p.add_argument("--neff-mode", dest="neff_mode", choices=("rawsum", "ess"),
                   help="n_eff definition (default rawsum)")
    p.add_argument("--lambda-log-uniform", dest="lambda_log_uniform", action="store_const",
                   const=True, help="sample lambda log-uniformly at init")
    p.add_argument("--precision", choices=("float32", "float64"), help="batch precision")
    p.add_argument("--fft-workers", dest="fft_workers", type=int, help="FFT worker threads")
    p.add_argument("--sigma-spacing", dest="sigma_spacing", choices=("linear", "log"),
                   help="JEEDS sigma hypothesis spacing")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--config", help="JSON config file (flags win)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="rank filter configurations by mean final JD")
    p.add_argument("--w-pct", dest="w_pct", help="comma list of perturbation fractions")
    p.add_argument("--r", help="comma list of resample fractions")
    p.add_argument("--strategies", help="comma list from {neff, always}")
    p.add_argument("--m", help="comma list of particle counts")
    p.add_argument("--seeds", type=int, help="runs per configuration (default 10)")
    p.add_argument("--n", type=int, help="observations per run (default 100)")
    p.add_argument("--tau", type=float, help="n_eff threshold (default 0.5)")
    p.add_argument("--workers", type=int, help="process pool size (default 1)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--config", help="JSON config file (flags win)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("baseball", help="estimate pitcher execution skill from pitch locations")
    p.add_argument("--pitches", help="CSV of pitch locations")
    p.add_argument("--pitchers", help="comma list of pitcher ids (default: all qualifying)")
    p.add_argument("--pitch-type", dest="pitch_type", help="pitch type code (default FF)")
    p.add_argument("--min-count", dest="min_count", type=int, help="minimum pitches (default 100)")
    p.add_argument("--methods", help="comma list of estimators (default mcse,jeeds)")
    p.add_argument("--m", type=int, help="particle count (default 500)")
    p.add_argument("--zone", help="strike zone as 'half_width,z_low,z_high' (feet)")
    p.add_argument("--resolution", type=float, help="reward grid resolution in feet (default 0.05)")
    p.add_argument("--margin", type=float, help="reward grid margin in feet (default 3.0)")
    p.add_argument("--samples", type=int, help="Monte Carlo samples (default 1000000)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--config", help="JSON config file (flags win)")
    p.set_defaults(func=cmd_baseball)

    p = sub.add_parser("plot", help="render JD curves or confidence ellipses to SVG")
    p.add_argument("--traces", nargs="+", help="trace CSV files (JD curve mode)")
    p.add_argument("--labels", help="comma list of series labels")
    p.add_argument("--ellipses", nargs="+", help="final-estimate JSON files (ellipse mode)")
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("validate-config", help="check a JSON config file")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--schema", required=True, choices=sorted(_KNOWN_KEYS), help="config schema")
    p.set_defaults(func=cmd_validate_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateFilterError as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return 4
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (InvalidParameterError, SkillEstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
