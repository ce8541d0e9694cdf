"""Experiment runner: ``fibrot <experiment> [--config FILE] [key=value ...]``.

Every experiment resolves its configuration from three layers with strict
precedence (command-line ``key=value`` pairs and flags, then the JSON config
file, then built-in defaults), runs one batch computation, writes plot-ready
CSVs plus a ``run_manifest.json`` into the output directory, and prints a
one-object JSON summary.  Exit code 0 means every verdict passed; 1 means a
verdict failed or the experiment faulted; 2 means the configuration was
rejected.

Identical (config, seed) pairs reproduce every numeric output to better
than 1e-12 per cell; the manifest echoes the resolved config so a run can
be re-issued from its own output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .fibered_measure import (
    midpoint_grid,
    make_haar,
    make_graph,
    convolve,
)
from .angle_maps import Tabulated, map_from_descriptor
from .dynamics_lab import (
    _fmt,
    _write_rows,
    atom_spectrum,
    cantor_obstruction,
    decay_rate,
    density_one_estimate,
    orbit_distances,
    weyl_double_integral_mc,
    weyl_statistic,
)
from .homogeneous import (
    ModelConfig,
    birkhoff_ensemble,
    correlation,
    haar_sample,
    induced_angle_grid,
    trajectory,
    SkewState,
)

_LINEAR_ID = {"family": "linear", "params": {"alpha": [1.0]}}
_CANTOR24 = {"family": "cantor_inverse_devil", "params": {"depth": 24}}

_DEFAULTS = {
    "orbit": {
        "map": _LINEAR_ID, "Q": 4096, "N": 100, "eps": 0.01,
        "n_max": 8, "m_max": 8, "min_density": None, "seed": 0,
    },
    "weyl": {
        "map": _LINEAR_ID, "Q": 4096, "m": [1], "N": 5000, "n_base": 0,
        "mc_pairs": 0, "s_max": None, "seed": 0,
    },
    "atoms": {
        "map": _CANTOR24, "Q": 65536, "m": [1], "delta": 1e-3,
        "threshold": 0.05, "seed": 0,
    },
    "density": {
        "map": _CANTOR24, "Q": 65536, "eps": 0.05, "N": 2000,
        "n_max": 8, "m_max": 8, "min_density": None, "seed": 0,
    },
    "cantor": {
        "B": 24, "m": 1, "k_max": 6, "Q": 65536, "tol_pair": 1e-3, "seed": 0,
    },
    "decay": {
        "eps": 0.5, "k_list": [25, 50, 100, 200], "n_abs_max": 3,
        "m_abs_max": 3, "Q": 65536, "c_max": None, "seed": 0,
    },
    "homog-asynch": {
        "t0": 0.5, "alpha": [0.3, 0.7], "beta": [1.0, 0.0], "Q": 100000,
        "chars": [[1, 0], [0, 1], [1, 1]], "delta": 1e-3, "threshold": 0.05,
        "N": 2000, "s_max": 0.02, "seed": 0,
    },
    "homog-birkhoff": {
        "t0": 0.5, "alpha": [0.3, 0.7], "beta": [1.0, 0.0], "T": 100000,
        "m": [1, 0], "n_orbits": 20, "median_max": 0.05, "dump_steps": 200,
        "seed": 0,
    },
    "homog-mixing": {
        "t0": 0.5, "alpha": [0.3, 0.7], "beta": [1.0, 0.0], "m1": [1, 0],
        "m2": [1, 0], "k": 30, "M": 100000, "corr_max": 0.03, "seed": 0,
    },
    "monoid-selftest": {
        "n_triples": 50, "Q": 512, "m_max": 8, "tol": 1e-12, "seed": 0,
    },
}


class ConfigError(ValueError):
    pass


def _resolve_config(experiment, config_path, overrides, seed_flag):
    cfg = dict(_DEFAULTS[experiment])
    if config_path is not None:
        with open(config_path) as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)} for "
                              f"experiment {experiment!r}")
        cfg.update(file_cfg)
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not key=value")
        if key not in cfg:
            raise ConfigError(f"unknown config key {key!r} for experiment "
                              f"{experiment!r}")
        try:
            cfg[key] = json.loads(raw)
        except json.JSONDecodeError:
            cfg[key] = raw
    if seed_flag is not None:
        cfg["seed"] = seed_flag
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool):
        raise ConfigError("seed must be an integer")
    return cfg


def _mchars(m):
    m = np.atleast_1d(np.asarray(m, dtype=int))
    return "_".join(str(int(v)) for v in m)


# ---------------------------------------------------------------------------
# Experiment bodies: cfg, outdir -> (verdicts, key_values, outputs)

def _run_orbit(cfg, outdir):
    grid = midpoint_grid(cfg["Q"])
    f = map_from_descriptor(cfg["map"])
    rep = orbit_distances(f, None, range(1, cfg["N"] + 1), cfg["n_max"],
                          grid, cfg["m_max"])
    members = rep.distances < cfg["eps"]
    density = float(np.mean(members))
    path = os.path.join(outdir, "orbit.csv")
    rep.to_csv(path)
    verdicts = {}
    if cfg["min_density"] is not None:
        verdicts["density_at_least"] = density >= cfg["min_density"]
    kv = {"density": density, "eps": cfg["eps"], **rep.key_values()}
    return verdicts, kv, [path]


def _run_weyl(cfg, outdir):
    grid = midpoint_grid(cfg["Q"])
    f = map_from_descriptor(cfg["map"])
    rep = weyl_statistic(f, cfg["m"], cfg["N"], grid, cfg["n_base"])
    path = os.path.join(outdir, f"weyl_m{_mchars(cfg['m'])}.csv")
    rep.to_csv(path)
    verdicts = {}
    kv = rep.key_values()
    if cfg["mc_pairs"]:
        est, sigma = weyl_double_integral_mc(f, cfg["m"], cfg["N"], grid,
                                             cfg["n_base"], cfg["mc_pairs"],
                                             cfg["seed"])
        verdicts["mc_within_3sigma"] = (
            abs(est - rep.limit_estimate) <= 3.0 * sigma + 1e-12)
        kv.update({"mc_estimate": est, "mc_sigma": sigma})
    if cfg["s_max"] is not None:
        verdicts["s_final_below"] = rep.limit_estimate <= cfg["s_max"]
    return verdicts, kv, [path]


def _run_atoms(cfg, outdir):
    grid = midpoint_grid(cfg["Q"])
    f = map_from_descriptor(cfg["map"])
    rep = atom_spectrum(f, grid, cfg["m"], cfg["delta"], cfg["threshold"])
    path = os.path.join(outdir, f"atoms_m{_mchars(cfg['m'])}.csv")
    rep.to_csv(path)
    return {"no_heavy_window": rep.verdict}, rep.key_values(), [path]


def _run_density(cfg, outdir):
    grid = midpoint_grid(cfg["Q"])
    f = map_from_descriptor(cfg["map"])
    rep = density_one_estimate(f, cfg["eps"], cfg["N"], cfg["n_max"], grid,
                               cfg["m_max"])
    path = os.path.join(outdir, "density.csv")
    rep.to_csv(path)
    verdicts = {}
    if cfg["min_density"] is not None:
        verdicts["density_at_least"] = rep.density >= cfg["min_density"]
    return verdicts, rep.key_values(), [path]


def _run_cantor(cfg, outdir):
    grid = midpoint_grid(cfg["Q"])
    f = map_from_descriptor({"family": "cantor_inverse_devil",
                             "params": {"depth": cfg["B"]}})
    rep = cantor_obstruction(f, cfg["m"], cfg["k_max"], grid)
    path = os.path.join(outdir, "cantor.csv")
    rep.to_csv(path)
    spread = float(np.max(rep.moduli) - np.min(rep.moduli))
    verdicts = {"constant_modulus": spread <= cfg["tol_pair"]}
    kv = {"spread": spread, **rep.key_values()}
    return verdicts, kv, [path]


def _run_decay(cfg, outdir):
    grid = midpoint_grid(cfg["Q"])
    f = map_from_descriptor({"family": "smooth_circle",
                             "params": {"eps": cfg["eps"]}})
    chars = [(n, m) for n in range(-cfg["n_abs_max"], cfg["n_abs_max"] + 1)
             for m in range(-cfg["m_abs_max"], cfg["m_abs_max"] + 1)
             if m != 0]
    rep = decay_rate(f, cfg["k_list"], chars, grid)
    path = os.path.join(outdir, "decay.csv")
    rep.to_csv(path)
    products = [float(k) * mx for k, mx in zip(rep.k_values, rep.maxima)]
    verdicts = {}
    if cfg["c_max"] is not None:
        verdicts["k_scaled_max_below"] = max(products) <= cfg["c_max"]
    kv = {"k_times_max": products, **rep.key_values()}
    return verdicts, kv, [path]


def _model_config(cfg):
    return ModelConfig(t0=cfg["t0"], alpha=tuple(cfg["alpha"]),
                       beta=tuple(cfg["beta"]), seed=cfg["seed"])


def _run_homog_asynch(cfg, outdir):
    mc = _model_config(cfg)
    grid, amap = induced_angle_grid(mc, cfg["Q"])
    verdicts, kv, outputs = {}, {"Q": cfg["Q"]}, []
    for m in cfg["chars"]:
        tag = _mchars(m)
        arep = atom_spectrum(amap, grid, m, cfg["delta"], cfg["threshold"])
        apath = os.path.join(outdir, f"atoms_m{tag}.csv")
        arep.to_csv(apath)
        wrep = weyl_statistic(amap, m, cfg["N"], grid)
        wpath = os.path.join(outdir, f"weyl_m{tag}.csv")
        wrep.to_csv(wpath)
        verdicts[f"atoms_m{tag}"] = arep.verdict
        verdicts[f"weyl_m{tag}"] = wrep.limit_estimate <= cfg["s_max"]
        kv[f"max_window_mass_m{tag}"] = arep.max_window_mass
        kv[f"S_final_m{tag}"] = wrep.limit_estimate
        outputs += [apath, wpath]
    return verdicts, kv, outputs


def _run_homog_birkhoff(cfg, outdir):
    mc = _model_config(cfg)
    avgs = birkhoff_ensemble(mc, cfg["T"], cfg["m"], cfg["n_orbits"],
                             cfg["seed"])
    bpath = os.path.join(outdir, "birkhoff.csv")
    _write_rows(bpath, ["orbit", "avg_re", "avg_im", "avg_abs"],
                [(i, _fmt(a.real), _fmt(a.imag), _fmt(abs(a)))
                 for i, a in enumerate(avgs)])
    median = float(np.median(np.abs(avgs)))
    outputs = [bpath]
    if cfg["dump_steps"]:
        rng = np.random.default_rng(cfg["seed"])
        s0 = SkewState(x=haar_sample(rng), vbar=rng.random(2))
        rows = trajectory(s0, mc, cfg["dump_steps"])
        tpath = os.path.join(outdir, "trajectory.csv")
        _write_rows(tpath, ["step", "u", "v", "theta", "vbar1", "vbar2"],
                    [(int(r[0]),) + tuple(_fmt(v) for v in r[1:])
                     for r in rows])
        outputs.append(tpath)
    verdicts = {"median_birkhoff_below": median <= cfg["median_max"]}
    kv = {"median_abs_avg": median,
          "max_abs_avg": float(np.max(np.abs(avgs))), "T": cfg["T"]}
    return verdicts, kv, outputs


def _run_homog_mixing(cfg, outdir):
    mc = _model_config(cfg)
    c0 = correlation(mc, cfg["m1"], cfg["m2"], 0, cfg["M"], cfg["seed"])
    ck = correlation(mc, cfg["m1"], cfg["m2"], cfg["k"], cfg["M"],
                     cfg["seed"])
    path = os.path.join(outdir, "mixing.csv")
    _write_rows(path, ["k", "corr_re", "corr_im", "corr_abs"],
                [(0, _fmt(c0.real), _fmt(c0.imag), _fmt(abs(c0))),
                 (cfg["k"], _fmt(ck.real), _fmt(ck.imag), _fmt(abs(ck)))])
    verdicts = {"corr_below": abs(ck) <= cfg["corr_max"]}
    kv = {"corr_abs_lag0": abs(c0), "corr_abs": abs(ck), "k": cfg["k"],
          "M": cfg["M"]}
    return verdicts, kv, [path]


def _run_monoid_selftest(cfg, outdir):
    rng = np.random.default_rng(cfg["seed"])
    grid = midpoint_grid(cfg["Q"])
    m_max = cfg["m_max"]
    lam = make_haar(grid, 1, m_max)
    errs = {"commutativity": 0.0, "associativity": 0.0, "identity": 0.0,
            "absorption": 0.0, "inverse": 0.0}
    ident = make_graph(Tabulated(np.zeros(cfg["Q"])), grid, m_max)
    for _ in range(cfg["n_triples"]):
        fs = [Tabulated(rng.random(cfg["Q"])) for _ in range(3)]
        mus = [make_graph(f, grid, m_max) for f in fs]
        ab = convolve(mus[0], mus[1])
        errs["commutativity"] = max(
            errs["commutativity"],
            float(np.max(np.abs(ab.coeff - convolve(mus[1], mus[0]).coeff))))
        errs["associativity"] = max(
            errs["associativity"],
            float(np.max(np.abs(convolve(ab, mus[2]).coeff -
                                convolve(mus[0], convolve(mus[1], mus[2])).coeff))))
        errs["identity"] = max(
            errs["identity"],
            float(np.max(np.abs(convolve(mus[0], ident).coeff - mus[0].coeff))))
        errs["absorption"] = max(
            errs["absorption"],
            float(np.max(np.abs(convolve(mus[0], lam).coeff - lam.coeff))))
        neg = Tabulated(-fs[0].values[:, 0])
        errs["inverse"] = max(
            errs["inverse"],
            float(np.max(np.abs(convolve(mus[0], make_graph(neg, grid, m_max)).coeff
                                - ident.coeff))))
    path = os.path.join(outdir, "selftest.csv")
    _write_rows(path, ["law", "max_abs_error"],
                [(law, _fmt(e)) for law, e in errs.items()])
    verdicts = {law: e <= cfg["tol"] for law, e in errs.items()}
    return verdicts, {"worst_error": max(errs.values())}, [path]


_RUNNERS = {
    "orbit": _run_orbit,
    "weyl": _run_weyl,
    "atoms": _run_atoms,
    "density": _run_density,
    "cantor": _run_cantor,
    "decay": _run_decay,
    "homog-asynch": _run_homog_asynch,
    "homog-birkhoff": _run_homog_birkhoff,
    "homog-mixing": _run_homog_mixing,
    "monoid-selftest": _run_monoid_selftest,
}


def _write_manifest(outdir, manifest):
    path = os.path.join(outdir, "run_manifest.json")
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def run(experiment: str, cfg: dict, outdir: str) -> dict:
    """Execute one experiment; returns the manifest dict."""
    os.makedirs(outdir, exist_ok=True)
    t_start = time.perf_counter()
    verdicts, key_values, outputs = _RUNNERS[experiment](cfg, outdir)
    wall = time.perf_counter() - t_start
    manifest = {
        "experiment": experiment,
        "tool_version": __version__,
        "config": cfg,
        "wall_time_s": wall,
        "verdicts": verdicts,
        "all_pass": all(verdicts.values()),
        "outputs": [os.path.basename(p) for p in outputs],
        "key_values": key_values,
    }
    _write_manifest(outdir, manifest)
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fibrot",
        description="Run one reproducible experiment and write CSV + "
                    "manifest outputs.")
    parser.add_argument("experiment", choices=sorted(_RUNNERS))
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    parser.add_argument("--out", help="output directory "
                        "(default: ./<experiment>_run)")
    parser.add_argument("overrides", nargs="*", metavar="key=value",
                        help="config overrides; values parsed as JSON when "
                             "possible")
    args = parser.parse_intermixed_args(argv)

    try:
        cfg = _resolve_config(args.experiment, args.config, args.overrides,
                              args.seed)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    outdir = args.out if args.out else f"{args.experiment}_run"
    try:
        manifest = run(args.experiment, cfg, outdir)
    except Exception as exc:  # experiment fault
        print(f"experiment fault: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1

    summary = {
        "experiment": args.experiment,
        "params": {k: v for k, v in cfg.items() if k != "seed"},
        "seed": cfg["seed"],
        "verdict": manifest["all_pass"],
        "key_values": manifest["key_values"],
    }
    print(json.dumps(summary, sort_keys=True))
    return 0 if manifest["all_pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
