"""Command-line entry point.

    deepstrong <subcommand> [--config cfg.json] [--out DIR] [--threads N] [--seed N]

Exit codes: 0 success, 1 invalid usage or configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config_text, parse_config
from .coupling import WeightFileError
from .dynamics import (PulseTruncationError, StepSizeError, amplitude_spectrum, calibrate_kappa,
                       far_field, integrate_eom, sweep_cyclotron)
from .gaussian import CONVENTION, GaussianModeState, fock_probabilities, wigner_grid
from .hopfield import (classify_polaritons, ground_state_report, quadrature_covariance,
                       single_pair, solve)
from .oracle import from_mode_system, ground_state, observables
from .output import metadata, write_csv, write_json

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2
SUBCOMMANDS = ("dispersion", "eigen", "ground-state", "wigner", "timedomain", "sweep",
               "oracle-check", "paper-regression")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _system(cfg: RunConfig, all_cavity_modes: bool = False):
    if cfg.model == "single_pair":
        return single_pair(cfg.eta, cfg.nu_cavity, cfg.nu_matter)
    modes = cfg.device.oscillators.j if all_cavity_modes else None
    return cfg.device.mode_system(cfg.nu_c, cavity_modes=modes)


def _need_device(cfg: RunConfig, cmd: str):
    if cfg.model != "device":
        raise UsageError(f"'{cmd}' needs model 'device'")


def cmd_dispersion(cfg: RunConfig, out: Path, args) -> list[Path]:
    _need_device(cfg, "dispersion")
    ladder = cfg.device.ladder(cfg.nu_c)
    meta = metadata(cfg.config_hash, nu_c_THz=cfg.nu_c, period_um=ladder.period)
    rows = [(e.alpha, e.q_x, e.nu_plasma, e.nu_mp, e.bright, e.landau_damped)
            for e in ladder.entries]
    return [write_csv(out / "dispersion.csv", meta,
                      ("alpha", "q_x_per_um", "nu_plasma_THz", "nu_mp_THz", "bright",
                       "landau_damped"), rows)]


def cmd_eigen(cfg: RunConfig, out: Path, args) -> list[Path]:
    system = _system(cfg)
    sol = solve(system)
    cls = classify_polaritons(sol)
    modes = []
    photonic = np.sum(abs(sol.w) ** 2 + abs(sol.y) ** 2, axis=1)
    antires = np.sum(abs(sol.y) ** 2, axis=1) + np.sum(abs(sol.z) ** 2, axis=1)
    for k, (kind, j, beta) in enumerate(cls.labels):
        modes.append({"index": k, "label": kind, "j": j, "beta": beta,
                      "nu_THz": sol.frequencies[k], "photonic_weight": photonic[k],
                      "antiresonant_weight": antires[k]})
    counts = {str(j): dict(zip(("dark", "LP", "UP"), cls.counts(j)))
              for j in system.cavity_labels}
    payload = {"model": cfg.model, "nu_c_THz": cfg.nu_c if cfg.model == "device" else None,
               "cavity_modes": list(system.cavity_labels),
               "matter_modes": list(system.matter_labels),
               "counts": counts, "modes": modes}
    return [write_json(out / "eigen.json", metadata(cfg.config_hash), payload)]


def cmd_ground_state(cfg: RunConfig, out: Path, args) -> list[Path]:
    rep = ground_state_report(solve(_system(cfg)))
    payload = {"model": cfg.model, "N": rep.N_total}
    payload.update(rep.to_dict())
    return [write_json(out / "ground_state.json", metadata(cfg.config_hash), payload)]


def cmd_wigner(cfg: RunConfig, out: Path, args) -> list[Path]:
    system = _system(cfg)
    if cfg.wigner_mode not in system.cavity_labels:
        raise UsageError(f"wigner.cavity_mode {cfg.wigner_mode} is not a coupled cavity mode")
    col = system.cavity_labels.index(cfg.wigner_mode)
    cov = quadrature_covariance(solve(system), col)
    state = GaussianModeState.from_covariance(cov)
    x, p, W = wigner_grid(state, cfg.x_range, cfg.p_range, cfg.resolution)
    fock = fock_probabilities(state, cfg.fock_n_max)
    meta = metadata(cfg.config_hash, convention=CONVENTION, cavity_mode=cfg.wigner_mode)
    rows = ((x[i], p[k], W[i, k]) for i in range(len(x)) for k in range(len(p)))
    csv_path = write_csv(out / "wigner.csv", meta, ("x", "p", "W"), rows)
    side = {"cavity_mode": cfg.wigner_mode,
            "covariance": {"var_X": state.var_x, "var_P": state.var_p, "cov_XP": state.cov_xp},
            "det": state.det, "purity": state.purity,
            "mean_photon_number": state.mean_photon_number,
            "min_variance": cov.min_variance,
            "fock_probabilities": fock.probabilities, "fock_mean": fock.mean,
            "grid": {"x_range": list(cfg.x_range), "p_range": list(cfg.p_range),
                     "resolution": cfg.resolution, "layout": "row-major, x outer, p inner"}}
    return [csv_path, write_json(out / "wigner.json", meta, side)]


def _default_dt(system, t_end: float) -> float:
    nu_max = float(np.max(solve(system).frequencies))
    return t_end / math.ceil(t_end * 50.0 * nu_max)


def cmd_timedomain(cfg: RunConfig, out: Path, args) -> list[Path]:
    system = _system(cfg, all_cavity_modes=True)
    dt = cfg.dt or _default_dt(system, cfg.t_end)
    if cfg.model == "device":
        osc = cfg.device.oscillators
        kappa = cfg.kappa_rad
        if kappa is None:
            kappa = calibrate_kappa(osc, cfg.pulse, dt, cfg.t_end, cfg.dip_depth)
        tr = integrate_eom(system, osc, cfg.gamma_mp, cfg.pulse, dt, cfg.t_end)
    else:
        kappa = cfg.kappa_rad if cfg.kappa_rad is not None else 1.0
        tr = integrate_eom(system, None, cfg.gamma_mp, cfg.pulse, dt, cfg.t_end,
                           cavity_damping=cfg.gamma_mp)
    ff = far_field(tr, kappa)
    meta = metadata(cfg.config_hash, dt_ps=dt, kappa_rad=kappa, drive_rule=tr.meta["drive_rule"],
                    nu_c_THz=cfg.nu_c if cfg.model == "device" else "n/a")
    header = ["t_ps", "drive", "E_out"]
    cols = [tr.t, tr.drive, ff.e_out]
    for c, j in enumerate(system.cavity_labels):
        header += [f"re_a{j}", f"im_a{j}"]
        cols += [tr.alpha[:, c].real, tr.alpha[:, c].imag]
    for c, a in enumerate(system.matter_labels):
        header += [f"re_b{a}", f"im_b{a}"]
        cols += [tr.beta[:, c].real, tr.beta[:, c].imag]
    stride = cfg.output_stride
    data = np.column_stack(cols)[::stride]
    paths = [write_csv(out / "timedomain.csv", meta, header, data)]

    specs = [amplitude_spectrum(tr.alpha[:, c].real, tr.dt) for c in range(system.n_cavity)]
    sel = ff.nu <= max(cfg.spectral_grid[-1], 1.0)
    smeta = dict(meta, fft_length=2 * (len(ff.nu) - 1), bin_width_THz=ff.bin_width,
                 gaps="T = nan where the drive spectrum is below 1e-3 of its peak")
    sheader = ["nu_THz", "transmission"] + [f"abs_F_re_a{j}" for j in system.cavity_labels]
    scols = [ff.nu[sel], ff.transmission[sel]] + [s.amplitude[sel] for s in specs]
    paths.append(write_csv(out / "spectrum.csv", smeta, sheader, np.column_stack(scols)))
    return paths


def cmd_sweep(cfg: RunConfig, out: Path, args) -> list[Path]:
    _need_device(cfg, "sweep")
    grid = cfg.nu_c_grid if cfg.nu_c_grid is not None else np.array([cfg.nu_c])
    tm = sweep_cyclotron(cfg.device, grid, cfg.spectral_grid, cfg.pulse, cfg.dt, cfg.t_end,
                         cfg.gamma_mp, cfg.kappa_rad, cfg.dip_depth, threads=args.threads)
    meta = metadata(cfg.config_hash, kappa_rad=tm.kappa_rad, bin_width_THz=tm.bin_width,
                    layout="rows nu_c (first column), columns spectral grid (header)")
    rows = (np.concatenate([[nc], tm.transmission[i]]) for i, nc in enumerate(tm.nu_c))
    header = ["nu_c_THz"] + ["%.12g" % v for v in tm.nu]
    return [write_csv(out / "sweep_map.csv", meta, header, rows),
            write_json(out / "sweep_overlay.json", meta, {"columns": list(tm.overlays)})]


def cmd_oracle_check(cfg: RunConfig, out: Path, args) -> list[Path]:
    rows = [(e, cfg.oracle_n_max, 1e-3) for e in cfg.oracle_etas]
    rows.append((cfg.oracle_strong_eta, cfg.oracle_n_max_strong, 1e-2))
    results, ok_all = [], True
    for eta, n_max, tol in rows:
        s = single_pair(eta)
        sol = solve(s)
        cov = quadrature_covariance(sol)
        obs = observables(ground_state(from_mode_system(s, n_max)))
        # compare well inside the oracle cutoff, where truncation cannot bias it
        n_cmp = n_max // 2
        fock_g = fock_probabilities(GaussianModeState.from_covariance(cov), n_max).probabilities
        fock_g, fock_o = fock_g[:n_cmp + 1], obs["fock"][0][:n_cmp + 1]
        diffs = {
            "N": abs(cov.photon_number - obs["populations"][0]),
            "M": abs(float(np.sum(abs(sol.z) ** 2)) - obs["populations"][1]),
            "var_X": abs(cov.var_x - obs["var_x"][0]),
            "var_P": abs(cov.var_p - obs["var_p"][0]),
            "fock": float(np.max(abs(fock_g - fock_o))),
        }
        passed = all(v < tol for v in diffs.values())
        ok_all &= passed
        results.append({"eta": eta, "n_max": n_max, "tolerance": tol, "passed": passed,
                        "abs_differences": diffs,
                        "odd_parity_weight": obs["odd_parity_weight"]})
    path = write_json(out / "oracle_check.json", metadata(cfg.config_hash),
                      {"passed": ok_all, "cases": results})
    if not ok_all:
        print("oracle-check: disagreement beyond tolerance", file=sys.stderr)
    return [path]


def cmd_paper_regression(cfg: RunConfig, out: Path, args) -> list[Path]:
    from .regression import format_table, run_all
    results = run_all()
    for r in results:
        print(r.line())
    table = format_table(results)
    path = out / "paper_regression.tsv"
    path.parent.mkdir(parents=True, exist_ok=True)
    head = "".join(f"# {k}: {v}\n" for k, v in metadata(cfg.config_hash).items())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(head + table)
    args.regression_failed = not all(r.passed for r in results)
    return [path]


COMMANDS = {
    "dispersion": cmd_dispersion,
    "eigen": cmd_eigen,
    "ground-state": cmd_ground_state,
    "wigner": cmd_wigner,
    "timedomain": cmd_timedomain,
    "sweep": cmd_sweep,
    "oracle-check": cmd_oracle_check,
    "paper-regression": cmd_paper_regression,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--out", type=Path, help="output directory (overrides the config)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("--seed", type=int, default=0,
                        help="reserved; every algorithm is deterministic")
    ap = _Parser(prog="deepstrong", description="Multi-mode Hopfield polariton toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.required = True
    helps = {
        "dispersion": "magnetoplasmon ladder as CSV",
        "eigen": "polariton frequencies and labels as JSON",
        "ground-state": "virtual populations and equivalent couplings as JSON",
        "wigner": "Wigner grid (CSV) and Fock statistics (JSON) of one cavity mode",
        "timedomain": "driven mean-field trace and transmission spectrum",
        "sweep": "transmission map over cyclotron frequencies",
        "oracle-check": "compare Bogoliubov results with exact diagonalisation",
        "paper-regression": "run every acceptance check and print a table",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "paper-regression":
            p.add_argument("--strict", action="store_true",
                           help="exit 2 when any check fails")
    return ap


def _load(args) -> RunConfig:
    if args.config is None:
        text = json.dumps({"schema_version": 1})
        cfg = load_config_text(text, "<defaults>")
        cfg.config_hash = hashlib.sha256(b"").hexdigest()
        return cfg
    return parse_config(args.config)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("deepstrong: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = _load(args)
        out = args.out if args.out is not None else Path(cfg.out_dir)
        paths = COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, StepSizeError, PulseTruncationError, WeightFileError, KeyError) as exc:
        print(f"deepstrong: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"deepstrong: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for p in paths:
        print(p)
    if getattr(args, "strict", False) and getattr(args, "regression_failed", False):
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
