"""Command-line orchestration: named experiments with reproducible outputs.

Subcommands
-----------
graph-spectrum
    Closed-graph eigenvalues, spacing statistics, surmise comparison.
scattering
    Monte Carlo ensemble (optionally calibrated to an absorption target),
    reaction-matrix histograms, autocorrelation.
analytic
    Tabulate the analytic densities, including the Ericson limits.
fit-gamma
    Estimate the absorption strength from a column of reflection data.
compare
    KS comparison of a recorded ensemble against the analytic curves.

Every command writes plain-text columnar files plus ``manifest.json``
holding the full configuration, seed, package versions, derived numbers,
and a sha256 checksum per output file, so a run can be reproduced and
verified bit-for-bit (timestamps aside).

Exit codes: 0 success, 2 configuration/input error, 3 numerical failure,
4 failed acceptance check.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .absorption import (
    AbsorptionParams,
    default_grid,
    distribution_curve,
    fit_gamma,
    mean_reflection,
)
from .ensembles import NumericalFailure, rng_stream
from .graphs import (
    GraphSpecError,
    dump_graph_spec,
    example_gse_paired,
    load_graph_spec,
    secular_spectrum,
)
from .heidelberg import (
    CalibrationError,
    autocorrelation,
    calibrate_tau_abs,
    k_matrix_variables,
    parse_run_config,
    run_ensemble,
)
from .spectral import ks_distance, nnsd, number_variance, wigner_surmise

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------


def _write_columns(path: Path, description: list[str], names: list[str], columns) -> None:
    cols = [np.asarray(c) for c in columns]
    with open(path, "w", encoding="utf-8") as fh:
        for line in description:
            fh.write(f"# {line}\n")
        fh.write("# columns: " + " ".join(names) + "\n")
        for row in zip(*cols):
            fh.write(" ".join(f"{val:.17g}" for val in row) + "\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_manifest(out: Path, experiment: str, config: dict, derived: dict, files: list[Path]) -> None:
    manifest = {
        "experiment": experiment,
        "config": config,
        "versions": {
            "gsescatter": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "derived": derived,
        "outputs": {f.name: _sha256(f) for f in files},
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _workers(args) -> int:
    if args.workers is not None:
        n = args.workers
    else:
        n = int(os.environ.get("GSESCATTER_WORKERS", "1"))
    if n < 1:
        raise ValueError("worker count must be >= 1")
    return n


def _hist_file(out: Path, name: str, samples: np.ndarray, bins: np.ndarray, what: str) -> Path:
    counts, edges = np.histogram(samples, bins=bins)
    dens = counts / max(counts.sum(), 1) / np.diff(edges)
    path = out / name
    _write_columns(
        path,
        [f"histogram of {what}", f"samples: {samples.size}"],
        ["bin_lo", "bin_hi", "density"],
        [edges[:-1], edges[1:], dens],
    )
    return path


# ---------------------------------------------------------------------------
# graph-spectrum
# ---------------------------------------------------------------------------


def cmd_graph_spectrum(args) -> int:
    out = _out_dir(args)
    if args.spec:
        spec = load_graph_spec(args.spec)
    else:
        spec = example_gse_paired()
        dump_graph_spec(spec, out / "example.graph")
    spec = spec.closed()
    spectrum = secular_spectrum(
        spec, args.kmin, args.kmax, points_per_spacing=args.points_per_spacing
    )
    unfolded = spectrum.unfolded()

    files = []
    files.append(out / "levels.txt")
    _write_columns(
        files[-1],
        ["closed-graph eigen-wavenumbers (every root, doublet partners listed separately)"],
        ["k_rad_per_m"],
        [spectrum.k_raw],
    )
    if spectrum.k_collapsed is not None:
        files.append(out / "levels_collapsed.txt")
        _write_columns(
            files[-1],
            ["one wavenumber per Kramers doublet, with its Weyl-unfolded position"],
            ["k_rad_per_m", "e_unfolded"],
            [spectrum.k_collapsed, unfolded],
        )

    hist = nnsd(unfolded, bins=40, range_max=3.0)
    gse_ref = wigner_surmise("gse", hist.centers)
    gue_ref = wigner_surmise("gue", hist.centers)
    files.append(out / "nnsd.txt")
    _write_columns(
        files[-1],
        ["nearest-neighbour spacing histogram of the unfolded spectrum",
         "reference columns: symplectic and unitary surmises"],
        ["s", "density", "gse_surmise", "gue_surmise"],
        [hist.centers, hist.density, gse_ref.y, gue_ref.y],
    )
    widths = hist.widths
    l2_gse = float(np.sum((hist.density - gse_ref.y) ** 2 * widths))
    l2_gue = float(np.sum((hist.density - gue_ref.y) ** 2 * widths))

    sigma2 = number_variance(unfolded, rng=rng_stream(args.seed, 0))
    files.append(out / "number_variance.txt")
    _write_columns(
        files[-1],
        ["count variance in sliding windows of the unfolded spectrum"],
        ["window_length", "variance"],
        [sigma2.x, sigma2.y],
    )

    _write_manifest(
        out,
        "graph-spectrum",
        {
            "spec": str(args.spec) if args.spec else "shipped example",
            "kmin": args.kmin,
            "kmax": args.kmax,
            "points_per_spacing": args.points_per_spacing,
            "seed": args.seed,
            "workers": _workers(args),
        },
        {
            "n_roots": int(spectrum.k_raw.size),
            "n_doublets": spectrum.n_doublets,
            "max_doublet_splitting": spectrum.max_splitting,
            "total_length_m": spectrum.total_length,
            "unfolded_mean_spacing": float(np.diff(unfolded).mean()),
            "nnsd_l2_vs_gse": l2_gse,
            "nnsd_l2_vs_gue": l2_gue,
        },
        files,
    )
    print(
        f"graph-spectrum: {spectrum.k_raw.size} roots "
        f"({spectrum.n_doublets} doublets), L2 vs GSE {l2_gse:.4f} "
        f"vs GUE {l2_gue:.4f} -> {out}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# scattering
# ---------------------------------------------------------------------------


def cmd_scattering(args) -> int:
    out = _out_dir(args)
    config = parse_run_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.gamma is not None:
        config = replace(config, gamma=args.gamma, tau_abs=None)
    if args.tau_abs is not None:
        config = replace(config, tau_abs=args.tau_abs)

    derived: dict = {}
    if config.tau_abs is None:
        if config.gamma is None:
            print("config error: set either gamma or tau_abs", file=sys.stderr)
            return EXIT_CONFIG
        cal = calibrate_tau_abs(config.gamma, config)
        config = replace(config, tau_abs=cal.tau_abs)
        derived["calibration"] = {
            "tau_abs": cal.tau_abs,
            "t_fictitious": cal.t_fictitious,
            "target_mean_reflection": cal.target_mean,
            "achieved_mean_reflection": cal.achieved_mean,
            "full_runs": cal.n_full_runs,
        }

    ens = run_ensemble(config)
    refl = ens.reflection
    u, v, x = ens.variables()
    files = []

    files.append(out / "records.txt")
    _write_columns(
        files[-1],
        ["scalar scattering amplitude per (realization, energy) record",
         "derived reaction-matrix variables included per record"],
        ["realization", "energy", "re_s", "im_s", "reflection", "u", "v", "x"],
        [ens.realization, ens.energy, ens.s.real, ens.s.imag, refl, u, v, x],
    )

    mean_r = float(refl.mean())
    derived["mean_reflection"] = mean_r
    derived["kramers_defect"] = ens.kramers_defect
    derived["cross_coupling"] = ens.cross_coupling
    derived["n_records"] = ens.n_records
    derived["n_failures"] = ens.n_failures

    r_scaled = refl / mean_r
    amp = np.sqrt(refl)
    amp_scaled = amp / amp.mean()
    files.append(_hist_file(out, "hist_reflection_scaled.txt", r_scaled,
                            np.linspace(0, max(6.0, r_scaled.max()), 61),
                            "reflection coefficient rescaled to unit mean"))
    files.append(_hist_file(out, "hist_amplitude_scaled.txt", amp_scaled,
                            np.linspace(0, max(4.0, amp_scaled.max()), 61),
                            "reflection amplitude rescaled to unit mean"))
    files.append(_hist_file(out, "hist_u.txt", u,
                            np.linspace(np.quantile(u, 0.001), np.quantile(u, 0.999), 61),
                            "u = Re K"))
    v_pos = v[v > 0]
    files.append(_hist_file(out, "hist_v.txt", v_pos,
                            np.geomspace(np.quantile(v_pos, 0.001), np.quantile(v_pos, 0.999), 61),
                            "v = -Im K (log-spaced bins)"))

    if config.n_energies > 1:
        corr = autocorrelation(ens)
        files.append(out / "autocorrelation.txt")
        _write_columns(
            files[-1],
            ["normalized S autocorrelation along the energy axis",
             "offsets in units of the mean level spacing"],
            ["eps", "abs_c", "re_c", "im_c", "stderr"],
            [corr.x, np.abs(corr.y), corr.y.real, corr.y.imag, corr.err],
        )

    if config.gamma is not None:
        params = AbsorptionParams(config.gamma, config.ensemble)
        ks = {}
        curve = distribution_curve("R", params)
        ks["reflection"] = ks_distance(refl, curve.x, curve.density)
        curve = distribution_curve("u", params)
        ks["u"] = ks_distance(u, curve.x, curve.density)
        curve = distribution_curve("v", params)
        ks["v"] = ks_distance(v_pos, curve.x, curve.density)
        ericson = distribution_curve("R", "ericson")
        ks["reflection_scaled_vs_ericson"] = ks_distance(r_scaled, ericson.x, ericson.density)
        derived["ks_vs_analytic"] = ks

    _write_manifest(
        out,
        "scattering",
        {**config.to_dict(), "workers": _workers(args)},
        derived,
        files,
    )
    ks_note = ""
    if "ks_vs_analytic" in derived:
        ks_note = "  KS: " + " ".join(
            f"{k}={val:.4f}" for k, val in derived["ks_vs_analytic"].items()
        )
    print(f"scattering: {ens.n_records} records, <R> = {mean_r:.4f}{ks_note} -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# analytic
# ---------------------------------------------------------------------------


def cmd_analytic(args) -> int:
    out = _out_dir(args)
    files = []
    derived: dict = {"normalization": {}}
    worst = 0.0

    if args.ericson:
        if args.variable not in ("R", "r"):
            print("config error: Ericson limits exist for R and r only", file=sys.stderr)
            return EXIT_CONFIG
        curve = distribution_curve(args.variable, "ericson")
        name = f"analytic_{args.variable}_ericson.txt"
        _write_columns(
            out / name,
            [f"strong-absorption limit of the rescaled {args.variable} density"],
            [args.variable, "density"],
            [curve.x, curve.density],
        )
        files.append(out / name)
        mass = curve.mass()
        derived["normalization"][name] = mass
        worst = max(worst, abs(mass - 1.0))
    else:
        gammas = [float(g) for g in args.gamma.split(",")]
        classes = [c.strip().lower() for c in args.sym.split(",")]
        curves = {}
        for g in gammas:
            for sym in classes:
                params = AbsorptionParams(g, sym)
                curve = distribution_curve(args.variable, params)
                name = f"analytic_{args.variable}_gamma{g:g}_{sym}.txt"
                mass = curve.mass()
                _write_columns(
                    out / name,
                    [
                        f"density of {args.variable} at absorption strength {g:g}, "
                        f"{sym} symmetry class",
                        f"trapezoidal normalization on this grid: {mass:.8f}",
                    ],
                    [args.variable, "density"],
                    [curve.x, curve.density],
                )
                files.append(out / name)
                curves[(g, sym)] = curve
                derived["normalization"][name] = mass
                worst = max(worst, abs(mass - 1.0))
        if len(classes) == 2:
            sup = {}
            for g in gammas:
                a, b = curves[(g, classes[0])], curves[(g, classes[1])]
                sup[f"gamma={g:g}"] = float(np.max(np.abs(a.density - b.density)))
            derived["class_sup_distance"] = sup

    derived["worst_normalization_error"] = worst
    _write_manifest(
        out,
        "analytic",
        {
            "variable": args.variable,
            "gamma": args.gamma,
            "sym": args.sym,
            "ericson": args.ericson,
            "workers": _workers(args),
        },
        derived,
        files,
    )
    if worst > 1e-3:
        print(f"normalization check failed: worst error {worst:.2e}", file=sys.stderr)
        return EXIT_CHECK
    print(f"analytic: {len(files)} curve(s), worst normalization error {worst:.1e} -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit-gamma
# ---------------------------------------------------------------------------


def cmd_fit_gamma(args) -> int:
    try:
        samples = np.loadtxt(args.samples, ndmin=1)
    except OSError as exc:
        print(f"cannot read samples: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if samples.ndim > 1:
        samples = samples[:, 0]
    if samples.size == 0:
        print("no samples in file", file=sys.stderr)
        return EXIT_CONFIG
    fit = fit_gamma(
        samples,
        variable=args.variable,
        symmetry=args.sym,
        n_boot=args.boot,
        rng=rng_stream(args.seed, 0),
    )
    print(
        f"gamma = {fit.gamma:.4f} +- {fit.gamma_err:.4f} "
        f"({fit.symmetry}, mean-reflection inversion, {fit.n_samples} samples, "
        f"{fit.n_boot} bootstrap resamples)"
    )
    if args.out:
        out = _out_dir(args)
        _write_manifest(
            out,
            "fit-gamma",
            {
                "samples": str(args.samples),
                "variable": args.variable,
                "sym": args.sym,
                "boot": args.boot,
                "seed": args.seed,
                "workers": _workers(args),
            },
            {
                "gamma": fit.gamma,
                "gamma_err": fit.gamma_err,
                "sample_mean": fit.sample_mean,
                "n_samples": fit.n_samples,
            },
            [],
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def cmd_compare(args) -> int:
    out = _out_dir(args)
    try:
        data = np.loadtxt(args.records)
    except OSError as exc:
        print(f"cannot read records: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if data.ndim != 2 or data.shape[1] < 4:
        print("records file lacks the expected columns", file=sys.stderr)
        return EXIT_CONFIG
    s = data[:, 2] + 1j * data[:, 3]
    refl = np.abs(s) ** 2
    u, v, _ = k_matrix_variables(s)
    params = AbsorptionParams(args.gamma, args.sym)

    ks = {}
    curve = distribution_curve("R", params)
    ks["reflection"] = ks_distance(refl, curve.x, curve.density)
    curve = distribution_curve("r", params)
    ks["amplitude"] = ks_distance(np.sqrt(refl), curve.x, curve.density)
    curve = distribution_curve("u", params)
    ks["u"] = ks_distance(u, curve.x, curve.density)
    curve = distribution_curve("v", params)
    ks["v"] = ks_distance(v[v > 0], curve.x, curve.density)
    ericson = distribution_curve("R", "ericson")
    ks["reflection_scaled_vs_ericson"] = ks_distance(
        refl / refl.mean(), ericson.x, ericson.density
    )
    mean_dev = abs(refl.mean() - mean_reflection(params))

    path = out / "comparison.txt"
    _write_columns(
        path,
        [f"KS distances vs analytic curves at gamma={args.gamma:g} ({args.sym})"],
        ["ks_" + k for k in ks],
        [[val] for val in ks.values()],
    )
    _write_manifest(
        out,
        "compare",
        {
            "records": str(args.records),
            "gamma": args.gamma,
            "sym": args.sym,
            "ks_limit": args.ks_limit,
            "workers": _workers(args),
        },
        {"ks": ks, "mean_reflection_deviation": mean_dev, "n_records": int(refl.size)},
        [path],
    )
    summary = " ".join(f"{k}={val:.4f}" for k, val in ks.items())
    print(f"compare: {summary} -> {out}")
    if args.ks_limit is not None:
        primary = [ks["reflection"], ks["u"], ks["v"]]
        if any(val > args.ks_limit for val in primary):
            print(
                f"check failed: KS above limit {args.ks_limit}", file=sys.stderr
            )
            return EXIT_CHECK
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsescatter",
        description="chaotic-scattering experiments: graph spectra, Monte Carlo "
        "ensembles, analytic absorption curves",
    )
    parser.add_argument("--workers", type=int, default=None,
                        help="worker count (env GSESCATTER_WORKERS; current runners are serial)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph-spectrum", help="closed-graph eigenvalues and spacing statistics")
    p.add_argument("--spec", default=None, help="graph spec file (default: shipped example)")
    p.add_argument("--kmin", type=float, default=0.5)
    p.add_argument("--kmax", type=float, default=250.0)
    p.add_argument("--points-per-spacing", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out-graph")
    p.set_defaults(func=cmd_graph_spectrum)

    p = sub.add_parser("scattering", help="Monte Carlo ensemble with absorption")
    p.add_argument("--config", required=True, help="run-config file")
    p.add_argument("--gamma", type=float, default=None, help="override: calibrate to this target")
    p.add_argument("--tau-abs", dest="tau_abs", type=float, default=None,
                   help="override: set absorption directly")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="out-scattering")
    p.set_defaults(func=cmd_scattering)

    p = sub.add_parser("analytic", help="tabulate analytic densities")
    p.add_argument("--variable", required=True, choices=["x", "R", "r", "v", "u"])
    p.add_argument("--gamma", default="5.7", help="comma-separated absorption strengths")
    p.add_argument("--sym", default="gse", help="symmetry class(es), e.g. 'gse,gue'")
    p.add_argument("--ericson", action="store_true", help="strong-absorption limit instead")
    p.add_argument("--out", default="out-analytic")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("fit-gamma", help="absorption strength from reflection data")
    p.add_argument("--samples", required=True, help="text file, one value per line")
    p.add_argument("--variable", default="R", choices=["R", "r"])
    p.add_argument("--sym", default="gse", choices=["gse", "gue"])
    p.add_argument("--boot", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit_gamma)

    p = sub.add_parser("compare", help="KS comparison of recorded ensemble vs analytic curves")
    p.add_argument("--records", required=True, help="records.txt from a scattering run")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--sym", default="gse", choices=["gse", "gue"])
    p.add_argument("--ks-limit", dest="ks_limit", type=float, default=None,
                   help="fail (exit 4) when a primary KS exceeds this")
    p.add_argument("--out", default="out-compare")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _workers(args)  # validate before doing any work
        return args.func(args)
    except (GraphSpecError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CalibrationError, NumericalFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
