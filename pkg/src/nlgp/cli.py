"""Command line entry point: ``nlgp simulate|classify-kernel|check-exponents|delta-limit``.

Exit codes: 0 success, 1 config/IO/parse error, 2 a requested check failed,
3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from nlgp import __version__, diagnostics, dynamics, exponents, kernels, report
from nlgp.config import ConfigError, ScenarioConfig, git_blob_hash, load_config, parse_kernel

log = logging.getLogger("nlgp")

EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED, EXIT_BLOWUP = 0, 1, 2, 3
DEFAULT_CONSERVATION_TOL = 1e-6


def _input_hashes(cfg: ScenarioConfig, raw: bytes, config_path: Path) -> dict:
    files = {config_path.name: git_blob_hash(raw)}
    for path in cfg.referenced_files():
        files[path.name] = git_blob_hash(path.read_bytes())
    combined = git_blob_hash("".join(f"{k}:{v}\n" for k, v in files.items()).encode())
    return {"algorithm": "git-blob-sha1", "files": files, "combined": combined}


def _kernel_summary(spec, mult) -> dict:
    cls = kernels.classify(mult)
    out = {
        "spec": repr(spec),
        "classification": cls.kind.value,
        "min_value": cls.min_value,
        "sigma_min": cls.sigma_min,
        "max_abs": mult.max_abs,
        "w_hat_0": mult.zero_value,
    }
    try:
        out["lambda2"] = kernels.normalize_physical(spec, mult.grid)[1]
    except kernels.NotNormalizableError:
        out["lambda2"] = None
    return out


def _conservation_check(name: str, drifts: dict, abs_drifts: dict, keys, tol: float) -> dict:
    # relative drift is meaningless when the reference value is zero, so a
    # quantity also passes when its absolute change is below tol
    worst_rel = max(drifts[k] for k in keys)
    worst_abs = max(abs_drifts[k] for k in keys)
    return {
        "name": name,
        "tol": tol,
        "max_relative_drift": worst_rel,
        "max_absolute_drift": worst_abs,
        "satisfied": bool(worst_rel <= tol or worst_abs <= tol),
    }


def _absolute_drifts(records) -> dict:
    def span(vals):
        vals = np.asarray(vals, dtype=float)
        return float(np.max(np.abs(vals - vals[0])))

    out = {"energy": span([r.e_total for r in records])}
    for j in range(len(records[0].momentum)):
        out[f"momentum_{j}"] = span([r.momentum[j] for r in records])
    out["mass_total"] = span([r.mass_total for r in records])
    return out


def _run_checks(cfg, records, e0, mult, background, state0) -> tuple[list[dict], float | None]:
    results = []
    linear_C = None
    drifts = diagnostics.conservation_report(records) if len(records) >= 2 else {}
    abs_drifts = _absolute_drifts(records) if len(records) >= 2 else {}
    for check in cfg.checks:
        name, params = check.name, dict(check.params)
        if name in ("energy_drift", "momentum", "mass"):
            keys = {
                "energy_drift": ["energy"],
                "momentum": [k for k in drifts if k.startswith("momentum_")],
                "mass": ["mass_total"],
            }[name]
            results.append(
                _conservation_check(name, drifts, abs_drifts, keys, params.get("tol", DEFAULT_CONSERVATION_TOL))
            )
        elif name == "linear_growth":
            try:
                rep = diagnostics.check_linear_growth(records, e0, mult, background)
            except diagnostics.BoundNotApplicableError as exc:
                results.append({"name": name, "satisfied": False, "not_applicable": str(exc)})
                continue
            linear_C = rep.constant_C
            results.append({"name": name, **rep.as_dict()})
        elif name == "exponential_growth":
            if "c1" in params and "c2" in params:
                c1, c2, protocol = params["c1"], params["c2"], "given"
            else:
                c1 = params.get("c1", 2.0)
                c2 = params.get("c2", 2.0 * diagnostics.fit_exponential_rate(records))
                protocol = "fit-then-verify"
            rep = diagnostics.check_exponential_growth(records, c1, c2)
            results.append({"name": name, "protocol": protocol, **rep.as_dict()})
        elif name == "grad_bound":
            if not kernels.classify(mult).positive_definite:
                results.append(
                    {"name": name, "satisfied": False, "not_applicable": "gradient bound needs W_hat >= 0"}
                )
                continue
            rep = diagnostics.check_gradient_bound(records, e0, state0)
            results.append({"name": name, **rep.as_dict()})
    return results, linear_C


def _density_growth(records) -> dict:
    dev = [r.max_density_deviation for r in records]
    if not dev:
        return {"initial": None, "final": None, "max": None, "growth_factor": None}
    initial = dev[0]
    peak = max(dev)
    return {
        "initial": initial,
        "final": dev[-1],
        "max": peak,
        "growth_factor": peak / initial if initial > 0 else None,
    }


def cmd_simulate(config_path, out_dir, plots: bool = True) -> int:
    config_path = Path(config_path)
    try:
        cfg, raw = load_config(config_path)
        grid = cfg.build_grid()
        spec = cfg.build_kernel()
        mult = kernels.sample_multiplier(spec, grid)
        background = cfg.build_background(grid)
        w0 = cfg.build_w0(grid)
        integ = cfg.integrator.build()
        integ.validate(grid)
        windows = cfg.windows()
        state0 = dynamics.make_state(grid, background, w0)
        diagnostics.mass(state0, windows)
        hashes = _input_hashes(cfg, raw, config_path)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    def recorder(s):
        return diagnostics.measure(s, mult, windows)

    blow_up_time = None
    try:
        traj = dynamics.evolve(state0, mult, integ, recorder)
        records = traj.records
        steps = traj.steps
    except dynamics.BlowUpError as exc:
        records = exc.records
        blow_up_time = exc.time
        steps = None
        log.warning("blow-up at t=%g", exc.time)

    # a record with non-finite entries is itself a blow-up marker
    finite = [r for r in records if r.finite]
    if len(finite) < len(records):
        blow_up_time = blow_up_time if blow_up_time is not None else records[len(finite)].t
        records = finite

    e0 = records[0].e_total if records else None
    summary = {
        "tool": {"name": "nlgp", "version": __version__},
        "schema_version": cfg.schema_version,
        "name": cfg.name or config_path.stem,
        report.TIMESTAMP_FIELD: report.utc_timestamp(),
        "input_hashes": hashes,
        "config": cfg.model_dump(mode="json"),
        "grid": {"dim": grid.dim, "n": list(grid.n), "L": list(grid.L), "spacing": list(grid.spacing)},
        "kernel": _kernel_summary(spec, mult),
        "steps": steps,
        "records": len(records),
        "E0": e0,
        "max_density_deviation": _density_growth(records),
    }

    cols = report.write_trajectory_csv(out / "trajectory.csv", records, grid.dim)
    summary["csv_columns"] = cols

    if blow_up_time is not None:
        summary.update(
            status="blow_up",
            exit_code=EXIT_BLOWUP,
            blow_up={"time": blow_up_time, "last_finite_record": records[-1].t if records else None},
            outcome=f"numerical blow-up at t = {blow_up_time:.6g}",
            checks=[],
            drifts=None,
        )
        report.write_summary(out / "summary.json", summary)
        return EXIT_BLOWUP

    checks, linear_C = _run_checks(cfg, records, e0, mult, background, state0)
    summary["drifts"] = diagnostics.conservation_report(records) if len(records) >= 2 else None
    summary["checks"] = checks
    failed = [c["name"] for c in checks if not c["satisfied"]]
    growth = summary["max_density_deviation"]
    if failed:
        summary.update(status="check_failed", exit_code=EXIT_CHECK_FAILED, failed_checks=failed)
        summary["outcome"] = "failed checks: " + ", ".join(failed)
    else:
        summary.update(status="ok", exit_code=EXIT_OK, failed_checks=[])
        summary["outcome"] = (
            "completed without blow-up; max |1-|u|^2| went from "
            f"{growth['initial']:.6g} to a peak of {growth['max']:.6g}"
        )
    if plots:
        from nlgp.plotting import plot_trajectory

        plot_trajectory(records, out, linear_C, title=summary["name"])
        summary["figures"] = ["trajectory.png"]
    report.write_summary(out / "summary.json", summary)
    return summary["exit_code"]


def cmd_classify_kernel(kernel_json: str, dim: int, n: int, L: float, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        spec = parse_kernel(kernel_json)
        from nlgp.grid import make_grid

        grid = make_grid(dim, [n] * dim, [L] * dim)
        mult = kernels.sample_multiplier(spec, grid)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    info = _kernel_summary(spec, mult)
    print(f"kernel:          {info['spec']}", file=stream)
    print(f"grid:            dim={dim} n={n} L={L:g}", file=stream)
    print(f"classification:  {info['classification']}", file=stream)
    if info["sigma_min"] is not None:
        print(f"sigma_min:       {info['sigma_min']:.10g}", file=stream)
    else:
        print(f"min_value:       {info['min_value']:.10g}", file=stream)
    print(f"max_abs:         {info['max_abs']:.10g}", file=stream)
    print(f"w_hat_0:         {info['w_hat_0']:.10g}", file=stream)
    if info["lambda2"] is not None:
        print(f"lambda2:         {info['lambda2']:.10g}", file=stream)
    else:
        print("lambda2:         not normalizable (W_hat(0) <= 0)", file=stream)
    return EXIT_OK


def _parse_tuple(text: str) -> tuple[exponents.ExponentTuple, int]:
    path = Path(text)
    if path.is_file():
        text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("exponent tuple must be a JSON object with N, p, q and optional s")
    unknown = set(data) - {"N", "p", "q", "s"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    try:
        N = data["N"]
        if not isinstance(N, int) or isinstance(N, bool):
            raise ConfigError("N must be an integer")
        if "s" in data:
            t = exponents.ExponentTuple.from_values(data["p"], data["q"], data["s"])
        else:
            t = exponents.ExponentTuple.completed(data["p"], data["q"])
    except KeyError as exc:
        raise ConfigError(f"missing key {exc.args[0]!r}") from exc
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc
    return t, N


def _print_tuple(t: exponents.ExponentTuple, stream) -> None:
    s = t.as_strings()
    print("p = (" + ", ".join(s["p"]) + ")", file=stream)
    print("q = (" + ", ".join(s["q"]) + ")", file=stream)
    print("s = (" + ", ".join(s["s"]) + ")", file=stream)


def cmd_check_exponents(tuple_json: str | None, N=None, rbar=None, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        if tuple_json == "construct":
            if N is None or rbar is None:
                raise ConfigError("construct mode needs --N and --rbar")
            t = exponents.construct_for_dimension(int(N), Fraction(str(rbar)))
            print(f"constructed tuple for N={N}, rbar={Fraction(str(rbar))}:", file=stream)
            _print_tuple(t, stream)
        else:
            if tuple_json is None:
                raise ConfigError("need a tuple (JSON or file) or 'construct'")
            t, N = _parse_tuple(tuple_json)
        rep = exponents.verify_wn(t, int(N))
    except (ConfigError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if rep.passed:
        print(f"W_N (N={N}): satisfied", file=stream)
        if int(N) >= 4:
            plain = exponents.lemma_last_memberships(t, int(N))
            closed = exponents.lemma_last_memberships(t, int(N), with_duals=True)
            for name in plain:
                print(
                    f"hull membership {name}: {'yes' if plain[name] else 'no'}"
                    f" (with dual vertices: {'yes' if closed[name] else 'no'})",
                    file=stream,
                )
        return EXIT_OK
    print(f"W_N (N={N}): {len(rep.violations)} violation(s)", file=stream)
    for v in rep.violations:
        print(f"  violated: {v}", file=stream)
    return EXIT_CHECK_FAILED


def cmd_delta_limit(config_path, out_dir, plots: bool = True, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        cfg, _ = load_config(config_path)
        if cfg.delta_limit is None:
            raise ConfigError(f"{config_path}: delta_limit: field required for this command")
        grid = cfg.build_grid()
        background = cfg.build_background(grid)
        state = dynamics.make_state(grid, background, cfg.build_w0(grid))
        integ = cfg.integrator.build()
        integ.validate(grid)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        rows = dynamics.run_delta_limit(cfg.delta_limit.eps, state, integ)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except dynamics.BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    report.write_delta_limit_csv(out / "delta_limit.csv", rows)
    if plots:
        from nlgp.plotting import plot_delta_limit

        plot_delta_limit(rows, out)
    for eps, d in rows:
        print(f"eps={eps:<8g} sup_t H1 distance={d:.6e}", file=stream)
    dists = [d for _, d in rows]
    decreasing = all(b < a for a, b in zip(dists, dists[1:]))
    print("strictly decreasing: " + ("yes" if decreasing else "no"), file=stream)
    return EXIT_OK if decreasing else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlgp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nlgp {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario and write trajectory.csv + summary.json")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-plots", action="store_true")

    p = sub.add_parser("classify-kernel", help="classify a kernel's multiplier on a lattice")
    p.add_argument("kernel", help='inline JSON such as \'{"type": "dipolar", "alpha1": 1, "alpha2": 0.1}\' or a file')
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--L", type=float, default=20.0)

    p = sub.add_parser("check-exponents", help="verify an exponent tuple, or construct one")
    p.add_argument("tuple", nargs="?", help="JSON {N, p, q[, s]} (inline or file), or 'construct'")
    p.add_argument("--N", type=int)
    p.add_argument("--rbar", type=str)

    p = sub.add_parser("delta-limit", help="H1 distance between Yukawa(eps) and delta solutions")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--no-plots", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract reserves 2 for failed checks
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.command == "simulate":
        return cmd_simulate(args.config, args.out, plots=not args.no_plots)
    if args.command == "classify-kernel":
        return cmd_classify_kernel(args.kernel, args.dim, args.n, args.L)
    if args.command == "check-exponents":
        return cmd_check_exponents(args.tuple, args.N, args.rbar)
    return cmd_delta_limit(args.config, args.out, plots=not args.no_plots)


if __name__ == "__main__":
    sys.exit(main())
