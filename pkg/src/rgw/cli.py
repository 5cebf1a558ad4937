"""Command-line front end: ``rgw analyze|simulate|spine|phase-diagram|verify``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, acceptance, analytic, phase, spine
from . import config as cfgmod
from .errors import ConfigError, InvalidInput, NumericFailure
from .simulate import population as pop

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _pair(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two numbers, got {text!r}")
    return vals[0], vals[1]


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment file")
    common.add_argument("--seed", type=int, help="base seed (required for simulation commands)")
    common.add_argument("--jobs", type=int, help="worker processes")
    common.add_argument("--out", help="output directory")
    common.add_argument("--law", type=_floats, help="weights nu(0..k*), comma separated")
    common.add_argument("--nu-p", type=float, dest="nu_p", help="use the four-atom family nu_p with this p")
    common.add_argument("--q", type=float, help="reinforcement parameter")

    parser = argparse.ArgumentParser(prog="rgw", description="Reinforced Galton-Watson processes.")
    parser.add_argument("--version", action="version", version=f"rgw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common], help="growth rate, spectrum and regime flags")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo of Z, Z_* and M")
    p.add_argument("--start", help="null, typed:K[=N],... or p_ell:L")
    p.add_argument("--horizon", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--cap", type=int)

    p = sub.add_parser("spine", parents=[common], help="urn path of the spine and diagnostics")
    p.add_argument("--ell", type=int, help="initial color (default k*)")
    p.add_argument("--steps", type=int)
    p.add_argument("--paths", type=int, help="paths for the fluctuation diagnostic (0 skips it)")
    p.add_argument("--csv-stride", type=int, dest="csv_stride", help="write every n-th urn step")

    p = sub.add_parser("phase-diagram", parents=[common], help="phase diagram of the nu_p family")
    p.add_argument("--q-range", type=_pair, dest="q_range")
    p.add_argument("--p-range", type=_pair, dest="p_range")
    p.add_argument("--resolution", type=_pair, help="grid nodes along q and p, e.g. 200,200")

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--quick", action="store_true", default=None, help="reduced Monte Carlo sizes (smoke test)")
    p.add_argument("--only", type=_floats, help="comma-separated criterion numbers")
    return parser


def _overrides(args) -> dict:
    keys = ("seed", "jobs", "out", "q", "start", "horizon", "replicas", "cap", "ell", "steps", "paths",
            "csv_stride", "q_range", "p_range", "resolution", "quick")
    out = {k: getattr(args, k, None) for k in keys}
    if args.law is not None and args.nu_p is not None:
        raise ConfigError("give either --law or --nu-p, not both")
    if args.law is not None:
        out["law"] = args.law
    if args.nu_p is not None:
        out["law"] = {"preset": "nu_p", "p": args.nu_p}
    return out


def _outdir(cfg) -> Path:
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _dump(doc: dict, path: Path | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if path is not None:
        path.write_text(text + "\n")


def _need_seed(cfg, command: str) -> None:
    if cfg.seed is None:
        raise ConfigError(f"`rgw {command}` needs --seed (or `seed:` in the config)")


def cmd_analyze(cfg, write: bool) -> int:
    law = cfg.reproduction_law()
    doc = analytic.classify_regime(law, cfg.q).to_document()
    doc["weights"] = list(law.weights)
    _dump(doc, _outdir(cfg) / "analysis.json" if write else None)
    return EXIT_OK


def _rounded(x):
    return float(f"{float(x):.12g}")


def cmd_simulate(cfg) -> int:
    _need_seed(cfg, "simulate")
    law = cfg.reproduction_law()
    start = cfg.start_convention()
    ens = pop.simulate_ensemble(law, cfg.q, start, cfg.horizon, cfg.replicas, cfg.cap, cfg.seed, cfg.jobs)
    out = _outdir(cfg)
    pop.write_ensemble_csv(out / "trajectories.csv", ens)
    h = cfg.horizon
    alive = ens.truncated | (ens.z[:, h] >= 1)
    p_hat = float(alive.mean())
    st = pop.scaled_stats(ens, analytic.growth_rate(law, cfg.q), analytic.m_star(law, cfg.q))
    doc = {
        "start": str(start),
        "horizon": h,
        "replicas": cfg.replicas,
        "seed": cfg.seed,
        "truncated": int(ens.truncated.sum()),
        "survival_p_hat": _rounded(p_hat),
        "survival_half_width_95": _rounded(1.96 * (p_hat * (1 - p_hat) / cfg.replicas) ** 0.5),
        "mean_M_final": _rounded(ens.m[~ens.truncated, h].mean()) if st.used else None,
        "median_scaled_Z_final": _rounded(st.growth["median"][h]) if st.used else None,
        "median_scaled_Z_star_final": _rounded(st.starred["median"][h]) if st.used else None,
        "mean_abs_diff_final": _rounded(st.mean_abs_diff[h]) if st.used else None,
    }
    _dump(doc, out / "summary.json")
    return EXIT_OK


def cmd_spine(cfg) -> int:
    _need_seed(cfg, "spine")
    law = cfg.reproduction_law()
    ell = law.k_star if cfg.ell is None else cfg.ell
    path = spine.simulate_urn(law, cfg.q, ell, cfg.steps, cfg.seed)
    out = _outdir(cfg)
    spine.write_urn_csv(out / "urn.csv", path, cfg.csv_stride)
    spec = analytic.urn_spectrum(law, cfg.q)
    doc = {"ell": ell, "steps": cfg.steps, "seed": cfg.seed, "lambda1": _rounded(spec.lambda1),
           "final_counts": {str(k): v for k, v in path.state().counts.items()}}
    if cfg.steps >= spine.MIN_PATH:
        g = spine.spine_growth_estimate(path)
        per = spine.perpetuity_report(path)
        doc.update(limit_mean=_rounded(g.limit_mean), log_phi_slope=_rounded(g.log_phi_slope),
                   log_partial_sum=_rounded(per.log_partial_sum), perpetuity_converged=per.converged)
    if cfg.paths:
        f = spine.fluctuation_diagnostic(law, cfg.q, ell, cfg.steps, cfg.paths, cfg.seed)
        fd = {"regime": f.regime}
        if f.regime != "not_applicable":
            fd.update(
                scale_exponent=_rounded(f.scale_exponent),
                n_values=list(f.n_values),
                variance_ratio=[_rounded(x) for x in f.variance_ratio],
            )
            if f.mean_abs_cos_direction is not None:
                fd.update(mean_abs_cos_direction=_rounded(f.mean_abs_cos_direction),
                          mean_abs_cos_v2=_rounded(f.mean_abs_cos_v2))
        doc["fluctuation"] = fd
    _dump(doc, out / "spine.json")
    return EXIT_OK


def cmd_phase(cfg) -> int:
    grid = phase.compute_phase_grid(cfg.grid(), cfg.jobs)
    out = _outdir(cfg)
    phase.write_grid_csv(out / "phase_grid.csv", grid)
    phase.write_curves_csv(out / "phase_curves.csv", grid)
    phase.write_svg(out / "phase_diagram.svg", grid)
    print(f"grid {grid.m_nu_q.shape[0]}x{grid.m_nu_q.shape[1]}: {len(grid.curves['blue'])} blue points, "
          f"{len(grid.curves['orange'])} orange points, {int(grid.grey.sum())} grey cells -> {out}")
    return EXIT_OK


def cmd_verify(cfg, only) -> int:
    seed = cfg.seed if cfg.seed is not None else cfgmod.VERIFY_SEED
    scale = acceptance.QUICK if cfg.quick else acceptance.FULL
    numbers = None if only is None else {int(x) for x in only}
    results = acceptance.run_suite(seed, cfg.jobs, scale, numbers)
    out = _outdir(cfg)
    acceptance.write_results_csv(out / "acceptance.csv", results)
    acceptance.write_artifacts(seed, out / "artifacts", cfg.jobs)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed" + (f"; failed: {failed}" if failed else ""))
    return EXIT_VERIFY if failed else EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = cfgmod.load(args.config, _overrides(args))
        if args.command == "analyze":
            return cmd_analyze(cfg, write=args.out is not None)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "spine":
            return cmd_spine(cfg)
        if args.command == "phase-diagram":
            return cmd_phase(cfg)
        return cmd_verify(cfg, args.only)
    except InvalidInput as exc:
        print(f"rgw: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"rgw: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
