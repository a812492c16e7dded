"""Command-line surface.

Subcommands mirror the library stages: ``synth`` writes a problem file,
``solve`` runs the full pipeline on one, ``certify`` checks a supplied
candidate, ``ransac`` handles contaminated input, ``benchmark`` sweeps an
experiment grid, and ``plotdata`` turns grid results into per-figure CSV
series.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as eio
from .bench import ExperimentGrid, plot_series, run_grid, summarize
from .certifier import CertifierConfig, certify
from .geometry import primal_point, project_to_essential
from .manifold import RtrConfig
from .pipeline import INITIALIZERS, estimate_relative_pose
from .problem import build_data_matrix
from .ransac import RansacConfig, ransac_essential
from .synth import SceneConfig, add_outliers, generate


def _certifier_config(args) -> CertifierConfig:
    return CertifierConfig(
        tau_mu=args.tau_mu,
        tau_gap=args.tau_gap,
        relative_gap=args.relative_gap,
    )


def _add_certifier_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau-mu", type=float, default=CertifierConfig.tau_mu,
                   help="eigenvalue tolerance (negative)")
    p.add_argument("--tau-gap", type=float, default=CertifierConfig.tau_gap,
                   help="duality gap tolerance")
    p.add_argument("--relative-gap", action="store_true",
                   help="test the gap relative to the cost instead of absolutely")


def _cmd_synth(args) -> int:
    config = SceneConfig(
        n_points=args.n,
        noise_px=args.noise,
        focal_px=args.focal,
        fov_deg=args.fov,
        parallax_range=tuple(args.parallax),
        depth_range=tuple(args.depth),
        seed=args.seed,
        noise_model=args.noise_model,
    )
    problem = generate(config)
    pairs = problem.pairs
    mask = None
    if args.outliers > 0:
        pairs, mask = add_outliers(problem, args.outliers, seed=args.seed + 1)
    out = Path(args.output)
    if out.suffix.lower() == ".json":
        eio.save_problem_json(out, pairs, problem=problem, inlier_mask=mask)
    else:
        eio.save_pairs_csv(out, pairs)
    print(f"wrote {len(pairs)} correspondences to {out}")
    return 0


def _cmd_solve(args) -> int:
    pairs, meta = eio.load_pairs(args.problem)
    result = estimate_relative_pose(
        pairs,
        init=args.init,
        certifier_config=_certifier_config(args),
        seed=args.seed,
    )
    eio.save_result_json(args.output, result, seed=args.seed, config=meta.get("config", {}))
    print(
        f"cost {result.solve.final_cost:.6e}  iterations {result.solve.outer_iterations}  "
        f"verdict {result.certificate.verdict}  -> {args.output}"
    )
    return 0


def _cmd_certify(args) -> int:
    pairs, _ = eio.load_pairs(args.problem)
    candidate = eio.load_candidate_essential(args.essential)
    element = project_to_essential(candidate)
    data = build_data_matrix(pairs)
    report = certify(data, primal_point(element), _certifier_config(args))
    payload = {
        "essential": np.asarray(element.e).flatten().tolist(),
        "cost": report.primal_cost,
        "lambda_hat": np.asarray(report.lambda_hat).tolist(),
        "gap": report.gap,
        "min_eigenvalue": report.min_eigenvalue,
        "residual": report.residual,
        "verdict": report.verdict,
        "rank_deficient": report.rank_deficient,
    }
    Path(args.output).write_text(json.dumps(payload, indent=1))
    print(f"verdict {report.verdict}  gap {report.gap:.3e}  mu {report.min_eigenvalue:.3e}  -> {args.output}")
    return 0


def _cmd_ransac(args) -> int:
    pairs, meta = eio.load_pairs(args.problem)
    cfg = RansacConfig(
        max_iterations=args.max_iterations,
        inlier_threshold=args.threshold,
        confidence=args.confidence,
        seed=args.seed,
    )
    report = ransac_essential(pairs, cfg)
    inliers = pairs[report.inlier_mask]
    result = estimate_relative_pose(
        inliers, init=report.best_model, certifier_config=_certifier_config(args)
    )
    payload = eio.result_to_dict(result, seed=args.seed, config=meta.get("config", {}))
    payload["inlier_mask"] = [bool(v) for v in report.inlier_mask]
    payload["inlier_count"] = report.inlier_count
    payload["ransac_iterations"] = report.iterations_used
    Path(args.output).write_text(json.dumps(payload, indent=1))
    print(
        f"inliers {report.inlier_count}/{len(pairs)} in {report.iterations_used} iterations; "
        f"verdict {result.certificate.verdict}  -> {args.output}"
    )
    return 0


def _load_grid_config(path) -> dict:
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        return json.loads(text)
    try:
        import tomllib  # python >= 3.11
    except ImportError:
        try:
            import tomli as tomllib
        except ImportError as exc:
            raise RuntimeError(
                "TOML support needs python >= 3.11 or the tomli package; use a JSON config"
            ) from exc
    return tomllib.loads(text)


def _cmd_benchmark(args) -> int:
    overrides: dict = {}
    if args.config:
        overrides.update(_load_grid_config(args.config))
    if args.noise:
        overrides["noise_levels"] = tuple(args.noise)
    if args.points:
        overrides["point_counts"] = tuple(args.points)
    if args.trials:
        overrides["trials_per_cell"] = args.trials
    if args.init:
        overrides["initializers"] = tuple(args.init)
    for key in ("noise_levels", "point_counts", "initializers", "parallax_range", "depth_range"):
        if key in overrides:
            overrides[key] = tuple(overrides[key])
    if "certifier" in overrides and isinstance(overrides["certifier"], dict):
        overrides["certifier"] = CertifierConfig(**overrides["certifier"])
    elif args.relative_gap or args.tau_mu != CertifierConfig.tau_mu or args.tau_gap != CertifierConfig.tau_gap:
        overrides["certifier"] = _certifier_config(args)
    if "rtr" in overrides and isinstance(overrides["rtr"], dict):
        overrides["rtr"] = RtrConfig(**overrides["rtr"])
    grid = ExperimentGrid(master_seed=args.seed, **overrides)
    results = run_grid(grid, progress=not args.quiet)
    eio.save_grid_results(args.output, results)
    rows = summarize(results)
    if args.summary:
        eio.write_summary_csv(args.summary, rows)
        print(f"summary -> {args.summary}")
    print(f"{len(results.records)} trials -> {args.output}")
    return 0


def _cmd_plotdata(args) -> int:
    results = eio.load_grid_results(args.results)
    written = eio.write_plot_series(args.outdir, plot_series(results))
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epicert",
        description="Relative pose estimation with a posteriori optimality certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic problem file")
    p.add_argument("-n", type=int, default=20, help="number of correspondences")
    p.add_argument("--noise", type=float, default=0.0, help="noise level in pixels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--focal", type=float, default=800.0)
    p.add_argument("--fov", type=float, default=100.0)
    p.add_argument("--parallax", type=float, nargs=2, default=[0.5, 2.0], metavar=("MIN", "MAX"))
    p.add_argument("--depth", type=float, nargs=2, default=[1.0, 8.0], metavar=("MIN", "MAX"))
    p.add_argument("--noise-model", choices=["uniform", "gaussian"], default="uniform")
    p.add_argument("--outliers", type=float, default=0.0, help="outlier fraction to inject")
    p.add_argument("-o", "--output", required=True, help=".csv (pairs only) or .json (with ground truth)")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("solve", help="run the certifiable pipeline on a problem file")
    p.add_argument("problem")
    p.add_argument("--init", choices=list(INITIALIZERS), default="8pt")
    p.add_argument("--seed", type=int, default=0, help="seed for the random initializer")
    _add_certifier_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("certify", help="certify a candidate essential matrix against a problem file")
    p.add_argument("problem")
    p.add_argument("--essential", required=True, help="JSON file with an 'essential' field (row-major)")
    _add_certifier_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("ransac", help="reject outliers, then run the pipeline on the inliers")
    p.add_argument("problem")
    p.add_argument("--threshold", type=float, default=RansacConfig.inlier_threshold,
                   help="squared epipolar residual bound for inliers")
    p.add_argument("--max-iterations", type=int, default=RansacConfig.max_iterations)
    p.add_argument("--confidence", type=float, default=RansacConfig.confidence)
    p.add_argument("--seed", type=int, default=0)
    _add_certifier_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_ransac)

    p = sub.add_parser("benchmark", help="run an experiment grid")
    p.add_argument("--seed", type=int, required=True, help="master seed (mandatory)")
    p.add_argument("--config", help="TOML or JSON file with grid fields")
    p.add_argument("--noise", type=float, nargs="+", help="noise levels in pixels")
    p.add_argument("--points", type=int, nargs="+", help="correspondence counts")
    p.add_argument("--trials", type=int, help="trials per cell")
    p.add_argument("--init", nargs="+", choices=list(INITIALIZERS), help="initializers to sweep")
    _add_certifier_flags(p)
    p.add_argument("--summary", help="also write a per-cell summary CSV here")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("-o", "--output", required=True, help="results JSON")
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("plotdata", help="emit per-figure CSV series from grid results")
    p.add_argument("results")
    p.add_argument("-d", "--outdir", required=True)
    p.set_defaults(func=_cmd_plotdata)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surface errors with context, no tracebacks
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
