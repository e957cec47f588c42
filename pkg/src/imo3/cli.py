"""Command-line entry point: experiment sweeps, plot-data export, and the
live elicitation server.

Examples:
    imo3 sweep --problem zdt1 --T 10,50,100,200 --N 20000 \\
        --algos imo3,rand_p,rand_t,log_ts --estimator ips --M 10 --L 500 \\
        --seed 7 --out results.csv
    imo3 plot-data --in results.csv --metric simple_regret --out series.csv
    imo3 serve --port 8080 --data-dir ./sessions
"""
from __future__ import annotations

import argparse
import sys

from .harness import (
    SweepSpec,
    default_workers,
    emit_plot_data,
    read_results,
    run_sweep,
    write_plot_data,
)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imo3", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run an experiment sweep and write a results CSV")
    sweep.add_argument("--problem", default="zdt1", choices=["zdt1", "stock"])
    sweep.add_argument("--prices-csv", default=None, help="price CSV path (stock problem)")
    sweep.add_argument("--T", type=_int_list, default=(10, 50, 100, 200), dest="t_grid")
    sweep.add_argument("--N", type=_int_list, default=(20000,), dest="n_grid")
    sweep.add_argument("--algos", type=_str_list, default=("imo3", "rand_p", "rand_t", "log_ts"))
    sweep.add_argument("--estimator", type=_str_list, default=("ips",))
    sweep.add_argument("--M", type=float, default=10.0, dest="clip_m")
    sweep.add_argument("--L", type=int, default=500, dest="preselect_l")
    sweep.add_argument("--datasets", type=int, default=10)
    sweep.add_argument("--thetas", type=int, default=10)
    sweep.add_argument("--reps", type=int, default=5)
    sweep.add_argument("--seed", type=int, default=7)
    sweep.add_argument("--workers", type=int, default=None,
                       help="worker pool size (default: IMO3_THREADS env var or 1)")
    sweep.add_argument("--out", required=True)

    plot = sub.add_parser("plot-data", help="aggregate a results CSV into plot-ready series")
    plot.add_argument("--in", dest="infile", required=True)
    plot.add_argument("--metric", default="simple_regret")
    plot.add_argument("--out", default=None, help="series CSV path (default: stdout)")

    serve = sub.add_parser("serve", help="run the live elicitation session service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--data-dir", default="./sessions")
    serve.add_argument("--session-ttl-hours", type=float, default=24.0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "sweep":
        kwargs = {}
        if args.problem == "stock":
            if not args.prices_csv:
                print("--prices-csv is required for the stock problem", file=sys.stderr)
                return 2
            kwargs["prices_csv_path"] = args.prices_csv
        spec = SweepSpec(
            problem=args.problem,
            problem_kwargs=kwargs,
            t_grid=args.t_grid,
            n_grid=args.n_grid,
            algorithms=args.algos,
            estimators=args.estimator,
            clip_m=args.clip_m,
            preselect_l=args.preselect_l,
            num_log_datasets=args.datasets,
            num_theta_stars=args.thetas,
            runs_per_combo=args.reps,
            master_seed=args.seed,
            out=args.out,
            workers=args.workers if args.workers is not None else default_workers(),
        )
        rows = run_sweep(spec)
        n_detail = sum(1 for r in rows if r["row_type"] == "detail")
        print(f"wrote {n_detail} runs to {args.out}")
        return 0
    if args.command == "plot-data":
        series = emit_plot_data(read_results(args.infile), metric=args.metric)
        if args.out:
            write_plot_data(series, args.out)
            print(f"wrote {len(series)} series points to {args.out}")
        else:
            for point in series:
                print(point)
        return 0
    if args.command == "serve":
        import uvicorn

        from .service import create_app

        app = create_app(data_dir=args.data_dir, session_ttl_hours=args.session_ttl_hours)
        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
