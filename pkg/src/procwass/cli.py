"""Command-line entry point: ``procwass {generate,align,sweep,plot}``.

Exit status is 0 on success, 2 on configuration or usage errors and 1 on
any other failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import bench
from .errors import ConfigError
from .metrics import evaluate
from .model import load_instance, plant_instance, save_instance


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="procwass", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample a planted instance and write it as .npz")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--sigma", type=float, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    al = sub.add_parser("align", help="run one method on an instance and print its metrics")
    al.add_argument("instance")
    al.add_argument("--method", choices=bench.METHODS, default="ping_pong")
    al.add_argument("--config", help="take hyperparameters from a sweep config")
    al.add_argument("--T", type=int)
    al.add_argument("--K", type=int)

    sw = sub.add_parser("sweep", help="run a sweep config and write a CSV")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out", help="override the config's output path")
    sw.add_argument("--seed", type=int, help="override base_seed")
    sw.add_argument("--T", type=int)
    sw.add_argument("--K", type=int)
    sw.add_argument("--workers", type=int)

    pl = sub.add_parser("plot", help="render mean overlap from a sweep CSV as SVG")
    pl.add_argument("csv")
    pl.add_argument("--x-axis", choices=("d", "n", "sigma"), default="d")
    pl.add_argument("--out", required=True)
    pl.add_argument("--method", action="append", help="keep only these methods (repeatable)")
    pl.add_argument("--n", type=int, help="keep only rows with this n")
    pl.add_argument("--d", type=int, help="keep only rows with this d")
    pl.add_argument("--sigma", type=float, help="keep only rows with this sigma")
    return parser


def _generate(args) -> None:
    inst = plant_instance(args.n, args.d, args.sigma, args.seed)
    save_instance(inst, args.out)
    print(f"wrote {args.out} (n={inst.n}, d={inst.d}, sigma={inst.sigma:g}, seed={args.seed})")


def _align(args) -> None:
    inst = load_instance(args.instance)
    if args.config:
        cfg = bench.load_config(args.config)
        cfg = replace(cfg, methods=(args.method,), n=(inst.n,), d=(inst.d,), sigma=(inst.sigma,))
    else:
        cfg = bench.SweepConfig(methods=(args.method,), n=(inst.n,), d=(inst.d,), sigma=(inst.sigma,))
    cfg = bench.with_overrides(cfg, T=args.T, K=args.K)
    pi, Q, seconds = bench.run_method(args.method, inst, cfg)
    report = evaluate(inst, pi, Q).as_dict()
    report["method"] = args.method
    report["runtime_ms"] = 1000.0 * seconds
    print(json.dumps(report, indent=2))


def _sweep(args) -> None:
    cfg = bench.load_config(args.config)
    cfg = bench.with_overrides(cfg, output=args.out, base_seed=args.seed, T=args.T, K=args.K, workers=args.workers)
    if cfg.output is None:
        raise ConfigError("no output path: set [sweep] output or pass --out")
    records = bench.run_sweep(cfg)
    bench.write_csv(records, cfg.output)
    print(f"wrote {len(records)} records to {cfg.output}")


def _plot(args) -> None:
    from .plotting import render_plot

    records = bench.read_csv(args.csv)
    if args.method:
        records = [r for r in records if r.method in args.method]
    for key in ("n", "d", "sigma"):
        value = getattr(args, key)
        if value is not None:
            records = [r for r in records if getattr(r, key) == value]
    render_plot(records, args.x_axis, args.out)
    print(f"wrote {args.out}")


_COMMANDS = {"generate": _generate, "align": _align, "sweep": _sweep, "plot": _plot}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"procwass: configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and map to exit status 1
        print(f"procwass: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
