"""
CLI: wpshms {info,category,verify,flow,plot} --weights q0,...,qn

Códigos de salida: 0 correcto, 1 fallo de verificación, 2 error de uso o
de entrada.
"""
import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from category_explorer import CategoryExplorer
from src.schemas.config import SUITES, OutputFormat, RunConfig, default_log_level
from src.utils.errors import WPSError

logger = logging.getLogger("wpshms")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _range(text: str) -> tuple[int, int]:
    """'0..4' -> (0, 4). Un rango negativo va con '=': --sections=-2..0."""
    try:
        first, last = (int(part) for part in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a range like 0..4, got {text!r}") from None
    if last < first:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return first, last


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--weights", type=_int_list, required=True, help="Weights q0,...,qn with gcd 1")
    common.add_argument("--base", type=int, default=0, help="First object q of E (default 0)")
    common.add_argument("--chart", type=int, default=0, help="Chart index i (default 0)")
    common.add_argument("--out", help="Output path (default: stdout)")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], help="Output format")
    common.add_argument("--seed", type=int, default=0, help="Seed for random rational points")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG")

    parser = argparse.ArgumentParser(
        prog="wpshms",
        description="Weighted Morse category of P(q0,...,qn) and its mirror functor")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("info", parents=[common], help="Weights, charts and hom dimensions")
    commands.add_parser("category", parents=[common], help="Write the category as JSON")

    verify = commands.add_parser("verify", parents=[common], help="Run verification suites")
    verify.add_argument("--suite", choices=SUITES, default="all")
    verify.add_argument("--grid", type=int, help="Max-modulus scan resolution per axis")

    flow = commands.add_parser("flow", parents=[common], help="Gradient trajectories and trees")
    flow.add_argument("--labels", type=_int_list, required=True,
                      help="a,b for a trajectory (CSV) or a,b,c for a gradient tree (JSON)")
    flow.add_argument("--k", type=_int_list, action="append", required=True,
                      help="Lattice point K; give it twice (K_ab, K_bc) for a tree")
    flow.add_argument("--x0", type=_float_list, help="Start point (default: random interior point)")
    flow.add_argument("--dt", type=float, default=1e-3)
    flow.add_argument("--steps", type=int, default=1000)
    flow.add_argument("--backward", action="store_true")

    plot = commands.add_parser("plot", parents=[common], help="Polytope, generator and section plots")
    plot.add_argument("--dist", type=int, help="Draw the generators of Hom(L_0, L_dist)")
    plot.add_argument("--sections", type=_range,
                      help="Draw lifted sections for a in FIRST..LAST (negative start: --sections=-2..0)")
    plot.add_argument("--trees", action="store_true", help="Draw the gradient trees of E")
    return parser


def _setup_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, default_log_level(), logging.WARNING)
    logging.basicConfig(
        level=level, stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.info("Wrote %s", out)
    else:
        sys.stdout.write(text)


def _require_format(cfg: RunConfig, allowed: Sequence[OutputFormat]) -> None:
    if cfg.format not in allowed:
        raise WPSError(f"format {cfg.format.value} is not available here; "
                       f"use {' or '.join(f.value for f in allowed)}")


def cmd_info(explorer: CategoryExplorer, cfg: RunConfig) -> int:
    _require_format(cfg, [OutputFormat.TEXT, OutputFormat.JSON])
    if cfg.format == OutputFormat.JSON:
        _emit(json.dumps(explorer.info(), indent=2, sort_keys=True) + "\n", cfg.out)
    else:
        _emit(explorer.info_text(), cfg.out)
    return EXIT_OK


def cmd_category(explorer: CategoryExplorer, cfg: RunConfig) -> int:
    _require_format(cfg, [OutputFormat.JSON])
    _emit(explorer.category_json(), cfg.out)
    return EXIT_OK


def cmd_verify(explorer: CategoryExplorer, cfg: RunConfig) -> int:
    _require_format(cfg, [OutputFormat.JSON])
    reports = explorer.verify(cfg.suite, grid=cfg.grid, seed=cfg.seed)
    payload = [report.model_dump() for report in reports]
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", cfg.out)
    failed = [r.suite for r in reports if not r.passed]
    if failed:
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_flow(explorer: CategoryExplorer, cfg: RunConfig, args: argparse.Namespace) -> int:
    labels, ks = args.labels, args.k
    if len(labels) == 2 and len(ks) == 1:
        _require_format(cfg, [OutputFormat.CSV])
        traj = explorer.trajectory(labels[0], labels[1], ks[0], x0=args.x0, dt=args.dt,
                                   steps=args.steps, backward=args.backward, seed=cfg.seed)
        _emit(explorer.trajectory_csv(traj), cfg.out)
        return EXIT_OK
    if len(labels) == 3 and len(ks) == 2:
        _require_format(cfg, [OutputFormat.JSON])
        tree = explorer.gradient_tree(*labels, ks[0], ks[1])
        _emit(explorer.tree_json(tree), cfg.out)
        return EXIT_OK
    raise WPSError("flow needs --labels a,b with one --k, or --labels a,b,c with two --k")


def cmd_plot(explorer: CategoryExplorer, cfg: RunConfig) -> int:
    _require_format(cfg, [OutputFormat.SVG, OutputFormat.CSV, OutputFormat.PNG])
    scene = explorer.scene(dist=cfg.dist, sections=cfg.sections, trees=cfg.trees)
    text = explorer.render(scene, cfg.format, cfg.out)
    if text is not None:
        _emit(text, cfg.out)
    return EXIT_OK


DEFAULT_FORMATS = {
    "info": OutputFormat.TEXT,
    "category": OutputFormat.JSON,
    "verify": OutputFormat.JSON,
    "plot": OutputFormat.SVG,
}


def _config(args: argparse.Namespace) -> RunConfig:
    fmt = args.format
    if fmt is None:
        if args.command == "flow":
            fmt = OutputFormat.CSV if len(args.labels) == 2 else OutputFormat.JSON
        else:
            fmt = DEFAULT_FORMATS[args.command]
    return RunConfig(
        weights=args.weights,
        base=args.base,
        chart=args.chart,
        out=args.out,
        format=fmt,
        suite=getattr(args, "suite", "all"),
        grid=getattr(args, "grid", None),
        seed=args.seed,
        dist=getattr(args, "dist", None),
        sections=getattr(args, "sections", None),
        trees=getattr(args, "trees", False),
    )


def _validation_message(error: ValidationError) -> str:
    return "; ".join(e["msg"].removeprefix("Value error, ") for e in error.errors())


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)

    try:
        cfg = _config(args)
        explorer = CategoryExplorer(cfg.weights, base=cfg.base, chart=cfg.chart, threads=cfg.threads)
        if args.command == "info":
            return cmd_info(explorer, cfg)
        if args.command == "category":
            return cmd_category(explorer, cfg)
        if args.command == "verify":
            return cmd_verify(explorer, cfg)
        if args.command == "flow":
            return cmd_flow(explorer, cfg, args)
        return cmd_plot(explorer, cfg)
    except ValidationError as e:
        print(f"error: {_validation_message(e)}", file=sys.stderr)
        return EXIT_USAGE
    except WPSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
