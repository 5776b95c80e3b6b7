"""Command-line front end: analyze, synth, sweep, overlap, tessellate, render."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from energy import quadratic_confinement
from exceptions import ConsistencyError, InvalidInputError, StickyDiscsError
from geom import Frame, Point2
from harness import (
    SweepSpec,
    build_shape,
    run_confinement_sweep,
    run_overlap_experiment,
    run_polycrystal_bounds,
    run_single_crystal_sweep,
    run_tessellation_sweep,
)
from orient import DEFAULT_TOL_THETA
from particle_io import dump_json, format_particles, read_json, read_particles
from pipeline import AnalysisPipeline
from render import COLOR_MODES, render_svg
from synth import GrainSpec, TileFamily, hexagon_minimizer, lattice_fill, nestled_hexagon, polycrystal_fill, two_hexagon_config
from utils import config_hash, file_sha256

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CONSISTENCY = 3

SWEEPS = {
    "single": run_single_crystal_sweep,
    "polycrystal": run_polycrystal_bounds,
    "confinement": run_confinement_sweep,
}


@dataclass(frozen=True)
class RunConfig:
    """Everything a command depends on; its hash identifies the report."""

    subcommand: str
    input: str | None = None
    input_sha256: str | None = None
    out: str | None = None
    format: str | None = None
    epsilon: float | None = None
    tolerance: float | None = None
    tol_theta: float = DEFAULT_TOL_THETA
    gap: float | None = None
    offset: Any = (0.0, 0.0)
    seed: int = 0
    color_by: str = "orientation"
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.epsilon is not None and not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise InvalidInputError(f"--eps must be positive, got {self.epsilon!r}")
        if self.tolerance is not None and self.tolerance < 0:
            raise InvalidInputError("--tol must be non-negative")
        if self.tol_theta < 0:
            raise InvalidInputError("--tol-theta must be non-negative")
        if self.gap is not None and not (self.gap >= 0 and math.isfinite(self.gap)):
            raise InvalidInputError(f"--gap must be non-negative, got {self.gap!r}")
        if self.color_by not in COLOR_MODES:
            raise InvalidInputError(f"--color-by must be one of {COLOR_MODES}")
        if self.input is not None and not Path(self.input).is_file():
            raise InvalidInputError(f"input file {self.input} does not exist")

    def to_dict(self) -> dict[str, Any]:
        document = asdict(self)
        # output location does not change the report
        document.pop("out")
        if isinstance(self.offset, tuple):
            document["offset"] = list(self.offset)
        return document

    @property
    def hash(self) -> str:
        return config_hash(self.to_dict())

    def report_header(self) -> dict[str, Any]:
        return {**self.to_dict(), "hash": self.hash}


def _offset(text: str) -> Any:
    if text == "random":
        return text
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected x,y or 'random', got {text!r}") from exc
    return (x, y)


def _pair(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected x,y, got {text!r}") from exc
    return (x, y)


def _json_argument(text: str) -> Any:
    """Inline JSON (starting with '{' or '[') or a path to a JSON file."""
    try:
        if text.lstrip().startswith(("{", "[")):
            return json.loads(text)
        return read_json(text)
    except (json.JSONDecodeError, InvalidInputError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _common(parser: argparse.ArgumentParser, *options: str, eps_required: bool = False) -> None:
    """Register the shared flags; `options` names the physical ones the command reads."""
    if "eps" in options:
        parser.add_argument("--eps", type=float, required=eps_required, help="contact distance ε")
    if "tol" in options:
        parser.add_argument("--tol", type=float, default=None, help="distance tolerance (default 1e-9·ε)")
    if "tol-theta" in options:
        parser.add_argument("--tol-theta", type=float, default=None, help=f"orientation merge tolerance (default {DEFAULT_TOL_THETA})")
    if "gap" in options:
        parser.add_argument("--gap", type=float, default=None, help="minimum cross-grain distance (default ε)")
    if "offset" in options:
        parser.add_argument("--offset", type=_offset, default=None, help="lattice offset x,y or 'random' (default 0,0)")
    if "seed" in options:
        parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output file (default: standard output)")
    parser.add_argument("--format", choices=("json", "csv", "svg"), default=None)
    if "color-by" in options:
        parser.add_argument("--color-by", choices=COLOR_MODES, default="orientation")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stickydiscs", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="energy report and grains of a particle file")
    analyze.add_argument("input")
    analyze.add_argument("--confine", choices=("quadratic",), default=None, help="also report F^g with g(x) = |x|²")
    _common(analyze, "eps", "tol", "tol-theta", "color-by", eps_required=True)

    render = commands.add_parser("render", help="SVG drawing of a particle file")
    render.add_argument("input")
    _common(render, "eps", "tol", "tol-theta", "color-by", eps_required=True)

    synth = commands.add_parser("synth", help="generate a particle file")
    generators = synth.add_subparsers(dest="generator", required=True)
    hexagon = generators.add_parser("hexagon", help="hexagonal minimizer of side s")
    hexagon.add_argument("--s", type=int, required=True)
    hexagon.add_argument("--theta", type=float, default=math.pi / 2)
    _common(hexagon, "eps", "offset", "seed", eps_required=True)
    nestled = generators.add_parser("nestled", help="hexagon with discs nestled on its boundary")
    nestled.add_argument("--n", type=int, required=True)
    nestled.add_argument("--theta", type=float, default=math.pi / 2)
    _common(nestled, "eps", eps_required=True)
    fill = generators.add_parser("fill", help="single-crystal lattice fill of a shape")
    fill.add_argument("--shape", type=_json_argument, required=True, help="shape JSON or path")
    fill.add_argument("--theta", type=float, required=True)
    _common(fill, "eps", "offset", "seed", eps_required=True)
    poly = generators.add_parser("polycrystal", help="grain-wise fill from a grain list")
    poly.add_argument("--grains", type=_json_argument, required=True, help="[{shape, theta, offset}] JSON or path")
    _common(poly, "eps", "gap", eps_required=True)
    two = generators.add_parser("two-hexagons", help="two overlapping Wulff hexagons")
    two.add_argument("--theta1", type=float, required=True)
    two.add_argument("--theta2", type=float, required=True)
    two.add_argument("--tau", type=_pair, default=(0.0, 0.0))
    _common(two, "eps", "gap", eps_required=True)

    sweep = commands.add_parser("sweep", help="run an ε sweep from a JSON spec")
    sweep.add_argument("spec")
    sweep.add_argument("--kind", choices=tuple(SWEEPS), default="single")
    _common(sweep, "tol-theta", "gap", "offset", "seed")

    overlap = commands.add_parser("overlap", help="polycrystal against single crystal over τ")
    overlap.add_argument("--theta1", type=float, required=True)
    overlap.add_argument("--theta2", type=float, required=True)
    overlap.add_argument("--tau", type=_pair, action="append", required=True)
    _common(overlap, "eps", "gap")

    tessellate = commands.add_parser("tessellate", help="tile-packing perimeters of a shape")
    tessellate.add_argument("--shape", type=_json_argument, required=True)
    tessellate.add_argument("--family", choices=[f.value for f in TileFamily], required=True)
    tessellate.add_argument("--theta", type=float, action="append", required=True)
    tessellate.add_argument("--eps-list", type=float, nargs="+", required=True)
    _common(tessellate, "offset")
    return parser


def _or(value: Any, default: Any) -> Any:
    return default if value is None else value


def _config(args: argparse.Namespace, **params: Any) -> RunConfig:
    input_path = getattr(args, "input", None) or getattr(args, "spec", None)
    return RunConfig(
        subcommand=args.command if args.command != "synth" else f"synth {args.generator}",
        input=input_path,
        input_sha256=file_sha256(input_path) if input_path and Path(input_path).is_file() else None,
        out=args.out,
        format=args.format,
        epsilon=getattr(args, "eps", None),
        tolerance=getattr(args, "tol", None),
        tol_theta=_or(getattr(args, "tol_theta", None), DEFAULT_TOL_THETA),
        gap=getattr(args, "gap", None),
        offset=_or(getattr(args, "offset", None), (0.0, 0.0)),
        seed=_or(getattr(args, "seed", None), 0),
        color_by=getattr(args, "color_by", "orientation"),
        params=params,
    )


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot write {out}: {exc}") from exc
    logger.info("wrote %s", out)


def _fixed_offset(config: RunConfig, theta: float) -> tuple[float, float]:
    if config.offset != "random":
        return config.offset
    rng = np.random.default_rng(config.seed)
    phase = Frame(Point2(0.0, 0.0), theta, config.epsilon).embed_many(rng.uniform(0.0, 1.0, size=(1, 2)))[0]
    return float(phase[0]), float(phase[1])


def analyze_report(config: RunConfig) -> tuple[dict[str, Any], Any]:
    c = read_particles(config.input, config.epsilon, config.tolerance)
    confinement = quadratic_confinement if config.params.get("confine") == "quadratic" else None
    result = AnalysisPipeline(config.tol_theta, confinement).analyze(c)
    return result.to_report(config.report_header()), result


def _cmd_analyze(args: argparse.Namespace) -> int:
    config = _config(args, confine=args.confine)
    report, result = analyze_report(config)
    if config.format == "svg":
        _emit(render_svg(result, config.color_by), config.out)
    elif config.format in (None, "json"):
        _emit(dump_json(report), config.out)
    else:
        raise InvalidInputError("analyze writes json or svg")
    return EXIT_OK


def _cmd_render(args: argparse.Namespace) -> int:
    config = _config(args)
    c = read_particles(config.input, config.epsilon, config.tolerance)
    result = AnalysisPipeline(config.tol_theta).analyze(c)
    title = Path(config.input).stem
    _emit(render_svg(result, config.color_by, title=title), config.out)
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.format not in (None, "csv"):
        raise InvalidInputError("synth writes csv particle files")
    generator = args.generator
    if generator == "hexagon":
        config = _config(args, s=args.s, theta=args.theta)
        c = hexagon_minimizer(args.s, config.epsilon, args.theta, _fixed_offset(config, args.theta))
    elif generator == "nestled":
        config = _config(args, n=args.n, theta=args.theta)
        c = nestled_hexagon(args.n, config.epsilon, args.theta)
    elif generator == "fill":
        config = _config(args, shape=args.shape, theta=args.theta)
        c = lattice_fill(build_shape(args.shape), args.theta, config.epsilon, _fixed_offset(config, args.theta))
    elif generator == "polycrystal":
        config = _config(args, grains=args.grains)
        if not isinstance(args.grains, list):
            raise InvalidInputError("--grains must be a JSON list")
        try:
            grains = [GrainSpec(build_shape(g["shape"]), float(g["theta"]), Point2(*g.get("offset", (0.0, 0.0)))) for g in args.grains]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"bad grain description: {exc}") from exc
        c = polycrystal_fill(grains, config.epsilon, config.gap)
    else:
        config = _config(args, theta1=args.theta1, theta2=args.theta2, tau=list(args.tau))
        c, overlap = two_hexagon_config(args.theta1, args.theta2, args.tau, config.epsilon, config.gap)
        logger.info("overlap area m = %.6f", overlap)
    logger.info("generated %d particles", len(c))
    _emit(format_particles(c), config.out)
    return EXIT_OK


def _sweep_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Command-line flags that replace keys of the sweep document."""
    overrides: dict[str, Any] = {}
    if args.offset == "random":
        overrides["offsets"] = {"random": 1}
    elif args.offset is not None:
        overrides["offsets"] = [list(args.offset)]
    if args.gap is not None:
        overrides["gap"] = args.gap
    if args.tol_theta is not None:
        overrides["tol_theta"] = args.tol_theta
    if args.seed is not None:
        overrides["seed"] = args.seed
    return overrides


def _cmd_sweep(args: argparse.Namespace) -> int:
    document = read_json(args.spec)
    if not isinstance(document, dict):
        raise InvalidInputError("sweep spec must be a JSON object")
    document = {**document, **_sweep_overrides(args)}
    spec = SweepSpec.from_dict(document)
    config = _config(args, kind=args.kind, spec=spec.to_dict())
    report = SWEEPS[args.kind](spec)
    if config.format == "csv":
        _emit(report.to_csv(), config.out)
        return EXIT_OK
    if config.format not in (None, "json"):
        raise InvalidInputError("sweep writes json or csv")
    _emit(dump_json({"config": config.report_header(), **report.to_dict()}), config.out)
    if config.out is not None:
        # the JSON report always gets its CSV table next to it
        _emit(report.to_csv(), str(Path(config.out).with_suffix(".csv")))
    return EXIT_OK


def _cmd_overlap(args: argparse.Namespace) -> int:
    config = _config(args, theta1=args.theta1, theta2=args.theta2, taus=[list(t) for t in args.tau])
    report = run_overlap_experiment(args.theta1, args.theta2, args.tau, config.epsilon, config.gap)
    _emit(dump_json({"config": config.report_header(), **report.to_dict()}), config.out)
    return EXIT_OK


def _cmd_tessellate(args: argparse.Namespace) -> int:
    config = _config(args, shape=args.shape, family=args.family, thetas=args.theta, epsilons=args.eps_list)
    if config.offset == "random":
        raise InvalidInputError("tessellate needs an explicit offset")
    report = run_tessellation_sweep(build_shape(args.shape), TileFamily(args.family), args.theta, args.eps_list, config.offset)
    _emit(dump_json({"config": config.report_header(), **report.to_dict()}), config.out)
    return EXIT_OK


COMMANDS = {
    "analyze": _cmd_analyze,
    "render": _cmd_render,
    "synth": _cmd_synth,
    "sweep": _cmd_sweep,
    "overlap": _cmd_overlap,
    "tessellate": _cmd_tessellate,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Parse `argv`, run the command and map failures to exit codes 2 and 3."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except InvalidInputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except ConsistencyError as exc:
        sys.stderr.write(f"consistency failure: {exc}\n")
        return EXIT_CONSISTENCY
    except StickyDiscsError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
