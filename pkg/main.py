"""Main entry point for escapekit"""
import argparse
import logging
import re
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from dotenv import dotenv_values

import config
from cover import besicovitch_cover, orbit_cover_recipe
from errors import NumericFailure, PreconditionError
from escape import RateSequence, classify_orbit, normalize_rate_sequence, render_partition
from gauge import GaugeFactor
from ifs import SchemeSequence, cylinder_measure, limit_set_points, schedule_indices, similarity_dimension, similarity_scheme
from logtransform import ExponentialModel
from storage import ArtifactStore, RunManifest, read_manifest
from strip import (
    FunctionProfile,
    ahlfors_lower,
    ahlfors_upper,
    build_phi_for_gauge,
    contour_function_build,
    tau
)

logger = logging.getLogger(__name__)

EXIT_PRECONDITION = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64

# flags that are not dest.replace("_", "-")
FLAG_NAMES = {"lam": "lambda"}
# options that describe where and how fast a run happens, not what it computes
RUN_OPTIONS = {"command", "handler", "out", "threads", "config", "replay"}

CLASS_TABLE = """raster colors:
  0 Bounded             black       (0, 0, 0)
  1 EscapingWithinRate  blue        (40, 110, 220)
  2 UnbViolation        orange      (230, 160, 30)
  3 FastEscaping        red         (220, 40, 40)
  4 Undetermined        gray        (128, 128, 128)"""


class UsageError(Exception):
    pass


class CliParser(argparse.ArgumentParser):
    """Reports usage errors by raising instead of exiting"""

    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# Argument parsing helpers

def _floats(text: str, flag: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise PreconditionError(f"--{flag} expects comma separated numbers, got {text!r}")


def _ints(text: str, flag: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise PreconditionError(f"--{flag} expects comma separated integers, got {text!r}")


def _complex(text: str, flag: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise PreconditionError(f"--{flag} expects a complex number such as 0.5+1j, got {text!r}")


def _need(args: argparse.Namespace, dest: str):
    value = getattr(args, dest)
    if value is None:
        raise PreconditionError(f"--{FLAG_NAMES.get(dest, dest.replace('_', '-'))} is required")
    return value


def _size(text: str):
    match = re.fullmatch(r"(\d+)x(\d+)", text.strip())
    if not match:
        raise PreconditionError(f"--size expects WIDTHxHEIGHT, got {text!r}")
    return int(match.group(1)), int(match.group(2))


def _profile(text: str) -> FunctionProfile:
    """capped, reciprocal[:x0] or const:c"""
    name, _, value = text.partition(":")
    if name == "capped":
        return FunctionProfile.capped_reciprocal()
    if name == "reciprocal":
        return FunctionProfile.reciprocal(float(value) if value else 1.0)
    if name == "const" and value:
        return FunctionProfile.constant(float(value))
    raise PreconditionError(f"unknown profile {text!r}; use capped, reciprocal[:x0] or const:c")


def _grid_scheme(ratio: float, m: int):
    """m x m similarities of the given ratio, one centered in each cell of the unit square"""
    if not 0 < ratio < 1.0 / m:
        raise PreconditionError(f"ratio {ratio} does not fit an {m}x{m} grid")
    pad = (1.0 / m - ratio) / 2
    offsets = [complex(i / m + pad, j / m + pad) for j in range(m) for i in range(m)]
    return similarity_scheme([ratio] * len(offsets), offsets)


def _normalized(rate: str, n_max: int) -> RateSequence:
    return normalize_rate_sequence(RateSequence.parse(rate), n_max + 2)


def _gauge_profile(args: argparse.Namespace):
    return build_phi_for_gauge(GaugeFactor(args.gauge_c, args.gauge_a), _normalized(args.rate, args.n_max), args.n_max)


# Subcommands

def cmd_dim(args, store: ArtifactStore):
    ratios = _floats(_need(args, "ratios"), "ratios")
    s = similarity_dimension(ratios)
    store.write_csv("dim.csv", pd.DataFrame({"ratio": ratios, "s": s}))
    print(f"s = {s:.6f}")


def cmd_cylinder(args, store: ArtifactStore):
    ratios = _floats(_need(args, "ratios"), "ratios")
    if args.offsets is None:
        step = (1.0 - max(ratios)) / max(len(ratios) - 1, 1)
        offsets = [complex(k * step, 0.0) for k in range(len(ratios))]
    else:
        offsets = [_complex(v, "offsets") for v in args.offsets.split(",")]
    seq = SchemeSequence.constant(similarity_scheme(ratios, offsets))
    code = _ints(_need(args, "code"), "code")
    mass = cylinder_measure(seq, code)

    sample = limit_set_points(seq, len(code))
    store.write_csv("cylinder.csv", pd.DataFrame({
        "code": ["".join(str(j) for j in row) for row in sample.codes],
        "re": sample.points.real,
        "im": sample.points.imag,
    }))
    print(f"mu[{','.join(str(j) for j in code)}] = {mass:.10g}")


def cmd_schedule(args, store: ArtifactStore):
    pool, rows = [], []
    for item in _need(args, "stages").split(","):
        ratio, _, m = item.partition("x")
        try:
            scheme = _grid_scheme(float(ratio), int(m))
        except ValueError:
            raise PreconditionError(f"--stages expects RATIOxGRID items such as 0.3x2, got {item!r}")
        pool.append(scheme)
        rows.append({"ratio": float(ratio), "grid": int(m), "s": scheme.s})
    indices = schedule_indices(pool, args.eps, start=args.start)
    table = pd.DataFrame(rows)
    table["index"] = indices + [None] * (len(rows) - len(indices))
    store.write_csv("schedule.csv", table)
    print(f"schedule indices: {', '.join(str(n) for n in indices)}")


def cmd_render(args, store: ArtifactStore):
    window = _floats(args.window, "window")
    if len(window) != 4:
        raise PreconditionError("--window expects xmin,xmax,ymin,ymax")
    model = ExponentialModel(_complex(args.lam, "lambda"))
    raster = render_partition(model, window, _size(args.size), RateSequence.parse(args.rate), args.horizon,
                              threads=args.threads, fast_base=args.fast_base)
    store.write_ppm("partition.ppm", raster)
    counts = np.bincount(raster.ravel(), minlength=5)
    print(f"class counts (Bounded, WithinRate, UnbViolation, Fast, Undetermined): {counts.tolist()}")


def cmd_classify(args, store: ArtifactStore):
    model = ExponentialModel(_complex(args.lam, "lambda"))
    z0 = _complex(args.z0, "z0")
    verdict, record = classify_orbit(model, z0, RateSequence.parse(args.rate), args.horizon, fast_base=args.fast_base)
    store.write_csv("orbit.csv", record.to_frame())
    print(f"{verdict.kind.value}: {verdict.count} rate violations up to n = {verdict.horizon}")
    if verdict.lag is not None:
        print(f"  lag L = {verdict.lag}")
    if verdict.fixed_point is not None:
        print(f"  attracting point ~ {verdict.fixed_point:.7f}")


def cmd_phi_build(args, store: ArtifactStore):
    profile = _gauge_profile(args)
    store.write_csv("profile.csv", profile.to_frame())
    print(f"profile built on [{profile.x0:.6g}, {profile.x_end:.6g}] with {len(profile.breakpoints)} breakpoints")
    for n in range(1, profile.n_max + 1):
        print(f"  p_{n} = {profile.p_n(n):.6f}")


def cmd_tau(args, store: ArtifactStore):
    value = tau(_need(args, "t"))
    store.write_csv("tau.csv", pd.DataFrame([{
        "t": args.t, "tau": value.to_float(), "sign": value.sign, "depth": value.depth, "level": value.level,
    }]))
    as_float = value.to_float()
    print(f"tau({args.t:g}) = {as_float:.6f}" if as_float > 0 else f"tau({args.t:g}) = {value!r}")


def cmd_ahlfors(args, store: ArtifactStore):
    profile = _profile(args.profile)
    lower = ahlfors_lower(profile, args.x1, args.x2)
    upper = ahlfors_upper(profile, args.x1, args.x2)
    store.write_csv("ahlfors.csv", pd.DataFrame([
        {"bound": "lower", "value": lower.value, "integral": lower.integral, "applicable": lower.applicable},
        {"bound": "upper", "value": upper.value, "integral": upper.integral, "applicable": upper.applicable},
    ]))
    lower_text = f"{lower.value:.6f}" if lower.applicable else "not applicable (integral <= 4)"
    print(f"lower: {lower_text}")
    print(f"upper: {upper.value:.6f}")


def cmd_contour_build(args, store: ArtifactStore):
    function = contour_function_build(_profile(args.profile), x_max=args.x_max, spacing=args.spacing)
    store.write_csv("contour_nodes.csv", pd.DataFrame({"re": function.nodes.real, "im": function.nodes.imag}))
    print(f"cut at x = {function.x_trunc:.6g}, {len(function.nodes)} nodes, tail {function.tail_bound:.3g}, "
          f"scale {function.eps:.6g}")
    for report in function.check_normalization():
        print(f"  {report.name}: ok={report.ok} (max ratio {report.max_slack:.4g})")


def cmd_cover_ledger(args, store: ArtifactStore):
    profile = _gauge_profile(args)
    moduli = _floats(_need(args, "moduli"), "moduli")
    recipe = orbit_cover_recipe(profile, moduli, _need(args, "n"), args.eps, rho_log=args.rho_log,
                                c1=args.c1, c2=args.c2)
    store.write_csv("ledger.csv", recipe.to_frame())
    print(f"ledger at n = {recipe.n}: {len(recipe.rows)} rows, ok={recipe.ok}")
    for name in recipe.failed():
        print(f"  failed: {name}")


def cmd_besicovitch(args, store: ArtifactStore):
    if args.count < 1 or not 0 < args.r_min <= args.r_max:
        raise PreconditionError("need count >= 1 and 0 < r-min <= r-max")
    rng = np.random.default_rng(args.seed)
    points = rng.random((args.count, 2))
    radii = rng.uniform(args.r_min, args.r_max, args.count)
    cover = besicovitch_cover(points, radii)
    chosen = np.asarray(cover.selected, dtype=np.int64)
    store.write_csv("besicovitch.csv", pd.DataFrame({
        "x": points[chosen, 0], "y": points[chosen, 1], "radius": radii[chosen],
    }))
    print(f"{len(chosen)} of {args.count} balls, covered={cover.covered}, multiplicity {cover.multiplicity}")


# Parser

def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="Output directory (default: ESCAPEKIT_OUTPUT_DIR)")
    common.add_argument("--threads", type=int, default=None, help="Worker threads for rasters")

    parser = CliParser(prog="escapekit", description="escapekit - escaping sets, gauge functions and covers",
                       epilog=CLASS_TABLE, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"escapekit {config.VERSION}")
    parser.add_argument("--config", default=None, help="key=value file of flag defaults and settings")
    parser.add_argument("--replay", default=None, help="Re-run a stored manifest")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def command(name: str, handler, help: str) -> CliParser:
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(handler=handler)
        return p

    p = command("dim", cmd_dim, "Similarity dimension of a ratio list")
    p.add_argument("--ratios", help="Comma separated contraction ratios")

    p = command("cylinder", cmd_cylinder, "Mass of a cylinder of a similarity scheme")
    p.add_argument("--ratios", help="Comma separated contraction ratios")
    p.add_argument("--offsets", default=None, help="Comma separated complex offsets")
    p.add_argument("--code", help="Comma separated 0-based indices")

    p = command("schedule", cmd_schedule, "Schedule indices for a pool of grid schemes")
    p.add_argument("--stages", help="RATIOxGRID items, e.g. 0.3x2,0.2x3")
    p.add_argument("--eps", type=float, default=0.0, help="Constant eps in the schedule inequality")
    p.add_argument("--start", type=int, default=0)

    p = command("render", cmd_render, "Class raster of lambda e^z over a window")
    p.add_argument("--lambda", dest="lam", default="0.25")
    p.add_argument("--window", default="-2,2,-2,2", help="xmin,xmax,ymin,ymax")
    p.add_argument("--size", default="256x256", help="WIDTHxHEIGHT")
    p.add_argument("--rate", default="n", help="Named rate or comma separated table")
    p.add_argument("--horizon", type=int, default=200)
    p.add_argument("--fast-base", type=float, default=config.FAST_BASE_R)

    p = command("classify", cmd_classify, "Classify one orbit of lambda e^z")
    p.add_argument("--lambda", dest="lam", default="1")
    p.add_argument("--z0", default="0")
    p.add_argument("--rate", default="n")
    p.add_argument("--horizon", type=int, default=200)
    p.add_argument("--fast-base", type=float, default=config.FAST_BASE_R)

    for name, handler, help in (("phi-build", cmd_phi_build, "Strip profile for a gauge and rate"),
                                ("cover-ledger", cmd_cover_ledger, "Orbit cover inequality ledger")):
        p = command(name, handler, help)
        p.add_argument("--gauge-c", type=float, default=1.0, help="g(t) = c t^a")
        p.add_argument("--gauge-a", type=float, default=1.0)
        p.add_argument("--rate", default="n")
        p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--moduli", help="|f^k(xi)| for k = 0..n")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--rho-log", type=float, default=None, help="ln 1/|(f^n)'(xi)|")
    p.add_argument("--c1", type=float, default=config.COVER_C1)
    p.add_argument("--c2", type=float, default=config.COVER_C2)

    p = command("tau", cmd_tau, "tau(t) in log space")
    p.add_argument("--t", type=float, default=None)

    p = command("ahlfors", cmd_ahlfors, "Ahlfors bounds for a strip profile")
    p.add_argument("--profile", default="capped", help="capped, reciprocal[:x0] or const:c")
    p.add_argument("--x1", type=float, default=1.0)
    p.add_argument("--x2", type=float, default=10.0)

    p = command("contour-build", cmd_contour_build, "Contour-integral function for a strip profile")
    p.add_argument("--profile", default="capped", help="capped, reciprocal[:x0] or const:c")
    p.add_argument("--x-max", type=float, default=None)
    p.add_argument("--spacing", type=float, default=None)

    p = command("besicovitch", cmd_besicovitch, "Besicovitch subcover of random balls in the unit square")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--r-min", type=float, default=0.01)
    p.add_argument("--r-max", type=float, default=0.1)
    return parser


def _join_negative(argv: List[str]) -> List[str]:
    """--window -2,2,-2,2 becomes --window=-2,2,-2,2"""
    joined, i = [], 0
    while i < len(argv):
        token = argv[i]
        if (token.startswith("--") and "=" not in token and i + 1 < len(argv)
                and re.match(r"^-[\d.]", argv[i + 1])):
            joined.append(f"{token}={argv[i + 1]}")
            i += 2
        else:
            joined.append(token)
            i += 1
    return joined


def _format(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _apply_settings(settings: Dict[str, str], previous: Dict[str, object]) -> Dict[str, str]:
    """Set UPPER_CASE config constants, keeping their old values in previous; return the rest as flag defaults"""
    defaults = {}
    for key, value in settings.items():
        if value is None:
            continue
        if key.isupper() and hasattr(config, key):
            current = getattr(config, key)
            previous.setdefault(key, current)
            setattr(config, key, Path(value) if isinstance(current, Path) else type(current)(value))
            logger.debug(f"config {key} = {value}")
        else:
            defaults[key] = value
    return defaults


def _set_flag_defaults(parser: CliParser, defaults: Dict[str, str]):
    dests = {name.replace("-", "_").lower(): value for name, value in defaults.items()}
    if "lambda" in dests:
        dests["lam"] = dests.pop("lambda")
    for action in parser._subparsers._group_actions:
        for subparser in action.choices.values():
            known = {a.dest for a in subparser._actions}
            subparser.set_defaults(**{k: v for k, v in dests.items() if k in known})


def _manifest_argv(manifest: RunManifest) -> List[str]:
    argv = [manifest.subcommand]
    for key, value in manifest.parameters.items():
        if not key.startswith("env."):
            argv.append(f"--{key}={value}")
    return argv


def run(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit code. Config overrides last for this call only."""
    previous: Dict[str, object] = {}
    try:
        return _run(list(sys.argv[1:] if argv is None else argv), previous)
    finally:
        for key, value in previous.items():
            setattr(config, key, value)


def _run(argv: List[str], previous: Dict[str, object]) -> int:
    argv = _join_negative(argv)
    try:
        front = CliParser(add_help=False, allow_abbrev=False)
        front.add_argument("--config", default=None)
        front.add_argument("--replay", default=None)
        early, rest = front.parse_known_args(argv)

        settings: Dict[str, str] = {}
        if early.config:
            if not Path(early.config).is_file():
                raise PreconditionError(f"config file not found: {early.config}")
            settings.update(dotenv_values(early.config))
        replayed = None
        if early.replay:
            replayed = read_manifest(Path(early.replay))
            settings.update({k[len("env."):]: v for k, v in replayed.parameters.items() if k.startswith("env.")})
            rest = _manifest_argv(replayed) + rest
        env = {k: v for k, v in settings.items() if v is not None and k.isupper() and hasattr(config, k)}
        flag_defaults = _apply_settings(settings, previous)
        # built after the overrides so defaults such as --fast-base see them
        parser = build_parser()
        _set_flag_defaults(parser, flag_defaults)

        args = parser.parse_args(rest)
        if args.command is None:
            raise UsageError(parser.format_usage() + "escapekit: error: a subcommand is required")
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION

    parameters = {FLAG_NAMES.get(dest, dest.replace("_", "-")): _format(value)
                  for dest, value in vars(args).items() if dest not in RUN_OPTIONS and value is not None}
    parameters.update({f"env.{k}": v for k, v in env.items()})
    store = ArtifactStore(args.out)
    try:
        args.handler(args, store)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    manifest = RunManifest(subcommand=args.command, parameters=parameters, seed=getattr(args, "seed", 0),
                           version=config.VERSION)
    path = store.write_manifest(manifest)
    print(f"manifest: {path}")

    if replayed is not None:
        changed = sorted(name for name, digest in replayed.outputs.items() if store.digests.get(name) != digest)
        if changed:
            logger.error(f"replay differs in {', '.join(changed)}")
            return EXIT_NUMERIC
        print("replay reproduced every output")
    return 0


def main():
    """Main entry point"""
    logging.basicConfig(level=config.LOG_LEVEL, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
