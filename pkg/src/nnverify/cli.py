"""Command-line frontend.

Subcommands: verify, coverage, intervals, conformance, convert, gen-bench.
Verdict-producing commands exit 0 for SAFE, 1 for UNSAFE, 2 for UNKNOWN;
usage and input errors exit 3, unexpected failures 4.  Reports are JSON
on stdout, optionally mirrored to --json, with CSV and figures rendered
into --report-dir.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import os
import random
import sys

import numpy as np

from nnverify import bench, pgm, report
from nnverify.coverage import CoverConfig, coverage_report
from nnverify.fxp import FxpError, FxpFormat, Rounding, from_real, to_real
from nnverify.fxpnet import conformance_diff, forward_fxp
from nnverify.intervals import Box, Interval, propagate_network, propagate_network_fxp, widen
from nnverify.nets import (
    ActivationKind,
    Network,
    NnetParseError,
    SigmoidTable,
    forward_float,
    load_nnet,
)
from nnverify.verifier import (
    AdversarialRobustness,
    CoverageGoal,
    OutputThreshold,
    Region,
    VerifierError,
    VerifyConfig,
    incremental_verify,
)

log = logging.getLogger("nnverify")

_BUILTIN_NETWORKS = {"vocalic": "vocalic.nnet", "toy-relu": "toy_relu.nnet"}


class CliError(Exception):
    pass


def _setup_logging():
    level = os.environ.get("NNVERIFY_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _resolve_network_path(spec: str) -> str:
    if spec in _BUILTIN_NETWORKS:
        import importlib.resources

        ref = importlib.resources.files("nnverify.data") / _BUILTIN_NETWORKS[spec]
        with importlib.resources.as_file(ref) as path:
            return str(path)
    return spec


def _load_network(args) -> Network:
    path = _resolve_network_path(args.network)
    if not os.path.exists(path):
        raise CliError(f"network file not found: {args.network}")
    activations = getattr(args, "activations", None)
    if activations is None:
        activations = "sigmoid" if args.network == "vocalic" else "default"
    table = SigmoidTable(step=getattr(args, "lut_step", 0.01))
    kinds = {
        "default": (ActivationKind.RELU, ActivationKind.IDENTITY),
        "sigmoid": (ActivationKind.SIGMOID_LUT, ActivationKind.SIGMOID_LUT),
        "identity": (ActivationKind.IDENTITY, ActivationKind.IDENTITY),
    }[activations]
    return load_nnet(
        path,
        hidden_activation=kinds[0],
        output_activation=kinds[1],
        sigmoid_table=table,
    )


def _parse_box(text: str) -> Box:
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        lo, _, hi = chunk.partition(":")
        try:
            pairs.append((float(lo), float(hi)))
        except ValueError:
            raise CliError(f"bad box component {chunk!r}; expected lo:hi") from None
    if not pairs:
        raise CliError("empty box argument")
    return Box.from_pairs(pairs)


def _load_vector(source, base_dir="") -> np.ndarray:
    if isinstance(source, (list, tuple)):
        return np.asarray(source, dtype=np.float64)
    if isinstance(source, dict) and "image" in source:
        source = source["image"]
    if isinstance(source, str):
        path = source if os.path.isabs(source) else os.path.join(base_dir, source)
        if not os.path.exists(path):
            raise CliError(f"input image not found: {source}")
        if path.endswith(".json"):
            with open(path) as fh:
                return np.asarray(json.load(fh), dtype=np.float64)
        return pgm.read_pgm(path).reshape(-1)
    raise CliError(f"cannot interpret input vector {source!r}")


def _fmt_from_args(args):
    if getattr(args, "float_oracle", False):
        return None
    return FxpFormat.parse(args.fixedbv)


def _rounding_from_args(args) -> Rounding:
    return {"floor": Rounding.FLOOR, "nearest": Rounding.NEAREST_EVEN}[args.rounding]


def _verify_config(args) -> VerifyConfig:
    return VerifyConfig(
        max_depth=args.max_depth,
        budget=args.budget,
        granularity=args.granularity,
        use_invariants=not args.no_interval_analysis,
        rounding=_rounding_from_args(args),
        workers=args.parallel,
    )


def load_property(path: str, net: Network):
    """Read a property JSON file into (property, region)."""
    if not os.path.exists(path):
        raise CliError(f"property file not found: {path}")
    with open(path) as fh:
        blob = json.load(fh)
    base_dir = os.path.dirname(os.path.abspath(path))
    ptype = blob.get("type")
    if ptype == "adversarial":
        base = _load_vector(blob["base_input"], base_dir)
        gamma = float(blob["gamma"])
        prop = AdversarialRobustness(
            base=tuple(base),
            gamma=gamma,
            expected_class=int(blob["expected_class"]),
            threshold=float(blob.get("threshold_V", 0.5)),
        )
        box = (
            Box.from_pairs(blob["box"])
            if "box" in blob
            else Box([0.0] * base.size, [1.0] * base.size)
        )
        region = Region(
            box=box, base=base, gamma=gamma,
            grid_step=float(blob.get("grid_step", 1.0)),
        )
        return prop, region
    if ptype == "output_threshold":
        prop = OutputThreshold(
            neuron=int(blob["neuron"]),
            bound=float(blob["bound"]),
            relation=blob.get("relation", "<="),
            layer=blob.get("layer"),
        )
        if "point" in blob:
            region = Region.point(_load_vector(blob["point"], base_dir))
        else:
            region = Region(
                box=Box.from_pairs(blob["box"]),
                grid_step=blob.get("grid_step"),
            )
        return prop, region
    if ptype == "coverage_goal":
        base = _load_vector(blob["base_input"], base_dir)
        prop = CoverageGoal(
            method=blob["method"],
            p=float(blob["p"]),
            base=tuple(base),
            d=float(blob.get("d", 1.0)),
            v=float(blob.get("v", 0.1)),
        )
        region = Region(
            box=Box.from_pairs(blob["box"]),
            grid_step=blob.get("grid_step"),
        )
        return prop, region
    raise CliError(f"unknown property type {ptype!r}")


def _describe_property(prop) -> dict:
    if isinstance(prop, AdversarialRobustness):
        return {
            "type": "adversarial",
            "gamma": prop.gamma,
            "expected_class": prop.expected_class,
            "threshold_V": prop.threshold,
        }
    if isinstance(prop, OutputThreshold):
        return {
            "type": "output_threshold",
            "neuron": prop.neuron,
            "bound": prop.bound,
            "relation": prop.relation,
            "layer": prop.layer,
        }
    return {
        "type": "coverage_goal",
        "method": prop.method,
        "p": prop.p,
        "d": prop.d,
        "v": prop.v,
    }


def _emit(blob: dict, args) -> None:
    text = json.dumps(blob, indent=2)
    print(text)
    if args.json:
        report.save_json(blob, args.json)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    net = _load_network(args)
    prop, region = load_property(args.property, net)
    fmt = _fmt_from_args(args)
    verdict = incremental_verify(net, prop, region, fmt=fmt, config=_verify_config(args))
    blob = verdict.to_json()
    blob["network"] = args.network
    blob["property"] = _describe_property(prop)
    blob["semantics"] = "float" if fmt is None else str(fmt)
    _emit(blob, args)
    witness = verdict.counterexample
    if witness is not None and args.witness_image:
        h, w = report.image_shape(len(witness.input))
        pgm.write_pgm(args.witness_image, np.asarray(witness.input).reshape(h, w))
    if args.report_dir:
        out = report.ensure_dir(args.report_dir)
        report.save_json(blob, os.path.join(out, "verdict.json"))
        report.verdict_csv(blob, os.path.join(out, "verdict.csv"))
        if witness is not None:
            h, w = report.image_shape(len(witness.input))
            pgm.write_pgm(
                os.path.join(out, "witness.pgm"),
                np.asarray(witness.input).reshape(h, w),
            )
            base = region.base if region.base is not None else np.zeros(len(witness.input))
            report.witness_figure(
                base, witness.input, os.path.join(out, "witness.png")
            )
    return verdict.exit_code


def _traces_for_images(net, vectors, fmt, rounding):
    if fmt is None:
        return [forward_float(net, v) for v in vectors]
    return [forward_fxp(net, v, fmt, rounding) for v in vectors]


def cmd_coverage(args) -> int:
    net = _load_network(args)
    cfg = CoverConfig(d=args.d, v=args.v, p=args.p)
    rounding = _rounding_from_args(args)
    if args.goal:
        if args.base is None or args.box is None:
            raise CliError("goal mode needs --base and --box")
        base = _load_vector(args.base if not args.base.startswith("[") else json.loads(args.base))
        goal = CoverageGoal(method=args.method, p=args.p, base=tuple(base), d=args.d, v=args.v)
        region = Region(box=_parse_box(args.box), grid_step=args.grid_step)
        fmt = _fmt_from_args(args)
        verdict = incremental_verify(
            net, goal, region, fmt=fmt, config=_verify_config(args)
        )
        blob = verdict.to_json()
        blob["network"] = args.network
        blob["property"] = _describe_property(goal)
        _emit(blob, args)
        return verdict.exit_code

    fmt = None
    if args.fixedbv_given:
        fmt = FxpFormat.parse(args.fixedbv)
    if args.pair:
        vectors = [_load_vector(p) for p in args.pair]
    elif args.dataset:
        files = sorted(
            os.path.join(args.dataset, f)
            for f in os.listdir(args.dataset)
            if f.endswith(".pgm")
        )
        if len(files) < 2:
            raise CliError("dataset coverage needs at least two images")
        vectors = [_load_vector(f) for f in files]
    else:
        raise CliError("coverage needs --pair, --dataset or --goal")
    traces = _traces_for_images(net, vectors, fmt, rounding)
    pairs = list(itertools.combinations(traces, 2))
    rep = coverage_report(args.method, pairs, cfg)
    blob = rep.to_json()
    blob["network"] = args.network
    blob["semantics"] = "float" if fmt is None else str(fmt)
    _emit(blob, args)
    if args.report_dir:
        out = report.ensure_dir(args.report_dir)
        report.save_json(blob, os.path.join(out, "coverage.json"))
        report.coverage_csv(blob, os.path.join(out, "coverage.csv"))
        report.coverage_figure(blob, os.path.join(out, "coverage.png"))
    return 0


def cmd_intervals(args) -> int:
    net = _load_network(args)
    box = _parse_box(args.box)
    # float bounds by default; an explicit --fixedbv selects the mirror
    # propagation of the fixed-point pipeline
    fmt = None
    if args.fixedbv_given and not args.float_oracle:
        fmt = FxpFormat.parse(args.fixedbv)
    if fmt is None:
        bounds = propagate_network(net, box)
        semantics = "float"
    else:
        bounds = propagate_network_fxp(net, box, fmt, _rounding_from_args(args))
        semantics = str(fmt)
    limit = None
    if args.widen_limit:
        lo, _, hi = args.widen_limit.partition(":")
        limit = Interval(float(lo), float(hi))
    layers = []
    for i, (pot, out) in enumerate(zip(bounds.potentials, bounds.outputs)):
        if limit is not None:
            pot = widen(pot, limit)
        layers.append(
            {
                "layer": i,
                "potentials": [[float(iv.lo), float(iv.hi)] for iv in pot.intervals()],
                "outputs": [[float(iv.lo), float(iv.hi)] for iv in out.intervals()],
            }
        )
    blob = {
        "network": args.network,
        "box": [[float(l), float(h)] for l, h in zip(box.los, box.his)],
        "semantics": semantics,
        "widened": limit is not None,
        "widen_limit": [limit.lo, limit.hi] if limit else None,
        "layers": layers,
    }
    _emit(blob, args)
    if args.report_dir:
        out = report.ensure_dir(args.report_dir)
        report.save_json(blob, os.path.join(out, "intervals.json"))
        report.intervals_csv(layers, os.path.join(out, "intervals.csv"))
        report.intervals_figure(layers, os.path.join(out, "intervals.png"))
    return 0


def cmd_conformance(args) -> int:
    net = _load_network(args)
    rounding = _rounding_from_args(args)
    if args.dataset:
        files = sorted(
            os.path.join(args.dataset, f)
            for f in os.listdir(args.dataset)
            if f.endswith(".pgm")
        )
        vectors = [_load_vector(f) for f in files]
    elif args.inputs:
        with open(args.inputs) as fh:
            vectors = [np.asarray(v, dtype=np.float64) for v in json.load(fh)]
    else:
        raise CliError("conformance needs --dataset or --inputs")
    reports = []
    for fmt_text in args.formats:
        fmt = FxpFormat.parse(fmt_text)
        reports.append(
            conformance_diff(net, vectors, fmt, rounding, threshold=args.threshold)
        )
    blob = {"network": args.network, "threshold": args.threshold, "reports": reports}
    _emit(blob, args)
    if args.report_dir:
        out = report.ensure_dir(args.report_dir)
        report.save_json(blob, os.path.join(out, "conformance.json"))
        report.conformance_csv(reports, os.path.join(out, "conformance.csv"))
        report.conformance_figure(reports, os.path.join(out, "conformance.png"))
    return 0


def cmd_convert(args) -> int:
    fmt = FxpFormat.parse(args.format)
    rounding = _rounding_from_args(args)
    value = float(args.value)
    v = from_real(value, fmt, rounding)
    blob = {
        "input": value,
        "format": str(fmt),
        "rounding": rounding.value,
        "raw": v.raw,
        "value": to_real(v),
        "error": to_real(v) - value,
        "saturated": v.raw in (fmt.raw_min, fmt.raw_max)
        and not fmt.min_value <= value <= fmt.max_value,
    }
    _emit(blob, args)
    return 0


def cmd_gen_bench(args) -> int:
    out = report.ensure_dir(args.out)
    images = bench.generate_dataset(
        seed=args.seed,
        noisy_per_vowel=args.noisy_per_vowel,
        nonvocalic=args.nonvocalic,
        noise_flips=args.noise_flips,
    )
    manifest = {"seed": args.seed, "noise_flips": args.noise_flips, "images": []}
    for image in images:
        fname = f"{image.name}.pgm"
        pgm.write_pgm(os.path.join(out, fname), image.pixels.reshape(5, 5))
        manifest["images"].append(
            {"file": fname, "name": image.name, "label": image.label}
        )
    manifest["counts"] = {
        "clean": 5,
        "noisy": 5 * args.noisy_per_vowel,
        "nonvocalic": args.nonvocalic,
    }
    report.save_json(manifest, os.path.join(out, "manifest.json"))
    _emit(manifest, args)
    return 0


# ---------------------------------------------------------------------------
# Argument wiring
# ---------------------------------------------------------------------------


def _add_common(parser, with_verify_flags=True):
    parser.add_argument("--fixedbv", default="<32,32>", metavar="<I,F>",
                        help="fixed-point format (default <32,32>)")
    parser.add_argument("--float-oracle", action="store_true",
                        help="evaluate in double precision instead of fixed point")
    parser.add_argument("--rounding", choices=["floor", "nearest"], default="floor",
                        help="fixed-point rounding of the pipeline (default floor)")
    parser.add_argument("--activations", choices=["default", "sigmoid", "identity"],
                        default=None, help="activation assignment when loading .nnet")
    parser.add_argument("--lut-step", type=float, default=0.01,
                        help="sigmoid lookup-table resolution (default 0.01)")
    parser.add_argument("--json", metavar="PATH", help="also write the JSON report here")
    parser.add_argument("--report-dir", metavar="DIR",
                        help="write JSON + CSV + figures into this directory")
    if with_verify_flags:
        parser.add_argument("--no-interval-analysis", action="store_true",
                            help="disable invariant pruning")
        parser.add_argument("--granularity", type=int, default=1)
        parser.add_argument("--max-depth", type=int, default=None)
        parser.add_argument("--budget", type=int, default=10_000_000)
        parser.add_argument("--parallel", type=int, default=1, metavar="WORKERS")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nnverify",
        description="Bit-precise fixed-point MLP verification: invariants, "
        "coverage, adversarial search.",
    )
    parser.add_argument("--seed", type=int, default=0, help="global RNG seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check a property file against a network")
    p.add_argument("network", help=".nnet path or builtin name (vocalic, toy-relu)")
    p.add_argument("property", help="property JSON file")
    p.add_argument("--witness-image", metavar="PATH", help="write the witness as PGM")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("coverage", help="covering-method reports and goal search")
    p.add_argument("--network", required=True)
    p.add_argument("--method", choices=["ss", "ds", "sv", "dv"], required=True)
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--v", type=float, default=0.1)
    p.add_argument("--p", type=float, default=0.8)
    p.add_argument("--pair", nargs=2, metavar=("IMG1", "IMG2"))
    p.add_argument("--dataset", metavar="DIR")
    p.add_argument("--goal", action="store_true", help="search for a coverage witness")
    p.add_argument("--base", help="base input (image path or JSON list)")
    p.add_argument("--box", help="region box lo:hi,lo:hi,...")
    p.add_argument("--grid-step", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("intervals", help="dump layer bounds for an input box")
    p.add_argument("--network", required=True)
    p.add_argument("--box", required=True, help="input box lo:hi,lo:hi,...")
    p.add_argument("--widen-limit", metavar="LO:HI",
                   help="apply widening to potential bounds")
    _add_common(p, with_verify_flags=False)
    p.set_defaults(func=cmd_intervals)

    p = sub.add_parser("conformance", help="fixed-point vs float sweep")
    p.add_argument("--network", required=True)
    p.add_argument("--dataset", metavar="DIR")
    p.add_argument("--inputs", metavar="JSON")
    p.add_argument("--formats", nargs="+",
                   default=["<2,2>", "<4,4>", "<8,8>", "<16,16>", "<32,32>"])
    p.add_argument("--threshold", type=float, default=0.5)
    _add_common(p, with_verify_flags=False)
    p.set_defaults(func=cmd_conformance)

    p = sub.add_parser("convert", help="quantize one value")
    p.add_argument("value")
    p.add_argument("format", metavar="<I,F>")
    p.add_argument("--rounding", choices=["floor", "nearest"], default="floor")
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_convert, report_dir=None)

    p = sub.add_parser("gen-bench", help="generate vocalic benchmark images")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--noisy-per-vowel", type=int, default=20)
    p.add_argument("--nonvocalic", type=int, default=100)
    p.add_argument("--noise-flips", type=int, default=2)
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=cmd_gen_bench, report_dir=None)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "seed"):
        random.seed(args.seed)
        np.random.seed(args.seed % 2**32)
    # remember whether --fixedbv was user-supplied (coverage report mode
    # defaults to float traces)
    argv_list = list(sys.argv[1:] if argv is None else argv)
    args.fixedbv_given = any(a.startswith("--fixedbv") for a in argv_list)
    try:
        return args.func(args)
    except (CliError, NnetParseError, FxpError, VerifierError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except Exception as err:  # pragma: no cover
        log.exception("internal error")
        print(f"internal error: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
