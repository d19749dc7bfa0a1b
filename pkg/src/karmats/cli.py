"""Command-line front end.

Subcommands: simulate, bench, eval, fidelity, serve, convert. Report
paths write machine-readable output (CSV / canonical JSON) next to a
rendered PNG figure, so a run leaves both the numbers and the picture.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__, benchmarks, formats, metrics, plotting
from .graph import GraphError
from .simulation import DoClamp, ShiftNoise, SimulationConfig, SimulationError, simulate

_ERRORS = (
    GraphError,
    SimulationError,
    formats.FormatError,
    benchmarks.BenchError,
    ValueError,
    OSError,
)


def _parse_window(text: str, flag: str) -> tuple[int, int]:
    try:
        t0, t1 = text.split(":")
        return int(t0), int(t1)
    except ValueError:
        raise SystemExit(f"{flag}: expected T0:T1, got {text!r}")


def _parse_clamp(text: str) -> DoClamp:
    # VAR=VALUE@T0:T1 with VALUE a number or a category label
    try:
        head, window = text.rsplit("@", 1)
        name, raw = head.split("=", 1)
    except ValueError:
        raise SystemExit(f"--clamp: expected VAR=VALUE@T0:T1, got {text!r}")
    t0, t1 = _parse_window(window, "--clamp")
    value: float | str
    try:
        value = float(raw)
    except ValueError:
        value = raw
    return DoClamp(variable=name, value=value, t_start=t0, t_end=t1)


def _parse_shift(text: str) -> ShiftNoise:
    # VAR=gaussian:MEAN,STD@T0:T1 or VAR=uniform:LO,HI@T0:T1 or VAR=none@T0:T1
    try:
        head, window = text.rsplit("@", 1)
        name, spec = head.split("=", 1)
    except ValueError:
        raise SystemExit(f"--shift-noise: expected VAR=KIND:ARGS@T0:T1, got {text!r}")
    t0, t1 = _parse_window(window, "--shift-noise")
    from .functionals import NoiseSpec

    if spec == "none":
        noise = NoiseSpec.none()
    else:
        try:
            kind, args = spec.split(":", 1)
            a, b = (float(x) for x in args.split(","))
        except ValueError:
            raise SystemExit(f"--shift-noise: bad spec {spec!r}")
        if kind == "gaussian":
            noise = NoiseSpec.gaussian(a, b)
        elif kind == "uniform":
            noise = NoiseSpec.uniform(a, b)
        else:
            raise SystemExit(f"--shift-noise: unknown kind {kind!r}")
    return ShiftNoise(variable=name, noise=noise, t_start=t0, t_end=t1)


def cmd_simulate(args: argparse.Namespace) -> int:
    graph = formats.load_graph(Path(args.graph))
    interventions: list = [_parse_clamp(c) for c in args.clamp]
    interventions += [_parse_shift(s) for s in args.shift_noise]
    segment = None
    init = "offsets"
    if args.init_segment:
        segment = formats.load_series(Path(args.init_segment))
        init = "segment"
    config = SimulationConfig(
        length=args.length,
        seed=args.seed,
        burn_in=args.burn_in,
        init=init,
        segment=segment,
        interventions=tuple(interventions),
        record_latent=args.record_latent,
    )
    frame = simulate(graph, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, meta_path = formats.save_series(frame, out / "run")
    print(f"wrote {csv_path}")
    print(f"wrote {meta_path}")
    if not args.no_plot:
        fig_path = plotting.plot_series(frame, out / "trace.png", show_latent=args.record_latent)
        print(f"wrote {fig_path}")
    print(f"{frame.length} steps x {len(frame.names)} columns (seed {args.seed})")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    obj = json.loads(Path(args.config).read_text("utf-8"))
    config = benchmarks.suite_config_from_obj(obj)
    manifest = benchmarks.build_suite(config, args.out)
    out = Path(args.out)
    n_series = sum(len(r["series"]) for r in manifest["replicates"])
    print(f"wrote {out / 'manifest.json'}")
    print(
        f"suite {config.name!r}: {config.structure}/{config.lag_regime}/{config.enr_regime}, "
        f"{config.replicates} replicate(s), {n_series} series file(s)"
    )
    if args.plot:
        for entry in manifest["replicates"]:
            for series in entry["series"]:
                csv_path = out / series["csv"]["path"]
                frame = formats.load_series(csv_path)
                fig = csv_path.with_suffix("").with_suffix("")  # strip .series.csv
                fig_path = plotting.plot_series(frame, Path(str(fig) + ".trace.png"))
                print(f"wrote {fig_path}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    truth = formats.load_graph(Path(args.truth))
    estimate = formats.load_graph(Path(args.estimate))
    report = metrics.evaluate(truth, estimate, lag_window=args.lag_window)
    headline = report.summary if args.summary else report.windowed
    print(
        f"{headline.level} match (window {headline.lag_window}): "
        f"precision={headline.precision:.4f} recall={headline.recall:.4f} f1={headline.f1:.4f} "
        f"(TP={headline.tp} FP={headline.fp} FN={headline.fn})"
    )
    sid_level = report.sid.summary_effective_level
    print(f"sid lagged={report.sid.lagged} summary={report.sid.summary} (summary level: {sid_level})")
    print(f"note: {report.sid.note}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report_path = out / "eval.report.json"
        report_path.write_bytes(formats.canonical_json_bytes(asdict(report)))
        print(f"wrote {report_path}")
        edges_path = out / "eval.edges.csv"
        with edges_path.open("w", encoding="utf-8") as fh:
            fh.write("outcome,source,target,estimate_lag,truth_lag\n")
            for est, tru in headline.matched:
                fh.write(f"tp,{est[0]},{est[1]},{est[2]},{tru[2]}\n")
            for e in headline.false_positives:
                fh.write(f"fp,{e[0]},{e[1]},{e[2]},\n")
            for e in headline.false_negatives:
                fh.write(f"fn,{e[0]},{e[1]},,{e[2]}\n")
        print(f"wrote {edges_path}")
        fig_path = plotting.plot_match_report(headline, out / "eval.png")
        print(f"wrote {fig_path}")
    return 0


def cmd_fidelity(args: argparse.Namespace) -> int:
    real = formats.load_series(Path(args.real))
    synth = formats.load_series(Path(args.synth))
    report = metrics.fidelity(real, synth)
    print(
        f"matrix_corr={report.matrix_corr:.4f} cosine={report.cosine:.4f} "
        f"mae={report.mae:.4f} rmse={report.rmse:.4f}"
    )
    print(
        f"frobenius={report.frobenius:.4f} spectral_l2={report.spectral_l2:.4f} "
        f"lag1_real={report.lag1_real:.4f} lag1_synth={report.lag1_synth:.4f}"
    )
    if report.excluded:
        print(f"excluded zero-variance column(s): {', '.join(report.excluded)}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report_path = out / "fidelity.report.json"
        report_path.write_bytes(formats.canonical_json_bytes(asdict(report)))
        print(f"wrote {report_path}")
        fig_path = plotting.plot_correlation_pair(real, synth, out / "fidelity.png", report)
        print(f"wrote {fig_path}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    port = args.port
    if port is None:
        port = int(os.environ.get("KARMATS_PORT", "8754"))
    data_dir = args.data_dir or os.environ.get("KARMATS_DATA_DIR")
    app = create_app(data_dir=data_dir, max_length=args.max_length)
    print(f"serving on {args.host}:{port} (data dir: {app.state.store.data_dir})")
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def cmd_convert(args: argparse.Namespace) -> int:
    src, dst = Path(args.src), Path(args.dst)
    if src.name.endswith(".dscp.json") and dst.name.endswith(".dscp.json"):
        formats.save_graph(formats.load_graph(src), dst)
    elif src.name.endswith(".series.csv") and dst.suffix == ".json":
        frame = formats.load_series(src)
        obj = {
            "meta": formats.series_meta(frame),
            "columns": {
                v.name: (
                    [float(x) for x in frame.columns[v.name]]
                    if v.kind == "continuous"
                    else [int(x) for x in frame.columns[v.name]]
                )
                for v in frame.variables
            },
        }
        dst.write_bytes(formats.canonical_json_bytes(obj))
    elif src.suffix == ".json" and dst.name.endswith(".series.csv"):
        obj = json.loads(src.read_text("utf-8"))
        if "columns" not in obj or "meta" not in obj:
            raise formats.FormatError(f"{src}: expected a series JSON with meta and columns")
        meta = obj["meta"]
        names = [v["name"] for v in meta["variables"]]
        header = ",".join(names)
        rows = zip(*(obj["columns"][n] for n in names))
        csv_text = header + "\n"
        variables = {v["name"]: v for v in meta["variables"]}
        for row in rows:
            cells = []
            for name, value in zip(names, row):
                v = variables[name]
                if v.get("kind", "continuous") == "continuous":
                    cells.append(repr(float(value)))
                elif v["kind"] == "binary":
                    cells.append(str(int(value)))
                else:
                    cells.append(v["categories"][int(value)])
            csv_text += ",".join(cells) + "\n"
        dst.write_text(csv_text, "utf-8")
        base = dst.name[: -len(".series.csv")]
        dst.with_name(base + ".series.meta.json").write_bytes(
            formats.canonical_json_bytes(meta)
        )
    elif dst.name.endswith(".suggestions.json"):
        sset = formats.import_discovery(
            src.read_text("utf-8"), fmt=args.from_format, algorithm=args.algorithm
        )
        formats.save_suggestions(sset, dst)
    else:
        raise formats.FormatError(
            f"no converter for {src.name} -> {dst.name}; supported: graph->graph, "
            "series.csv<->json, discovery->suggestions.json"
        )
    print(f"wrote {dst}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="karmats",
        description="Edit, simulate, benchmark, and score lag-indexed causal processes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a graph and write series + trace figure")
    p.add_argument("graph", help="path to a *.dscp.json document")
    p.add_argument("--length", type=int, required=True, help="output steps to record")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--init-segment", default=None, help="series CSV used as starting history")
    p.add_argument("--clamp", action="append", default=[], metavar="VAR=VALUE@T0:T1")
    p.add_argument("--shift-noise", action="append", default=[], metavar="VAR=KIND:A,B@T0:T1")
    p.add_argument("--record-latent", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("bench", help="generate a benchmark suite from a config JSON")
    p.add_argument("config", help="suite config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--plot", action="store_true", help="render a trace figure per series")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("eval", help="score an estimated graph against a truth graph")
    p.add_argument("truth")
    p.add_argument("estimate")
    p.add_argument("--lag-window", type=int, default=0)
    p.add_argument("--summary", action="store_true", help="headline the lag-collapsed score")
    p.add_argument("--out", default=None, help="directory for report JSON, edge CSV, figure")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("fidelity", help="compare two series files")
    p.add_argument("real")
    p.add_argument("synth")
    p.add_argument("--out", default=None, help="directory for report JSON and figure")
    p.set_defaults(fn=cmd_fidelity)

    p = sub.add_parser("serve", help="start the HTTP editing/simulation service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None, help="default: $KARMATS_PORT or 8754")
    p.add_argument("--data-dir", default=None, help="default: $KARMATS_DATA_DIR or a temp dir")
    p.add_argument("--max-length", type=int, default=200_000)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("convert", help="convert between supported file formats")
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--algorithm", default=None, help="algorithm name for suggestion output")
    p.add_argument(
        "--from-format",
        default="edge-list",
        choices=("edge-list", "lag-matrix"),
        help="discovery input layout",
    )
    p.set_defaults(fn=cmd_convert)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
