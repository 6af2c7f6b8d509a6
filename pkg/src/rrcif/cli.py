"""Command-line front end.

Subcommands:
  estimate   one recording -> per-window fused rates (CSV)
  benchmark  a directory of record/reference pairs -> per-subject CSV and an
             aggregate JSON report
  sweep      threshold sweep over a dataset -> plot-ready CSV
  synth      write a synthetic recording and its reference

Exit codes: 0 ok, 2 I/O or data errors, 64 usage errors. Output files start
with a versioned provenance comment line. The RRCIF_THREADS environment
variable caps the benchmark worker pool.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import evaluation, pipeline, signal_io
from .errors import RrcifError
from .fusion import FusionResult
from .riv import RivKind
from .signal_io import ModDepths, SynthSpec
from .spectral import DEFAULT_THRESHOLD, fit_power_law, window_spectrum

EXIT_OK = 0
EXIT_IO = 2
EXIT_USAGE = 64

try:
    VERSION = version("rrcif")
except PackageNotFoundError:  # running from a source tree
    VERSION = "0.1.0"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _header(method: str, t: float) -> str:
    return f"# rrcif {VERSION} method={method} t={t:g}\n"


def _check_t(parser, t):
    if not 0.0 <= t <= 1.0:
        parser.error(f"--t must lie in [0, 1], got {t}")


def _write_estimates(path, fusions: list[FusionResult], grid, method, t):
    lines = [_header(method, t), "window_start_s,rr_fusion,c_fusion,retained,contributors\n"]
    for fusion, (start, _) in zip(fusions, grid.windows):
        rr = f"{fusion.rr_fusion:.4f}" if fusion.rr_fusion is not None else ""
        c = f"{fusion.c_fusion:.6g}" if fusion.c_fusion is not None else ""
        names = "|".join(k.name for k in fusion.contributors)
        lines.append(f"{start:.1f},{rr},{c},{int(fusion.retained)},{names}\n")
    _emit(path, lines)


def _emit(path, lines):
    if path == "-":
        sys.stdout.writelines(lines)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(lines)


def _dump_beats(path, beats):
    lines = ["t_foot,v_foot,t_peak,v_peak,width50,rise25_75,period,artifact\n"]
    for b in beats:
        period = f"{b.period:.6g}" if b.period is not None else ""
        lines.append(
            f"{b.t_foot:.4f},{b.v_foot:.6g},{b.t_peak:.4f},{b.v_peak:.6g},"
            f"{b.width50:.6g},{b.rise25_75:.6g},{period},{int(b.artifact)}\n"
        )
    _emit(path, lines)


def _dump_riv(directory, rivs):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for kind, series in rivs.items():
        lines = ["t,value,artifact\n"]
        for t, v, a in zip(series.times, series.values, series.artifact_mask):
            lines.append(f"{t:.4f},{v:.8g},{int(a)}\n")
        _emit(directory / f"{kind.name.lower()}.csv", lines)


def _dump_spectrum(out_dir, analysis, window_index, kind_name):
    kind = RivKind[kind_name.upper()]
    window = analysis.grid.windows[window_index]
    spectrum = window_spectrum(analysis.rivs[kind], window)
    if spectrum is None:
        raise RrcifError(f"window {window_index} of {kind.name} is artifact-skipped")
    spectrum = fit_power_law(spectrum)
    lines = ["f,P,P_fit,P_out\n"]
    for f, p, pf, po in zip(spectrum.freqs, spectrum.P, spectrum.P_fit, spectrum.P_out):
        lines.append(f"{f:.6g},{p:.8g},{pf:.8g},{po:.8g}\n")
    path = Path(out_dir) / f"spectrum_w{window_index}_{kind.name.lower()}.csv"
    _emit(path, lines)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_estimate(args, parser):
    _check_t(parser, args.t)
    record = signal_io.read_record(args.input)
    analysis = pipeline.analyze_record(record, args.t)
    fusions = pipeline.fuse_all(analysis, args.method, args.t)
    _write_estimates(args.out, fusions, analysis.grid, args.method, args.t)
    if args.dump_beats:
        _dump_beats(args.dump_beats, analysis.beats)
    if args.dump_riv:
        _dump_riv(args.dump_riv, analysis.rivs)
    if args.dump_spectrum:
        raw_index, raw_kind = args.dump_spectrum
        try:
            window_index = int(raw_index)
        except ValueError:
            parser.error(f"--dump-spectrum window must be an integer, got {raw_index!r}")
        if raw_kind.upper() not in RivKind.__members__:
            parser.error(f"--dump-spectrum kind must be one of {[k.name for k in RivKind]}, got {raw_kind!r}")
        if not 0 <= window_index < analysis.grid.count:
            parser.error(f"--dump-spectrum window {window_index} outside 0..{analysis.grid.count - 1}")
        out_dir = Path(args.out).parent if args.out != "-" else Path(".")
        _dump_spectrum(out_dir, analysis, window_index, raw_kind)
    return EXIT_OK


def _load_dataset(directory):
    """Yield (record_path, reference_path_or_None) pairs in id order."""
    directory = Path(directory)
    pairs = []
    for path in sorted(directory.glob("*.csv")):
        if path.stem.endswith("_ref"):
            continue
        ref = path.with_name(path.stem + "_ref.csv")
        pairs.append((path, ref if ref.exists() else None))
    for path in sorted(directory.glob("*.json")):
        pairs.append((path, None))
    return pairs


def _analyze_subjects(pairs, t):
    """Analyze dataset pairs in a bounded worker pool; returns (subjects, skipped)."""
    max_workers = int(os.environ.get("RRCIF_THREADS", "0")) or min(8, os.cpu_count() or 1)

    def load_and_analyze(pair):
        record_path, ref_path = pair
        if record_path.suffix.lower() == ".json":
            record, reference = signal_io.read_record_json(record_path)
            if reference is None:
                raise RrcifError(f"{record_path}: JSON record has no embedded reference")
        else:
            record = signal_io.read_record(record_path)
            if ref_path is None:
                raise RrcifError(f"{record_path}: no matching *_ref.csv reference")
            reference = signal_io.read_reference(ref_path)
        return pipeline.subject_windows(record, reference, t)

    subjects, skipped = [], []
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        for pair, outcome in zip(pairs, pool.map(lambda p: _try(load_and_analyze, p), pairs)):
            if isinstance(outcome, Exception):
                print(f"warning: skipping {pair[0].name}: {outcome}", file=sys.stderr)
                skipped.append(pair[0].name)
            else:
                subjects.append(outcome)
    subjects.sort(key=lambda s: s.id)
    return subjects, skipped


def _try(fn, arg):
    try:
        return fn(arg)
    except Exception as exc:  # noqa: BLE001 - collected per subject
        return exc


def _cmd_benchmark(args, parser):
    _check_t(parser, args.t)
    methods = [m.strip().lower() for m in args.methods.split(",")]
    for m in methods:
        if m not in pipeline.METHODS:
            parser.error(f"unknown method {m!r}")
    pairs = _load_dataset(args.dataset)
    if not pairs:
        raise RrcifError(f"{args.dataset}: no record files found")
    subjects, skipped = _analyze_subjects(pairs, args.t)
    if not subjects:
        raise RrcifError(f"{args.dataset}: no subject could be analyzed")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    results = {}
    for method in methods:
        per_subject = []
        for s in subjects:
            fusions = pipeline.fuse_estimates(s.estimates, method, args.t)
            per_subject.append(
                evaluation.score_subject(fusions, s.reference, s.grid, s.id, method.upper(), args.t)
            )
        results[method] = per_subject

    lines = [_header(",".join(methods), args.t), "id,method,t,rmse,retention\n"]
    for method in methods:
        for r in results[method]:
            rmse = f"{r.rmse:.6g}" if r.rmse is not None else ""
            lines.append(f"{r.id},{r.method},{r.t:.2f},{rmse},{r.retention:.6g}\n")
    _emit(out_dir / "subjects.csv", lines)

    report = {
        "version": VERSION,
        "t": args.t,
        "subjects": len(subjects),
        "skipped": skipped,
        "methods": {},
        "wilcoxon_bonferroni": {},
    }
    for method in methods:
        rmses = [r.rmse for r in results[method] if r.rmse is not None]
        report["methods"][method] = {
            "rmse_median": float(np.median(rmses)) if rmses else None,
            "retention_median": float(np.median([r.retention for r in results[method]])),
        }
    if len(subjects) >= 6:
        n_comparisons = 3
        for metric, pick in (("rmse", lambda r: np.nan if r.rmse is None else r.rmse), ("retention", lambda r: r.retention)):
            table = {}
            for i, m1 in enumerate(methods):
                for m2 in methods[i + 1 :]:
                    x = np.array([pick(r) for r in results[m1]])
                    y = np.array([pick(r) for r in results[m2]])
                    keep = ~(np.isnan(x) | np.isnan(y))
                    if keep.sum() >= 6:
                        p = evaluation.wilcoxon_signed_rank(x[keep], y[keep])
                        table[f"{m1}_vs_{m2}"] = min(1.0, n_comparisons * p)
            report["wilcoxon_bonferroni"][metric] = table
    if "cif" in methods:
        pooled = [pair for r in results["cif"] for pair in r.pairs]
        if len(pooled) >= 2:
            stats = evaluation.agreement(pooled)
            report["agreement_cif"] = {
                "r": None if np.isnan(stats.r) else stats.r,
                "bias": stats.bias,
                "loa_low": stats.loa_low,
                "loa_high": stats.loa_high,
                "n_pairs": stats.n_pairs,
            }
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def _cmd_sweep(args, parser):
    if args.t_min > args.t_max:
        parser.error(f"--t-min {args.t_min} exceeds --t-max {args.t_max}")
    if args.t_step <= 0:
        parser.error("--t-step must be positive")
    for t in (args.t_min, args.t_max):
        _check_t(parser, t)
    n_steps = int(np.floor((args.t_max - args.t_min) / args.t_step + 1e-9)) + 1
    t_grid = [round(args.t_min + i * args.t_step, 10) for i in range(n_steps)]

    pairs = _load_dataset(args.dataset)
    if not pairs:
        raise RrcifError(f"{args.dataset}: no record files found")
    subjects, _ = _analyze_subjects(pairs, t=0.0)
    if not subjects:
        raise RrcifError(f"{args.dataset}: no subject could be analyzed")
    rows = evaluation.sweep(subjects, t_grid)
    lines = [_header("cif", args.t_min), "t,rmse_p25,rmse_median,rmse_p75,retention_median\n"]
    for row in rows:
        lines.append(
            f"{row.t:.2f},{row.rmse_p25:.6g},{row.rmse_median:.6g},{row.rmse_p75:.6g},{row.retention_median:.6g}\n"
        )
    _emit(args.out, lines)
    return EXIT_OK


def _cmd_synth(args, parser):
    depths = ModDepths(
        intensity=args.depths[0],
        amplitude=args.depths[1],
        frequency=args.depths[2],
        width=args.depths[3],
        slope=args.depths[4],
    )
    spec = SynthSpec(
        rr=args.rr,
        hr=args.hr,
        duration_s=args.duration,
        fs=args.fs,
        depths=depths,
        noise_sd=args.noise_sd,
        seed=args.seed,
    )
    record, reference = signal_io.synthesize(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    provenance = (
        f"rrcif {VERSION} synth rr={spec.rr:g} hr={spec.hr:g} fs={spec.fs:g} "
        f"noise_sd={spec.noise_sd:g} seed={spec.seed}"
    )
    signal_io.write_record(record, out.with_suffix(".csv"), comment=provenance)
    signal_io.write_reference(reference, out.with_name(out.stem + "_ref.csv"), comment=provenance)
    print(f"wrote {out.with_suffix('.csv')} and {out.with_name(out.stem + '_ref.csv')}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="rrcif", description="Respiratory rate from PPG via covariance intersection fusion.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="per-window fused rates for one recording")
    p.add_argument("input", help="PPG CSV (t,ppg) or record JSON")
    p.add_argument("--method", choices=pipeline.METHODS, default="cif")
    p.add_argument("--t", type=float, default=DEFAULT_THRESHOLD, help="noise index threshold")
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")
    p.add_argument("--dump-beats", metavar="PATH", help="also write detected beats as CSV")
    p.add_argument("--dump-riv", metavar="DIR", help="also write one CSV per variation series")
    p.add_argument("--dump-spectrum", nargs=2, metavar=("WINDOW", "KIND"), help="also write one window's spectrum CSV")
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("benchmark", help="score methods over a dataset directory")
    p.add_argument("dataset", help="directory of <id>.csv + <id>_ref.csv pairs (or JSON records)")
    p.add_argument("--methods", default="cif,sf3,sf5")
    p.add_argument("--t", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--out", default="benchmark_out", help="output directory")
    p.set_defaults(fn=_cmd_benchmark)

    p = sub.add_parser("sweep", help="threshold sweep over a dataset directory")
    p.add_argument("dataset")
    p.add_argument("--t-min", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=0.3)
    p.add_argument("--t-step", type=float, default=0.01)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("synth", help="write a synthetic recording + reference")
    p.add_argument("--rr", type=float, required=True, help="true respiratory rate, breaths/min")
    p.add_argument("--hr", type=float, required=True, help="heart rate, beats/min")
    p.add_argument("--duration", type=float, default=480.0)
    p.add_argument("--fs", type=float, default=100.0)
    p.add_argument(
        "--depths",
        type=float,
        nargs=5,
        default=[0.1, 0.1, 0.1, 0.1, 0.1],
        metavar=("INTENSITY", "AMPLITUDE", "FREQUENCY", "WIDTH", "SLOPE"),
    )
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(fn=_cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, parser)
    except (RrcifError, OSError) as exc:
        print(f"rrcif: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
