"""Command line interface.

Subcommands: threshold, bench, measure, batch, stats, calibrate, scene,
serve. All stdout and file payloads are byte-deterministic for a given
input, seed, and configuration; wall-clock timing goes to stderr so it
never perturbs captured output. Errors print a stage-labeled message to
stderr and exit with status 2.
"""

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import calibration, scenes, stats
from .classical import MethodId, classical_threshold
from .errors import FootmetryError
from .imaging import gray_to_png, histogram, load_gray, mask_to_png
from .measure import MeasureParams, measure_foot
from .soit import SearchConfig, binarize, curve_to_csv, soit_search

_MEASURE_COLUMNS = ("length_side_cm", "length_under_cm", "height_cm", "width_cm")


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _read_image(path: str):
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as e:
        raise FootmetryError(f"cannot read {path}: {e.strerror}") from e
    return load_gray(data)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return str(int(v))
    return "" if v is None else str(v)


def _add_search_flags(sub) -> None:
    sub.add_argument("--lo", type=int, default=0, help="lowest threshold candidate")
    sub.add_argument("--hi", type=int, default=255, help="highest threshold candidate")
    sub.add_argument("--step", type=int, default=1, help="candidate spacing")
    sub.add_argument("--min-frac", type=float, default=0.2, help="feasibility window lower bound")
    sub.add_argument("--max-frac", type=float, default=0.7, help="feasibility window upper bound")
    sub.add_argument("--edge-weight", type=float, default=20.0, help="border-contact penalty weight")
    sub.add_argument("--polarity", choices=["dark", "bright"], default="dark")
    sub.add_argument("--literal-divisor", action="store_true",
                     help="normalize row noise by width instead of height")


def _search_from_args(args) -> SearchConfig:
    return SearchConfig(
        lo=args.lo, hi=args.hi, step=args.step,
        min_frac=args.min_frac, max_frac=args.max_frac,
        edge_weight=args.edge_weight, polarity=args.polarity,
        literal_divisor=args.literal_divisor,
    )


# ---------------------------------------------------------------------------
# threshold


def _cmd_threshold(args) -> int:
    img = _read_image(args.image)
    t0 = time.perf_counter()
    lines = [f"method {args.method}"]
    if args.method == "soit":
        result = soit_search(img, _search_from_args(args))
        mask = result.mask
        total = img.height * img.width
        lines += [
            f"threshold {result.best.threshold}",
            f"z {result.best.z!r}",
            f"nac_fraction {result.best.nac / total!r}",
            f"feasible {int(result.best.feasible)}",
        ]
        if args.curve_csv:
            Path(args.curve_csv).write_text(curve_to_csv(result.curve, total), encoding="utf-8")
            lines.append(f"curve_csv {args.curve_csv}")
    else:
        params = {}
        if args.method == "percentile":
            params["fraction"] = args.percentile_fraction
        if args.method == "renyi_entropy":
            params["alpha"] = args.renyi_alpha
        if args.method == "li":
            params["variant"] = args.li_variant
        t = classical_threshold(histogram(img), args.method, **params)
        mask = binarize(img, t, args.polarity)
        total = img.height * img.width
        lines += [f"threshold {t}", f"nac_fraction {mask.count() / total!r}"]
    elapsed = time.perf_counter() - t0

    if args.out:
        Path(args.out).write_bytes(mask_to_png(mask))
        lines.append(f"mask {args.out}")
    print("\n".join(lines))
    print(f"elapsed_s {elapsed:.3f}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# bench


def _bench_methods(raw: str) -> list[str]:
    if raw == "all":
        return ["soit"] + [m.value for m in MethodId]
    names = [m.strip() for m in raw.split(",") if m.strip()]
    for n in names:
        if n != "soit":
            MethodId(n)  # raises ValueError for unknown names
    return names


def _cmd_bench(args) -> int:
    tiers = [t.strip() for t in args.tiers.split(",") if t.strip()]
    for t in tiers:
        if t not in scenes.TIERS:
            return _fail(f"unknown tier {t!r}; expected one of {', '.join(scenes.TIERS)}")
    try:
        methods = _bench_methods(args.methods)
    except ValueError as e:
        return _fail(str(e))

    rows = []
    for tier in tiers:
        for seed in range(args.seeds):
            scene = scenes.generate(scenes.lighting_tier(tier, seed))
            hist = histogram(scene.image)
            for method in methods:
                if method == "soit":
                    try:
                        mask = soit_search(scene.image).mask
                    except FootmetryError as e:
                        rows.append((tier, method, seed, "", f"{type(e).__name__}: {e}"))
                        continue
                else:
                    try:
                        t = classical_threshold(hist, method)
                    except FootmetryError as e:
                        rows.append((tier, method, seed, "", f"{type(e).__name__}: {e}"))
                        continue
                    mask = binarize(scene.image, t, "dark")
                rows.append((tier, method, seed, repr(scenes.iou(mask, scene.truth)), ""))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tier", "method", "seed", "iou", "error"])
    w.writerows(rows)
    Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    print(f"bench {args.out} rows {len(rows)}")

    if not args.no_plots:
        plot_path = str(Path(args.out).with_suffix(".png"))
        _bench_plot(rows, tiers, methods, plot_path)
        print(f"plot {plot_path}")
    return 0


def _bench_plot(rows, tiers, methods, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    means = {}
    for tier in tiers:
        for method in methods:
            vals = [float(r[3]) for r in rows if r[0] == tier and r[1] == method and r[3] != ""]
            means[(tier, method)] = sum(vals) / len(vals) if vals else 0.0
    fig, ax = plt.subplots(figsize=(max(6, len(methods) * 0.8), 4))
    width = 0.8 / len(tiers)
    for i, tier in enumerate(tiers):
        xs = [j + i * width for j in range(len(methods))]
        ax.bar(xs, [means[(tier, m)] for m in methods], width=width, label=tier)
    ax.set_xticks([j + width * (len(tiers) - 1) / 2 for j in range(len(methods))])
    ax.set_xticklabels(methods, rotation=60, ha="right")
    ax.set_ylabel("mean IoU")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# ---------------------------------------------------------------------------
# measure / batch


def _measure_params_from_args(args) -> MeasureParams:
    background = None
    if args.bg != "auto":
        background = int(args.bg)
    return MeasureParams(
        background=background,
        delta=args.delta,
        curve_fraction=args.curve_fraction,
        bias_correction_cm=args.bias_cm,
        split_row=args.split_row,
        search=_search_from_args(args),
    )


def _measure_rows(paths, profile, params):
    rows = []
    diags = {}
    for path in paths:
        try:
            img = _read_image(path)
            m = measure_foot(img, profile, params)
        except FootmetryError as e:
            rows.append({"image": path, "ok": 0, "error": str(e)})
            continue
        row = {"image": path, "ok": 1, "error": ""}
        for c in _MEASURE_COLUMNS:
            row[c] = getattr(m, c)
        row["distance_to_background_px"] = m.distance_to_background_px
        rows.append(row)
        diags[path] = {
            **{k: v for k, v in m.diagnostics.items()},
            "curve": [list(entry) for entry in m.diagnostics["curve"]],
            "upper_curve": [[c, r] for c, r in m.upper_curve],
        }
    return rows, diags


def _write_measure_csv(rows, out):
    header = ["image", "ok"] + list(_MEASURE_COLUMNS) + ["distance_to_background_px", "error"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(k)) for k in header])
    text = buf.getvalue()
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _run_measure(args, batch: bool) -> int:
    try:
        profile = calibration.load(args.profile)
    except (OSError, ValueError) as e:
        return _fail(f"cannot load calibration profile: {e}")
    try:
        params = _measure_params_from_args(args)
    except ValueError as e:
        return _fail(str(e))

    rows, diags = _measure_rows(args.images, profile, params)
    _write_measure_csv(rows, args.out)
    if args.diag:
        Path(args.diag).write_text(json.dumps(diags, indent=2, sort_keys=True), encoding="utf-8")

    failures = [r for r in rows if not r["ok"]]
    for r in failures:
        print(f"{r['image']}: {r['error']}", file=sys.stderr)
    if batch:
        return 0 if len(failures) < len(rows) else 2
    return 0 if not failures else 2


def _cmd_measure(args) -> int:
    return _run_measure(args, batch=False)


def _cmd_batch(args) -> int:
    if not args.images:
        return _fail("batch needs at least one image")
    return _run_measure(args, batch=True)


# ---------------------------------------------------------------------------
# stats


def _cmd_stats(args) -> int:
    try:
        rows = stats.load_reference_table(args.table)
    except (OSError, ValueError) as e:
        return _fail(str(e))
    report = stats.agreement_report(rows)
    columns = stats.MANUAL_COLUMNS + stats.DEVICE_COLUMNS
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["statistic"] + list(columns))
    order = stats.DESCRIPTIVE_ROWS + ("mae", "pearson_r", "t_p", "f_p")
    for name in order:
        w.writerow([name] + [_fmt(report[name][c]) for c in columns])
    text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"report {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# calibrate


def _cmd_calibrate(args) -> int:
    by_view: dict[str, list[calibration.ScaleObservation]] = {}
    try:
        with open(args.observations, encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            required = {"view", "distance_px", "px_per_cm"}
            missing = required - set(reader.fieldnames or [])
            if missing:
                return _fail(f"observations file is missing column(s): {', '.join(sorted(missing))}")
            for rec in reader:
                by_view.setdefault(rec["view"], []).append(
                    calibration.ScaleObservation(float(rec["distance_px"]), float(rec["px_per_cm"]))
                )
    except OSError as e:
        return _fail(f"cannot read {args.observations}: {e.strerror}")
    except ValueError as e:
        return _fail(f"bad observation value: {e}")
    try:
        profile = calibration.build_profile(by_view)
    except ValueError as e:
        return _fail(str(e))
    calibration.save(profile, args.out)
    for view in sorted(profile.functions):
        fn = profile.functions[view]
        print(f"{view} slope {fn.slope!r} intercept {fn.intercept!r}")
    print(f"profile {args.out}")
    return 0


# ---------------------------------------------------------------------------
# scene


def _cmd_scene(args) -> int:
    if args.foot:
        spec = scenes.sample_photo_spec(args.seed)
        photo = scenes.generate_foot_photo(spec)
        Path(args.out).write_bytes(gray_to_png(photo.image))
        print(f"scene {args.out}")
        if args.profile_out:
            calibration.save(photo.profile, args.profile_out)
            print(f"profile {args.profile_out}")
        for k in (
            "length_side_cm",
            "length_under_cm",
            "height_cm",
            "width_cm",
            "distance_to_background_px",
        ):
            print(f"truth_{k} {photo.truth[k]!r}")
        return 0
    scene = scenes.generate(scenes.lighting_tier(args.tier, args.seed))
    Path(args.out).write_bytes(gray_to_png(scene.image))
    print(f"scene {args.out}")
    if args.truth_out:
        Path(args.truth_out).write_bytes(mask_to_png(scene.truth))
        print(f"truth {args.truth_out}")
    return 0


# ---------------------------------------------------------------------------
# serve


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="footmetry", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="threshold a single image")
    p.add_argument("image")
    p.add_argument("--method", default="soit",
                   choices=["soit"] + [m.value for m in MethodId])
    p.add_argument("--out", help="write the mask PNG here")
    p.add_argument("--curve-csv", help="write the score curve CSV here (soit only)")
    p.add_argument("--percentile-fraction", type=float, default=0.5)
    p.add_argument("--renyi-alpha", type=float, default=2.0)
    p.add_argument("--li-variant", choices=["iterative", "scan"], default="iterative")
    _add_search_flags(p)
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("bench", help="IoU of every method against tier scene ground truth")
    p.add_argument("--tiers", default="good,average,poor")
    p.add_argument("--methods", default="all")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--out", required=True)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=_cmd_bench)

    for name, multi in (("measure", False), ("batch", True)):
        p = sub.add_parser(name, help="measure feet from two-view photos")
        p.add_argument("images", nargs="+")
        p.add_argument("--profile", required=True, help="calibration profile path")
        p.add_argument("--out", help="CSV output path (stdout when omitted)")
        p.add_argument("--diag", help="diagnostics JSON sidecar path")
        p.add_argument("--bg", default="auto", help="background gray or 'auto'")
        p.add_argument("--delta", type=int, default=50)
        p.add_argument("--curve-fraction", type=float, default=0.5)
        p.add_argument("--bias-cm", type=float, default=0.0)
        p.add_argument("--split-row", type=int, default=None)
        _add_search_flags(p)
        p.set_defaults(func=_cmd_measure if not multi else _cmd_batch)

    p = sub.add_parser("stats", help="agreement statistics for a measurement table")
    p.add_argument("table", nargs="?", default=None,
                   help="CSV with the reference schema; bundled table when omitted")
    p.add_argument("--out", help="report CSV path (stdout when omitted)")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("calibrate", help="fit scale lines from observations CSV")
    p.add_argument("observations", help="CSV with view,distance_px,px_per_cm")
    p.add_argument("--out", required=True, help="profile output path")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("scene", help="render a synthetic scene PNG (plus truth mask)")
    p.add_argument("--tier", choices=list(scenes.TIERS), default="good")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--foot", action="store_true", help="render a two-view foot photo instead")
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out", dest="truth_out")
    p.add_argument("--profile-out", dest="profile_out",
                   help="with --foot, also write the matching calibration profile")
    p.set_defaults(func=_cmd_scene)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8077)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FootmetryError as e:
        return _fail(str(e))
    except ValueError as e:
        return _fail(str(e))


if __name__ == "__main__":
    sys.exit(main())
