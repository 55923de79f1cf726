#!/usr/bin/env python3
"""Time the hot kernels on both backends.

The package picks one implementation at import time (numba unless
FOOTMETRY_DISABLE_NUMBA=1); this script times the compiled and the numpy
version of each kernel side by side in a single process and reports
per-call medians with the resulting speedup. Scenes come from the seeded
generator, so runs are comparable across machines.

Usage: python benchmarks/bench_kernels.py [--repeats N] [--csv out.csv]
"""

import argparse
import csv
import statistics
import sys
import time

import numpy as np

from footmetry import _kernels, scenes

SIZES = ((480, 270), (960, 540), (1920, 1080))


def _scene_pixels(width: int, height: int) -> np.ndarray:
    spec = scenes.SceneSpec(
        width=width,
        height=height,
        shape=scenes.Ellipse(
            cx=width // 2,
            cy=height // 2,
            semi_x=int(width * 0.31),
            semi_y=int(height * 0.29),
        ),
        noise_sigma=8,
        penumbra_px=2,
        gradient=("horizontal", 0.2),
        seed=11,
    )
    return scenes.render(spec)[0]


def _median_ms(fn, args, repeats: int) -> float:
    fn(*args)  # warm (jit compile, page-in)
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        samples.append((time.perf_counter() - t0) * 1000.0)
    return statistics.median(samples)


def run(repeats: int):
    rows = []
    for width, height in SIZES:
        pixels = _scene_pixels(width, height)
        mask = (pixels < 128).astype(np.uint8)
        speckled = mask.copy()
        rng = np.random.default_rng(7)
        flip = rng.random(mask.shape) < 0.02
        speckled[flip] ^= 1

        cases = [
            ("sweep_hists", _kernels.sweep_hists_np, _kernels.sweep_hists_jit, (pixels,)),
            ("mask_counts", _kernels.mask_counts_np, _kernels.mask_counts_jit, (mask,)),
            ("denoise_pass", _kernels.denoise_np, _kernels.denoise_jit, (speckled, 2, 6, 10)),
        ]
        for name, np_fn, jit_fn, args in cases:
            np_ms = _median_ms(np_fn, args, repeats)
            jit_ms = _median_ms(jit_fn, args, repeats) if jit_fn is not None else None
            rows.append(
                {
                    "kernel": name,
                    "width": width,
                    "height": height,
                    "numpy_ms": np_ms,
                    "numba_ms": jit_ms,
                    "speedup": None if jit_ms is None else np_ms / jit_ms,
                }
            )
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=9, help="timed calls per cell")
    parser.add_argument("--csv", help="also write the table to this CSV path")
    args = parser.parse_args(argv)

    if not _kernels.USING_NUMBA:
        print("note: numba backend unavailable in this process; numpy column only", file=sys.stderr)

    rows = run(args.repeats)

    fmt = "{:<13} {:>11} {:>10} {:>10} {:>8}"
    print(fmt.format("kernel", "size", "numpy_ms", "numba_ms", "speedup"))
    for r in rows:
        print(
            fmt.format(
                r["kernel"],
                f"{r['width']}x{r['height']}",
                f"{r['numpy_ms']:.3f}",
                "-" if r["numba_ms"] is None else f"{r['numba_ms']:.3f}",
                "-" if r["speedup"] is None else f"{r['speedup']:.1f}",
            )
        )

    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
        print(f"csv {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
