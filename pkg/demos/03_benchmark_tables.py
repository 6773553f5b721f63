"""Side-by-side "original vs proposed" tables over a PGM directory.

    python demos/03_benchmark_tables.py [dataset_dir] [out_dir]

Equivalent CLI:

    icrics bench --dataset tests/data/corpus --rates 0.1,0.25,0.5 --recon ista --out rows.csv
    icrics bench --dataset tests/data/corpus --rates 0.1,0.25,0.5 --recon ista --out table.md --format md
"""

import sys
from pathlib import Path

from icrics.bench import BenchConfig, emit_csv, emit_markdown, format_markdown, run_benchmark, summarize
from icrics.recon import ReconstructorSpec

root = Path(__file__).parents[1]
dataset = Path(sys.argv[1]) if len(sys.argv) > 1 else root / "tests/data/corpus"
out = Path(sys.argv[2]) if len(sys.argv) > 2 else Path("bench_out")
out.mkdir(exist_ok=True)

for kind in ("pinv", "ista"):
    cfg = BenchConfig(str(dataset), rates=(0.1, 0.25, 0.5), recon=ReconstructorSpec(kind))
    rows = run_benchmark(cfg, workers=2)
    emit_csv(rows, out / f"rows_{kind}.csv")
    # per-rate averages double as curve data (rate on x, PSNR or SSIM on y)
    emit_csv(summarize(rows), out / f"curve_{kind}.csv")
    emit_markdown(summarize(rows), out / f"table_{kind}.md")
    print(f"## {kind}\n")
    print(format_markdown(summarize(rows)))
    worst = min(rows, key=lambda r: r.psnr_gain)
    print(f"largest PSNR loss: {worst.image} r={worst.rate} ({worst.psnr_gain:+.3f} dB)\n")
