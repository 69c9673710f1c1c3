"""Run every mock model over a synthetic eval set and write markdown reports.

    python scripts/run_desk_experiments.py --n 200 --out desk_runs

Writes one result set and one report per mock, plus summary.md with a row per
mock at each threshold. Optionally checks the served path against in-process runs.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from groundprobe.evalset import BuildConfig, build_eval_set, write_eval_set
from groundprobe.llm.stub import StubGenerator
from groundprobe.metrics import CELL_COLUMNS, cells, emit_report, report
from groundprobe.mocks import MockSpec, make_mock, serve_local
from groundprobe.runner import AdapterSpec, HTTPAdapter, SuiteConfig, run_suite
from groundprobe.synthetic import synthetic_annotations

MOCKS = (
    "oracle",
    "oracle:jitter=1.5",
    "prior",
    "coin",
    "yes",
    "composite:ground=prior,verify=coin",
    "oracle:indirect=0.5",
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200, help="synthetic annotations")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="desk_runs")
    ap.add_argument("--thresholds", default="0.5,0.7")
    ap.add_argument("--served", action="store_true", help="also run each mock over loopback HTTP")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    thresholds = tuple(float(t) for t in args.thresholds.split(","))

    anns = synthetic_annotations(args.n, args.seed)
    items, failures = build_eval_set(anns, StubGenerator(args.seed), args.seed, BuildConfig())
    write_eval_set(out / "eval_set.jsonl", items, seed=args.seed, dataset_id="synthetic")
    logging.info("built %d items (%d generation failures)", len(items), len(failures))

    cfg = SuiteConfig(seed=args.seed, dataset_id="synthetic")
    rows = ["| mock | IoU | " + " | ".join(CELL_COLUMNS) + " | self-IoU |", "|" + "---|" * (len(CELL_COLUMNS) + 3)]
    for text in MOCKS:
        mock_id = f"mock:{text}"
        mock = make_mock(MockSpec.parse(text, seed=args.seed), items, adapter_id=mock_id)
        rs = run_suite(mock, items, cfg)
        stem = text.replace(":", "_").replace(",", "_").replace("=", "-")
        rs.write(out / f"{stem}.results.jsonl")
        reps = report(rs, thresholds)
        (out / f"{stem}.md").write_text(emit_report(reps, "markdown"), encoding="utf-8")
        for r in reps:
            rows.append(f"| {text} | {r.threshold:g} | {cells(r)} | {r.self_agreement_iou:.3f} |")
        if args.served:
            with serve_local({mock_id: mock}) as server:
                remote = run_suite(HTTPAdapter(AdapterSpec(mock_id, server.url, model=mock_id)), items, cfg)
            same = remote.dumps() == rs.dumps()
            logging.info("%s: served run %s in-process run", text, "matches" if same else "DIFFERS FROM")
        logging.info("%s done", text)

    summary = "\n".join([f"# Desk runs ({len(items)} items, seed {args.seed})", "", *rows, ""])
    (out / "summary.md").write_text(summary, encoding="utf-8")
    print(summary)


if __name__ == "__main__":
    main()
