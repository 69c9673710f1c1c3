"""Command-line entry point.

Option values resolve as flags > ``GROUNDPROBE_<OPTION>`` environment
variables > ``--config`` JSON file (a section per subcommand or flat keys).
Usage errors exit 2, runtime errors exit 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .core import GroundProbeError
from .evalset import (
    BuildConfig,
    filter_annotations,
    read_annotations,
    read_eval_set,
    write_annotations,
    write_eval_set,
    build_eval_set,
)
from .jsonio import dumps, write_records
from .llm.client import ChatClient, LLMConfig
from .llm.gateway import HeuristicJudge, LLMGenerator, LLMJudge
from .llm.stub import StubGenerator
from .metrics import ReportFormat, VerifyMode, emit_report, read_reports, report
from .mocks import MockSpec, make_mock, serve_local
from .runner import AdapterSpec, HTTPAdapter, PromptStrategy, ResultSet, SuiteConfig, load_adapters, run_suite
from .shift import ShiftConfig, ShiftMode, ffmpeg_command, frame_remap
from .synthetic import synthetic_annotations
from .vtune import ExportFormat, VTuneConfig, export, generate_all, stats

log = logging.getLogger("groundprobe")

ENV_PREFIX = "GROUNDPROBE_"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Validated knobs shared by the subcommands."""

    thresholds: tuple[float, ...] = (0.5,)
    seed: int = 0
    max_workers: int = 4
    backend: str = "stub"
    strategy: str = "standard"
    paths: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.thresholds or not all(0 < t <= 1 for t in self.thresholds):
            raise UsageError(f"thresholds must lie in (0, 1], got {self.thresholds}")
        if self.max_workers < 1:
            raise UsageError("parallelism must be >= 1")
        if self.backend not in ("stub", "live"):
            raise UsageError(f"backend must be stub or live, got {self.backend!r}")


def _thresholds(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise UsageError(f"bad threshold list {text!r}") from None


def _generator(args):
    if args.backend == "live":
        return LLMGenerator(ChatClient(LLMConfig.load(args.llm_config, model=args.model)))
    return StubGenerator(args.seed)


def _run_config(args) -> RunConfig:
    return RunConfig(
        thresholds=_thresholds(getattr(args, "thresholds", "0.5")),
        seed=args.seed,
        max_workers=getattr(args, "max_workers", 4),
        backend=getattr(args, "backend", "stub"),
        strategy=getattr(args, "strategy", "standard"),
    )


# subcommands


def cmd_synth(args) -> int:
    n = write_annotations(args.out, synthetic_annotations(args.n, args.seed))
    print(f"wrote {n} annotations to {args.out}")
    return 0


def cmd_build_set(args) -> int:
    cfg = _run_config(args)
    anns = read_annotations(args.input)
    if not args.no_filter:
        anns, dropped = filter_annotations(anns)
        if dropped:
            print(f"dropped {len(dropped)} annotations by the length filters", file=sys.stderr)
    build = BuildConfig(
        max_retries=args.max_retries,
        shift=ShiftConfig(iou_cap=args.iou_cap, mode=ShiftMode(args.shift_mode)),
        n_videos=args.n_videos,
        max_workers=cfg.max_workers,
        dataset_id=args.dataset_id,
    )
    items, failures = build_eval_set(anns, _generator(args), cfg.seed, build)
    for f in failures:
        print(f"generation failed: {f.item_id}: {f.reason}", file=sys.stderr)
    write_eval_set(args.out, items, dataset_id=args.dataset_id, seed=cfg.seed, backend=args.backend)
    print(f"wrote {len(items)} items to {args.out}")
    return 0


def cmd_shift_plan(args) -> int:
    items = read_eval_set(args.set)
    rows = []
    for it in items:
        row: dict[str, Any] = {"item_id": it.item_id, "video_id": it.video.video_id, **it.shift.to_dict()}
        if args.fps:
            row["frames"] = frame_remap(it.shift, args.fps)
        if args.ffmpeg:
            src = os.path.join(args.src_dir, f"{it.video.video_id}{args.ext}")
            dst = os.path.join(args.dst_dir, f"{it.item_id.replace('#', '_')}{args.ext}")
            row["command"] = ffmpeg_command(it.shift, src, dst)
        rows.append(row)
    write_records(args.out, None, rows)
    print(f"wrote {len(rows)} plans to {args.out}")
    return 0


def _adapter(args, items):
    name = args.adapter
    if args.adapter_url:
        return HTTPAdapter(AdapterSpec(name, args.adapter_url, model=name, max_retries=args.adapter_retries,
                                       backoff_s=0.05))
    if name.startswith("mock:"):
        spec = MockSpec.parse(name[len("mock:"):], seed=args.seed)
        return make_mock(spec, items, adapter_id=name)
    if not args.adapters_config:
        raise UsageError(f"adapter {name!r} needs --adapters-config (or use mock:<kind>)")
    adapters = load_adapters(args.adapters_config)
    if name not in adapters:
        raise UsageError(f"adapter {name!r} not in {args.adapters_config}")
    return adapters[name]


def cmd_run(args) -> int:
    cfg = _run_config(args)
    items = read_eval_set(args.set)
    adapter = _adapter(args, items)
    judge = LLMJudge(ChatClient(LLMConfig.load(args.llm_config, model=args.model))) if args.judge == "live" else HeuristicJudge()
    suite = SuiteConfig(
        strategy=PromptStrategy.parse(cfg.strategy),
        seed=cfg.seed,
        max_workers=cfg.max_workers,
        dataset_id=args.dataset_id or Path(args.set).stem,
        verify_suffix=args.verify_suffix,
    )
    rs = run_suite(adapter, items, suite, judge=judge, checkpoint=args.checkpoint)
    rs.write(args.out)
    errors = sum(1 for r in rs.records if r.error)
    print(f"wrote {len(rs.records)} records to {args.out}" + (f" ({errors} adapter errors)" if errors else ""))
    return 0


def cmd_score(args) -> int:
    cfg = _run_config(args)
    rs = ResultSet.read(args.results)
    reports = report(rs, cfg.thresholds, VerifyMode(args.verify_mode), args.gate)
    text = emit_report(reports, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {len(reports)} reports to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_report(args) -> int:
    if args.results:
        reports = report(
            ResultSet.read(args.results), _thresholds(args.thresholds), VerifyMode(args.verify_mode), args.gate
        )
    elif args.input:
        reports = read_reports(Path(args.input).read_text(encoding="utf-8"))
    else:
        raise UsageError("report needs --in (score records) or --results")
    text = emit_report(reports, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_vtune_gen(args) -> int:
    cfg = _run_config(args)
    anns = read_annotations(args.input)
    if not args.no_filter:
        anns, _ = filter_annotations(anns)
    vcfg = VTuneConfig(
        n_aligned=args.n_aligned, n_misaligned=args.n_misaligned, per_ann=args.per_ann, max_workers=cfg.max_workers
    )
    records = generate_all(anns, _generator(args), cfg.seed, vcfg)
    export(records, args.out, ExportFormat(args.format))
    s = stats(records)
    print(dumps({"G": s.G, "E": s.E, "T": s.T, "total": s.total}))
    return 0


def cmd_mock_serve(args) -> int:
    items = read_eval_set(args.set)
    adapters = {}
    for kind in args.mock:
        name = kind if kind.startswith("mock:") else f"mock:{kind}"
        adapters[name] = make_mock(MockSpec.parse(name[len("mock:"):], seed=args.seed), items, adapter_id=name)
    server = serve_local(adapters, args.port, args.host)
    print(f"serving {', '.join(adapters)} at {server.url}", flush=True)
    if args.ready_file:
        Path(args.ready_file).write_text(server.url, encoding="utf-8")
    stop = threading.Event()
    for sig in (signal.SIGINT, signal.SIGTERM):
        signal.signal(sig, lambda *_: stop.set())
    try:
        stop.wait(args.duration if args.duration > 0 else None)
    finally:
        server.close()
    return 0


# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="groundprobe", description="Consistency probing for temporal grounding.")
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, workers=True):
        sp.add_argument("--seed", type=int, default=0)
        if workers:
            sp.add_argument("--max-workers", type=int, default=4)

    def backend(sp):
        sp.add_argument("--backend", choices=["stub", "live"], default="stub")
        sp.add_argument("--llm-config", help="JSON file for the generator/judge endpoint (no secrets)")
        sp.add_argument("--model", help="override the LLM model name")

    sp = sub.add_parser("synth", help="write synthetic Charades-like annotations")
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--out", required=True)
    common(sp, workers=False)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("build-set", help="build an evaluation set from annotations")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--n-videos", type=int)
    sp.add_argument("--max-retries", type=int, default=3)
    sp.add_argument("--iou-cap", type=float, default=0.2)
    sp.add_argument("--shift-mode", choices=[m.value for m in ShiftMode], default=ShiftMode.BAND.value)
    sp.add_argument("--dataset-id", default="")
    sp.add_argument("--no-filter", action="store_true")
    common(sp)
    backend(sp)
    sp.set_defaults(func=cmd_build_set)

    sp = sub.add_parser("shift-plan", help="export shift plans as frame lists and ffmpeg commands")
    sp.add_argument("--set", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--fps", type=float, default=0.0)
    sp.add_argument("--ffmpeg", action="store_true")
    sp.add_argument("--src-dir", default="videos")
    sp.add_argument("--dst-dir", default="shifted")
    sp.add_argument("--ext", default=".mp4")
    sp.set_defaults(func=cmd_shift_plan)

    sp = sub.add_parser("run", help="run every probe against an adapter")
    sp.add_argument("--set", required=True)
    sp.add_argument("--adapter", required=True, help="mock:<kind>[:opts] or a name from --adapters-config")
    sp.add_argument("--adapters-config")
    sp.add_argument("--adapter-url", help="talk to a chat-completion endpoint directly")
    sp.add_argument("--adapter-retries", type=int, default=3)
    sp.add_argument("--out", required=True)
    sp.add_argument("--strategy", choices=["standard", "cot", "description"], default="standard")
    sp.add_argument("--checkpoint", help="append-only progress file; resumes when present")
    sp.add_argument("--judge", choices=["heuristic", "live"], default="heuristic")
    sp.add_argument("--llm-config")
    sp.add_argument("--model")
    sp.add_argument("--dataset-id", default="")
    sp.add_argument("--verify-suffix", default="")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("score", help="score a result set")
    sp.add_argument("--results", required=True)
    sp.add_argument("--thresholds", default="0.5")
    sp.add_argument("--verify-mode", choices=[m.value for m in VerifyMode], default="macro")
    sp.add_argument("--gate", type=float, help="Ground correctness threshold (default: each threshold)")
    sp.add_argument("--format", choices=[f.value for f in ReportFormat], default="records")
    sp.add_argument("--out")
    common(sp, workers=False)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("report", help="render score records as cells or markdown")
    sp.add_argument("--in", dest="input")
    sp.add_argument("--results")
    sp.add_argument("--thresholds", default="0.5")
    sp.add_argument("--verify-mode", choices=[m.value for m in VerifyMode], default="macro")
    sp.add_argument("--gate", type=float, help="Ground correctness threshold (default: each threshold)")
    sp.add_argument("--format", choices=[f.value for f in ReportFormat], default="cells")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("vtune-gen", help="generate verification-tuning records")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=[f.value for f in ExportFormat], default="neutral")
    sp.add_argument("--n-aligned", type=int, default=3)
    sp.add_argument("--n-misaligned", type=int, default=3)
    sp.add_argument("--per-ann", type=int, default=1)
    sp.add_argument("--no-filter", action="store_true")
    common(sp)
    backend(sp)
    sp.set_defaults(func=cmd_vtune_gen)

    sp = sub.add_parser("mock-serve", help="serve mock models over loopback HTTP")
    sp.add_argument("--set", required=True)
    sp.add_argument("--mock", action="append", default=[], help="mock kind; repeatable")
    sp.add_argument("--port", type=int, default=0)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--ready-file", help="write the endpoint URL here once listening")
    sp.add_argument("--duration", type=float, default=0.0, help="stop after N seconds (0 = until signalled)")
    common(sp, workers=False)
    sp.set_defaults(func=cmd_mock_serve)
    return p


def _layered_defaults(
    parser: argparse.ArgumentParser, argv: Sequence[str], env: dict[str, str]
) -> dict[str, Any]:
    """Defaults from the config file, overridden by environment variables."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    command = next((a for a in rest if not a.startswith("-")), None)
    values: dict[str, Any] = {}
    if known.config:
        raw = json.loads(Path(known.config).read_text(encoding="utf-8"))
        values.update({k: v for k, v in raw.items() if not isinstance(v, dict)})
        if command and isinstance(raw.get(command), dict):
            values.update(raw[command])
        values = {k.replace("-", "_"): v for k, v in values.items()}
    for key, val in env.items():
        if key.startswith(ENV_PREFIX) and not key.startswith(ENV_PREFIX + "LLM_"):
            values[key[len(ENV_PREFIX):].lower()] = val
    return values


def main(argv: Sequence[str] | None = None, env: dict[str, str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    env = dict(os.environ if env is None else env)
    parser = build_parser()
    try:
        defaults = _layered_defaults(parser, argv, env)
    except (OSError, ValueError) as exc:
        print(f"groundprobe: error: bad --config: {exc}", file=sys.stderr)
        return 2
    # apply file/env defaults to the chosen subparser, typed by its own actions
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in sub_action.choices.values():
        known = {a.dest: a for a in sp._actions}
        typed = {}
        for k, v in defaults.items():
            if k in known and k != "help":
                act = known[k]
                if act.type is not None and isinstance(v, str):
                    v = act.type(v)
                elif isinstance(act, argparse._StoreTrueAction) and isinstance(v, str):
                    v = v.lower() in ("1", "true", "yes")
                typed[k] = v
        sp.set_defaults(**typed)
        # defaults satisfy required options
        for a in sp._actions:
            if a.required and a.dest in typed:
                a.required = False
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"groundprobe {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except (GroundProbeError, OSError, ValueError, KeyError) as exc:
        print(f"groundprobe {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
