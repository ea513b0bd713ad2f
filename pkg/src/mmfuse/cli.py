"""``fuse`` command line."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline, synthgen
from .errors import ConfigError, FuseError, IngestError
from .ingest import load_session, validate
from .sync import write_intervals

log = logging.getLogger("mmfuse")


def _config(args) -> pipeline.PipelineConfig:
    cfg = pipeline.PipelineConfig.load(args.config)
    if getattr(args, "out", None):
        cfg = cfg.with_output(Path(args.out).resolve())
    return cfg


def cmd_validate(args) -> int:
    if args.sessions:
        ok = True
        for d in args.sessions:
            rep = validate(load_session(d))
            print(json.dumps(rep.to_dict(), indent=2))
            ok &= rep.ok
        return 0 if ok else 1
    _, reports = pipeline.stage_validate(_config(args), args.threads)
    for rep in reports:
        print(f"{rep.session_id}: {len(rep.errors)} error(s), {len(rep.warnings)} warning(s)")
        for f in rep.errors:
            print(f"  error  {f.file}: {f.message}")
    return 0 if all(r.ok for r in reports) else 1


def cmd_indicators(args) -> int:
    cfg = _config(args)
    records = pipeline.stage_indicators(cfg, args.threads)
    print(f"wrote {len(records)} interval records to {cfg.run_dir / 'intervals.csv'}")
    return 0


def cmd_fit(args) -> int:
    cfg = _config(args)
    best = pipeline.stage_fit(cfg, args.threads)
    print(f"chosen K={best.model.K} (BIC {best.bic:.2f}, logL {best.log_likelihood:.2f})")
    return 0


def cmd_assign(args) -> int:
    cfg = _config(args)
    a = pipeline.stage_assign(cfg)
    print(f"assigned {len(a)} records")
    return 0


def cmd_ena(args) -> int:
    cfg = _config(args)
    path = pipeline.stage_ena(cfg, args.codes, args.measure)
    print(f"wrote {path}")
    return 0


def cmd_report(args) -> int:
    print(f"wrote {pipeline.stage_report(_config(args))}")
    return 0


def cmd_run(args) -> int:
    cfg = _config(args)
    code = pipeline.run(cfg, args.threads)
    if code == 0:
        print(f"artifacts in {cfg.run_dir}")
    return code


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.script:
        script = synthgen.ScenarioScript.load(args.script)
        d, exp = synthgen.synth_raw_session(script, out, check=args.check)
        print(f"wrote {d} and {exp}")
        return 0
    if args.corpus:
        dirs, labels = synthgen.synth_corpus(out, args.corpus, args.seed)
        cfg = {"sessions": [d.name for d in dirs], "output_dir": "out", "lca": {"seed": args.seed}}
        (out / "config.json").write_text(json.dumps(cfg, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {len(dirs)} sessions, {labels.name} and config.json to {out}")
        return 0
    if args.preset != "fig3":
        raise ConfigError(f"unknown preset {args.preset!r}")
    spec = synthgen.fig3_spec(args.n, args.seed)
    records, labels = synthgen.sample_indicators(spec)
    write_intervals(records, out / "intervals.csv")
    with (out / "labels.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("session_id,student_id,interval_index,true_class\n")
        for r, z in zip(records, labels):
            fh.write(f"{r.session_id},{r.student_id},{r.interval_index},{int(z)}\n")
    (out / "planted.json").write_text(json.dumps(spec.to_dict(), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(records)} records to {out / 'intervals.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fuse", description="Multimodal indicator fusion with LCA and ENA.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def staged(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", default="fuse.json", help="pipeline config JSON (default: fuse.json)")
        sp.add_argument("--out", help="override the config's output_dir")
        sp.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
        sp.set_defaults(fn=fn)
        return sp

    v = staged("validate", cmd_validate, "check session files")
    v.add_argument("sessions", nargs="*", help="session directories (instead of --config)")
    staged("indicators", cmd_indicators, "derive interval records")
    staged("fit", cmd_fit, "LCA K sweep and model selection")
    staged("assign", cmd_assign, "posterior class assignment")
    e = staged("ena", cmd_ena, "epistemic network comparison")
    e.add_argument("--codes", choices=pipeline.CODE_SETS, default="multimodal")
    e.add_argument("--measure", choices=("task", "collab"), default="task")
    staged("report", cmd_report, "summarise a finished run")
    staged("run", cmd_run, "all stages in order")

    s = sub.add_parser("synth", help="generate synthetic data")
    s.add_argument("--preset", default="fig3")
    s.add_argument("--n", type=int, default=3000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--corpus", type=int, metavar="N_SESSIONS", help="write planted raw sessions instead")
    s.add_argument("--script", help="render a ScenarioScript JSON file")
    s.add_argument("--check", action="store_true", help="with --script: verify expected bits")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except pipeline.ValidationFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: [config] {exc}", file=sys.stderr)
        return 1
    except IngestError as exc:
        print(f"error: [validate] {exc}", file=sys.stderr)
        return 1
    except FuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure of any stage
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
