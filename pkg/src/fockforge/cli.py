"""Command line driver: ``fockforge run`` and ``fockforge validate``.

Exit status: 0 all assertions pass, 1 a task failed, 2 invalid config,
3 output could not be written.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config
from .errors import ConfigInvalid
from .tasks import TaskContext, TaskResult, run_task

EXIT_OK, EXIT_TASK, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
ENV_OUT = "FOCKFORGE_OUT"
DEFAULT_OUT = "fockforge-out"


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(result: TaskResult, stamp: str) -> str:
    buf = io.StringIO()
    buf.write(f"# fockforge {__version__} task={result.name} generated={stamp}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.header)
    for row in result.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def summary(cfg: RunConfig, results: list[TaskResult]) -> dict:
    return {
        "config": cfg.to_dict(),
        "tolerances": cfg.to_dict()["tolerances"],
        "tasks": {
            r.name: {"passed": r.passed, "rows": len(r.rows),
                     "assertions": [a.as_dict() for a in r.assertions]}
            for r in results
        },
        "passed": all(r.passed for r in results),
    }


def output_dir(cfg: RunConfig, override: str | None) -> Path:
    if override:
        return Path(override)
    if cfg.output.path:
        return Path(cfg.output.path)
    return Path(os.environ.get(ENV_OUT, DEFAULT_OUT))


def execute(cfg: RunConfig, out: Path, jobs: int = 1) -> int:
    ctx = TaskContext(cfg, jobs)
    results = [run_task(name, ctx) for name in cfg.task_names()]
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    try:
        out.mkdir(parents=True, exist_ok=True)
        for r in results:
            (out / f"{r.name}.csv").write_text(render_csv(r, stamp))
        (out / "summary.json").write_text(json.dumps(summary(cfg, results), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"error: cannot write reports to {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{r.name:10s} {status}")
        for a in r.assertions:
            if a.passed is False:
                print(f"    {a.name}: value={a.value} tol={a.tolerance} {a.note}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_TASK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fockforge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute the tasks of a config and write reports")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=None, help=f"report directory (default: config, ${ENV_OUT}, ./{DEFAULT_OUT})")
    run.add_argument("--jobs", type=int, default=1)
    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigInvalid as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(f"ok: {len(cfg.tasks)} task(s)")
        return EXIT_OK
    if args.jobs < 1:
        print("invalid --jobs: must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return execute(cfg, output_dir(cfg, args.out), args.jobs)


if __name__ == "__main__":
    sys.exit(main())
