"""Command line: ``psrolab run CONFIG [--out DIR] [--jobs N]`` and ``psrolab compare DIR... [--out FILE]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, PsroLabError
from .harness import OUT_ENV, compare, default_out_dir, load_config, run_config


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psrolab", description="PSRO worst cases and Global PSRO on matrix games.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every job in a JSON config")
    run.add_argument("config")
    run.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./psrolab-out, plus the config name)")
    run.add_argument("--jobs", type=int, default=1, help="jobs to run in parallel")

    cmp_ = sub.add_parser("compare", help="summarize PE trajectories across run directories")
    cmp_.add_argument("run_dirs", nargs="+")
    cmp_.add_argument("--out", help="write the CSV here instead of stdout")
    cmp_.add_argument("--bucket", type=int, default=1, help="iterations per bucket")
    return parser


def _report(kind: str, exc: Exception) -> None:
    doc = {"error": kind, "message": str(exc)}
    diag = getattr(exc, "diagnostics", None)
    if diag:
        doc["diagnostics"] = diag
    print(json.dumps(doc, default=str), file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "run":
        if args.jobs < 1:
            _report("config-error", ConfigError("--jobs must be >= 1"))
            return 2
        try:
            config = load_config(args.config)
            out = Path(args.out) if args.out else default_out_dir(args.config)
            manifest = run_config(config, out, workers=args.jobs)
        except ConfigError as exc:
            _report("config-error", exc)
            return 2
        for entry in manifest["jobs"]:
            if entry["status"] != "ok":
                _report("job-failed", PsroLabError(f"{entry['name']}: {entry['error']['message']}"))
        print(f"{len(manifest['jobs']) - manifest['failures']} ok, {manifest['failures']} failed; output in {out}")
        return min(manifest["failures"], 100)

    try:
        text = compare(args.run_dirs, args.bucket)
    except (PsroLabError, OSError, ValueError, KeyError) as exc:
        _report("io-error", exc)
        return 1
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
