"""Command-line driver: gkfuse {validate,fuse,product,normalize} FILE."""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .instances import REPORT_SCHEMA, InstanceError, dumps, parse, report_ok, run, run_request

EXIT_OK, EXIT_CERT, EXIT_PARSE = 0, 1, 2


def _one(args):
    text, req_id, trace = args
    inst = parse(text)
    req = next(r for r in inst.requests if r["id"] == req_id)
    return run_request(inst, req, trace)


def _run_parallel(text: str, inst, command: str, trace: bool, jobs: int) -> dict:
    """Independent requests in worker processes; results keep file order."""
    from .instances import COMMAND_OPS
    ids = [r["id"] for r in inst.requests if r["op"] in COMMAND_OPS[command]]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(_one, [(text, i, trace) for i in ids]))
    report = {"schema": REPORT_SCHEMA, "command": command, "results": results}
    report["ok"] = report_ok(report)
    return report


def golden_path(golden: Path, file: Path, command: str, ident) -> Path:
    name = f"{file.stem}.{command}" + (f".{ident}" if ident is not None else "") + ".json"
    return golden / name


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gkfuse", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", type=Path)
    common.add_argument("--trace", action="store_true", help="include step logs in the report")
    common.add_argument("--golden", type=Path, help="compare the report with a stored golden file")
    common.add_argument("--update-golden", action="store_true", help="write the golden file instead")
    common.add_argument("--jobs", type=int, default=1, help="run independent requests in parallel")
    common.add_argument("-o", "--output", type=Path, help="write the report here instead of stdout")
    sub.add_parser("validate", parents=[common], help="check every object and validate requests")
    for name in ("fuse", "product"):
        sp = sub.add_parser(name, parents=[common], help=f"run {name} requests")
        sp.add_argument("--request", help="run only this request id")
    sp = sub.add_parser("normalize", parents=[common], help="normalize word requests")
    sp.add_argument("--word", help="run only the normalize request with this id")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    ident = getattr(args, "request", None) or getattr(args, "word", None)
    try:
        text = args.file.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        inst = parse(text)
        if args.jobs > 1 and ident is None and args.command != "validate":
            report = _run_parallel(text, inst, args.command, args.trace, args.jobs)
        else:
            report = run(inst, args.command, ident, args.trace)
    except InstanceError as exc:
        print(f"error: {args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    out = dumps(report)
    if args.output:
        args.output.write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    status = EXIT_OK if report["ok"] else EXIT_CERT
    if args.golden is not None:
        gp = golden_path(args.golden, args.file, args.command, ident)
        if args.update_golden:
            gp.parent.mkdir(parents=True, exist_ok=True)
            gp.write_text(out, encoding="utf-8")
        elif not gp.exists():
            print(f"golden: missing {gp}", file=sys.stderr)
            status = EXIT_CERT
        elif gp.read_text(encoding="utf-8") != out:
            print(f"golden: report differs from {gp}", file=sys.stderr)
            status = EXIT_CERT
    return status


if __name__ == "__main__":
    sys.exit(main())
