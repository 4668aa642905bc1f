# app/cli.py
from __future__ import annotations
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from .config import get_settings
from .errors import InvalidInputError
from .orchestrator import Orchestrator
from .schemas import CommandReport, CommandRequest
from .utils.io import dumps_canonical, read_json, write_json_atomic

logger = logging.getLogger(__name__)

COMMANDS = ("classify", "verify-cocycle", "equiv", "enumerate", "smatrix")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fsexp2",
        description="Exact GF(2) classification of pointed modular categories with FS exponent 2.",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", help="quadratic form or cocycle JSON file")
    ap.add_argument("--input2", help="second form (equiv) or braiding table (verify-cocycle)")
    ap.add_argument("--dim", type=int, help="even dimension 2m for enumerate")
    ap.add_argument("--json", action="store_true", help="accepted for compatibility; output is always JSON")
    ap.add_argument("--max-n", type=int, dest="max_n", help="lower the dimension cap for this run")
    ap.add_argument("--output", help="also write the report to this file")
    ap.add_argument("--log-level", dest="log_level", help="logging level (default FS2_LOG_LEVEL)")
    return ap


def _load(path: Optional[str]):
    return None if path is None else read_json(path)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = (args.log_level or get_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        req = CommandRequest(
            command=args.command,
            input=_load(args.input),
            input2=_load(args.input2),
            dim=args.dim,
            max_n=args.max_n,
        )
    except (InvalidInputError, ValidationError) as e:
        report = CommandReport(command=args.command, status="invalid-input", error=str(e))
    else:
        report = Orchestrator().respond(req)

    payload = report.to_json()
    sys.stdout.write(dumps_canonical(payload))
    if args.output:
        write_json_atomic(args.output, payload)
    logger.info("%s finished with status %s", args.command, report.status)
    return report.exit_code
