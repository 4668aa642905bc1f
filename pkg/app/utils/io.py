# app/utils/io.py
from __future__ import annotations
import json, os, tempfile
from pathlib import Path
from typing import Any

from ..errors import InvalidInputError


def dumps_canonical(data: Any) -> str:
    """Sorted keys, no whitespace, one trailing newline: byte-stable across runs."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def read_json(path: str | Path) -> Any:
    p = Path(path)
    try:
        with p.open("r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InvalidInputError(f"Input file not found: {p}")
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"{p} is not valid JSON: {e}")


def write_json_atomic(path: str | Path, data: Any) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    fd, tmppath = tempfile.mkstemp(prefix=p.name, dir=str(p.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(dumps_canonical(data))
        os.replace(tmppath, p)  # atomic on same filesystem
    except Exception:
        try:
            os.remove(tmppath)
        finally:
            raise
