from __future__ import annotations
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

Command = Literal["classify", "verify-cocycle", "equiv", "enumerate", "smatrix"]
Status = Literal["ok", "invalid-input", "verification-failed"]

EXIT_CODES: Dict[str, int] = {"ok": 0, "invalid-input": 2, "verification-failed": 3}


class CommandRequest(BaseModel):
    command: Command
    input: Optional[Any] = None  # parsed JSON of --input
    input2: Optional[Any] = None
    dim: Optional[int] = None
    max_n: Optional[int] = Field(default=None, ge=0)


class CommandReport(BaseModel):
    command: Command
    inputs: Dict[str, Any] = {}
    result: Optional[Dict[str, Any]] = None
    status: Status = "ok"
    error: Optional[str] = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "command": self.command,
            "inputs": self.inputs,
            "result": self.result,
            "status": self.status,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


class CategoryReport(BaseModel):
    n: int
    q: Dict[str, Any]
    S: List[List[int]]
    T: List[int]
    tau_plus: int
    xi: int
    arf: int
    decomposition: List[str]
