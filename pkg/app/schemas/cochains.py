from __future__ import annotations
from math import comb
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, TypeAdapter, model_validator
from typing_extensions import Annotated

from ..services.em_cocycles import (
    Cochain2,
    Cochain3,
    HwyParams,
    decode_logs,
    encode_logs,
    hwy_cocycle,
)


class TableCochainSpec(BaseModel):
    """Explicit log table, base64 of the little-endian packed bits in x + 2^n y (+ 2^2n z) order."""

    kind: Literal["table"] = "table"
    n: int = Field(ge=0)
    logs: str

    def to_cochain3(self) -> Cochain3:
        return Cochain3(self.n, decode_logs(self.logs, self.n, 3))

    def to_cochain2(self) -> Cochain2:
        return Cochain2(self.n, decode_logs(self.logs, self.n, 2))

    @classmethod
    def from_cochain(cls, cochain: Cochain2 | Cochain3) -> "TableCochainSpec":
        return cls(n=cochain.n, logs=encode_logs(cochain.values))

    def canonical(self) -> dict:
        return {"kind": self.kind, "n": self.n, "logs": self.logs}


class HwyCochainSpec(BaseModel):
    """Parameters of the explicit family; a_rs / a_rst in lexicographic (r,s) / (r,s,t) order."""

    kind: Literal["hwy"]
    n: Optional[int] = None
    a_r: List[int]
    a_rs: List[int] = []
    a_rst: List[int] = []

    @model_validator(mode="after")
    def _infer_n(self) -> "HwyCochainSpec":
        if self.n is None:
            self.n = len(self.a_r)
        # sizes re-checked by HwyParams
        if len(self.a_rs) != comb(self.n, 2) or len(self.a_rst) != comb(self.n, 3):
            raise ValueError(f"a_rs / a_rst lengths do not match n={self.n}")
        return self

    def to_params(self) -> HwyParams:
        return HwyParams(n=self.n, a_r=tuple(self.a_r), a_rs=tuple(self.a_rs), a_rst=tuple(self.a_rst))

    def to_cochain3(self) -> Cochain3:
        return hwy_cocycle(self.to_params())

    def canonical(self) -> dict:
        return {"kind": self.kind, "n": self.n, "a_r": self.a_r, "a_rs": self.a_rs, "a_rst": self.a_rst}


CocycleSpec = Annotated[Union[TableCochainSpec, HwyCochainSpec], Field(discriminator="kind")]

cocycle_adapter: TypeAdapter[CocycleSpec] = TypeAdapter(CocycleSpec)
