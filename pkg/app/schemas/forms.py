from __future__ import annotations
from typing import List, Tuple

from pydantic import BaseModel, Field, model_validator

from ..services.quadratic_forms import QuadraticForm


class QuadraticFormSpec(BaseModel):
    """Wire form: {"n": 4, "linear": [a_1..a_n], "quad": [[i, j], ...]} with 1-based i < j."""

    n: int = Field(ge=0)
    linear: List[int]
    quad: List[Tuple[int, int]] = []

    @model_validator(mode="after")
    def _check(self) -> "QuadraticFormSpec":
        if len(self.linear) != self.n:
            raise ValueError(f"linear has {len(self.linear)} entries, expected {self.n}")
        if any(a not in (0, 1) for a in self.linear):
            raise ValueError("linear coefficients must be 0 or 1")
        seen = set()
        for i, j in self.quad:
            if not 1 <= i < j <= self.n:
                raise ValueError(f"quad pair [{i}, {j}] is not 1 <= i < j <= {self.n}")
            if (i, j) in seen:
                raise ValueError(f"quad pair [{i}, {j}] listed twice")
            seen.add((i, j))
        self.quad = sorted(self.quad)
        return self

    def to_form(self) -> QuadraticForm:
        linear = sum(a << i for i, a in enumerate(self.linear))
        return QuadraticForm.from_coefficients(self.n, linear, [(i - 1, j - 1) for i, j in self.quad])

    @classmethod
    def from_form(cls, q: QuadraticForm) -> "QuadraticFormSpec":
        return cls(n=q.n, linear=q.linear.coords(), quad=[(i + 1, j + 1) for i, j in q.pairs()])

    def canonical(self) -> dict:
        return {"n": self.n, "linear": list(self.linear), "quad": [list(p) for p in self.quad]}
