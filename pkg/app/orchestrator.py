# app/orchestrator.py
"""
Command dispatch shared by the CLI and the tests.

Every witness placed in a report (basis changes, mu, trivializing cochains) is
re-checked here before it is returned; a failed re-check turns the report into
status "verification-failed".
"""

from __future__ import annotations
import logging
from typing import Any, Callable, Dict, Optional

import numpy as np
from pydantic import ValidationError

from .config import HARD_MAX_FORM_DIM, HARD_MAX_SCAN_N, Settings, get_settings
from .errors import InvalidInputError, PreconditionError, VerificationError
from .schemas import (
    CategoryReport,
    CommandReport,
    CommandRequest,
    QuadraticFormSpec,
    TableCochainSpec,
    cocycle_adapter,
)
from .services.em_cocycles import (
    EmPair,
    certify_fsexp2,
    check_hexagons,
    delta2,
    encode_logs,
    fs_exponent,
    is_cocycle3,
    restriction_vector,
    trace,
)
from .services.modular_data import (
    build_category,
    check_equivalence_data,
    check_modular_data,
    classify_from_gauss_sum,
    prime_decomposition,
    verify_equivalence,
)
from .services.quadratic_forms import (
    agree_everywhere,
    arf,
    enumerate_classes,
    equivalence_witness,
    pullback,
)

logger = logging.getLogger(__name__)

Result = Dict[str, Any]


# ---------- parsing ----------

def _require(value: Any, flag: str) -> Any:
    if value is None:
        raise InvalidInputError(f"Missing {flag}")
    return value


def _parse_form(raw: Any) -> QuadraticFormSpec:
    return QuadraticFormSpec.model_validate(_require(raw, "--input"))


def _limit(cap: int, compiled: int, max_n: Optional[int]) -> int:
    if max_n is None:
        return cap
    if max_n > compiled:
        raise InvalidInputError(f"--max-n {max_n} exceeds the compiled cap {compiled}")
    return min(cap, max_n)


def _check_dim(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise InvalidInputError(f"{what} dimension {n} exceeds the limit {limit}")


# ---------- commands ----------

class Orchestrator:
    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self._handlers: Dict[str, Callable[[CommandRequest, Result], Result]] = {
            "classify": self._classify,
            "verify-cocycle": self._verify_cocycle,
            "equiv": self._equiv,
            "enumerate": self._enumerate,
            "smatrix": self._smatrix,
        }

    def respond(self, req: CommandRequest) -> CommandReport:
        inputs: Result = {}
        for key in ("input", "input2", "dim"):
            value = getattr(req, key)
            if value is not None:
                inputs[key] = value
        try:
            result = self._handlers[req.command](req, inputs)
        except (ValidationError, InvalidInputError, PreconditionError) as e:
            logger.info("%s rejected its input: %s", req.command, e)
            return CommandReport(command=req.command, inputs=inputs, status="invalid-input", error=str(e))
        except VerificationError as e:
            logger.error("%s failed verification: %s", req.command, e)
            return CommandReport(command=req.command, inputs=inputs, status="verification-failed", error=str(e))
        status = "verification-failed" if result.pop("_failed", False) else "ok"
        return CommandReport(command=req.command, inputs=inputs, result=result, status=status)

    def _form_limit(self, req: CommandRequest) -> int:
        return _limit(self.settings.max_form_dim, HARD_MAX_FORM_DIM, req.max_n)

    def _classify(self, req: CommandRequest, inputs: Result) -> Result:
        spec = _parse_form(req.input)
        inputs["input"] = spec.canonical()
        _check_dim(spec.n, self._form_limit(req), "Form")
        q = spec.to_form()
        category = build_category(q)
        decomposition = prime_decomposition(category)
        descriptor = decomposition.descriptor
        if descriptor.is_trivial:
            raise PreconditionError("Classification needs a form on Z_2^{2m} with m >= 1")
        p = decomposition.basis_change
        if not agree_everywhere(pullback(q, p), descriptor.form()):
            raise VerificationError("Basis change does not carry the form to its canonical form")
        if classify_from_gauss_sum(category.tau_plus) != descriptor:
            raise VerificationError("Gauss sum classification disagrees with the decomposition")
        return {
            "arf": descriptor.blocks.count("q2"),
            "basis_change": list(p.rows),
            "decomposition": list(descriptor.blocks),
            "m": descriptor.m,
            "tau_plus": category.tau_plus,
            "xi": category.xi,
        }

    def _verify_cocycle(self, req: CommandRequest, inputs: Result) -> Result:
        spec = cocycle_adapter.validate_python(_require(req.input, "--input"))
        inputs["input"] = spec.canonical()
        limit = _limit(self.settings.max_scan_n, HARD_MAX_SCAN_N, req.max_n)
        _check_dim(spec.n, limit, "Cocycle")
        omega = spec.to_cochain3()
        braiding = None
        if req.input2 is not None:
            braiding_spec = TableCochainSpec.model_validate(req.input2)
            inputs["input2"] = braiding_spec.canonical()
            braiding = braiding_spec.to_cochain2()
            if braiding.n != omega.n:
                raise InvalidInputError(f"Braiding on Z_2^{braiding.n}, cocycle on Z_2^{omega.n}")

        if not is_cocycle3(omega):
            return {"_failed": True, "is_cocycle": False}
        result: Result = {
            "is_cocycle": True,
            "restriction_vector": list(restriction_vector(omega).entries),
            "fs_exponent": fs_exponent(omega),
            "certificate": None,
        }
        if omega.n >= 1:
            cert = certify_fsexp2(omega)
            if cert is not None:
                if delta2(cert.h) != omega:
                    raise VerificationError("Trivializing cochain does not reproduce the cocycle")
                result["certificate"] = {"h": encode_logs(cert.h.values), "n": cert.h.n}
        if braiding is not None:
            ok = check_hexagons(omega, braiding)
            result["hexagons"] = ok
            result["trace"] = None
            if ok:
                result["trace"] = QuadraticFormSpec.from_form(trace(EmPair(omega, braiding))).canonical()
            else:
                result["_failed"] = True
        return result

    def _equiv(self, req: CommandRequest, inputs: Result) -> Result:
        first = _parse_form(req.input)
        second = QuadraticFormSpec.model_validate(_require(req.input2, "--input2"))
        inputs["input"] = first.canonical()
        inputs["input2"] = second.canonical()
        limit = self._form_limit(req)
        _check_dim(max(first.n, second.n), limit, "Form")
        q, r = first.to_form(), second.to_form()
        arfs = [arf(q), arf(r)]
        result: Result = {"arf": arfs, "dim": [q.n, r.n]}
        if q.n != r.n or arfs[0] != arfs[1]:
            result["verdict"] = "inequivalent"
            return result
        if q.n <= self.settings.max_solver_n:
            data = verify_equivalence(q, r)
            if data is None or not check_equivalence_data(q, r, data):
                raise VerificationError("Forms with equal (dim, arf) produced no verified witness")
            f, mu = data.f, encode_logs(data.mu.values)
        else:
            # cocycle-level solve is out of range; emit the group map only
            f = equivalence_witness(q, r)
            if f is None or not agree_everywhere(q, pullback(r, f)):
                raise VerificationError("Forms with equal (dim, arf) produced no verified witness")
            mu = None
        result.update(verdict="equivalent", f=list(f.rows), mu=mu)
        return result

    def _enumerate(self, req: CommandRequest, inputs: Result) -> Result:
        dim = _require(req.dim, "--dim")
        counts = enumerate_classes(dim, orbits=True, max_dim=self._form_limit(req))
        if counts.arf0 + counts.arf1 != 1 << dim:
            raise VerificationError("Arf counts do not cover every form")
        return counts.model_dump()

    def _smatrix(self, req: CommandRequest, inputs: Result) -> Result:
        spec = _parse_form(req.input)
        inputs["input"] = spec.canonical()
        _check_dim(spec.n, self._form_limit(req), "Form")
        category = build_category(spec.to_form())
        check_modular_data(category)
        if int(category.T.sum()) != category.tau_plus:
            raise VerificationError("Reported Gauss sum disagrees with the T-vector")
        descriptor = prime_decomposition(category).descriptor
        report = CategoryReport(
            n=category.n,
            q=spec.canonical(),
            S=np.asarray(category.S).tolist(),
            T=np.asarray(category.T).tolist(),
            tau_plus=category.tau_plus,
            xi=category.xi,
            arf=descriptor.blocks.count("q2"),
            decomposition=list(descriptor.blocks),
        )
        return report.model_dump()


def run(req: CommandRequest, settings: Optional[Settings] = None) -> CommandReport:
    report = Orchestrator(settings).respond(req)
    logger.debug("%s -> %s", req.command, report.status)
    return report

