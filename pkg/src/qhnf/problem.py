"""Problem files and certificates: JSON records with polynomials as strings."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from gmpy2 import mpq

from .errors import ParseError
from .grading import Poly, Weights, format_poly, parse_poly
from .logfields import QHContext, VField
from .prenorm import ConjugationScript

PIPELINES = ("foliation", "field", "cokernel")
CERTIFICATE_FORMAT = "qhnf-certificate/1"


@dataclass(frozen=True)
class ProblemFile:
    weights: Tuple[int, int]
    h: Poly
    h0: Optional[Poly]
    field: Optional[VField]
    truncation: int
    pipeline: str
    pick: Optional[int] = None
    x0: Optional[VField] = None
    grading: Optional[Tuple[int, int]] = None
    source: Optional[str] = None

    def context(self, K: Optional[int] = None) -> QHContext:
        return QHContext.build(
            self.weights, self.h, self.h0, K=self.truncation if K is None else K,
            x0=self.x0, grading=self.grading,
        )

    def echo(self, w: Weights) -> Dict:
        out = {"weights": list(self.weights), "h": format_poly(self.h, w)}
        if self.h0 is not None:
            out["h0"] = format_poly(self.h0, w)
        if self.x0 is not None:
            out["x0"] = vfield_to_json(self.x0, w)
        if self.grading is not None:
            out["grading"] = list(self.grading)
        if self.field is not None:
            out["field"] = vfield_to_json(self.field, w)
        out["truncation"] = self.truncation
        out["pipeline"] = self.pipeline
        if self.pick is not None:
            out["pick"] = self.pick
        return out


def _locate(text: str, path: Tuple[str, ...]) -> Tuple[Optional[int], Optional[int]]:
    """Line and column just inside the string value of the last key in ``path``."""
    pos = 0
    for key in path:
        mt = re.compile(r'"%s"\s*:\s*' % re.escape(key)).search(text, pos)
        if mt is None:
            return None, None
        pos = mt.end()
    if pos < len(text) and text[pos] == '"':
        pos += 1
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _load_json(text: str, source: Optional[str]):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno, source=source) from None


def _poly_field(text: str, data: Dict, path: Tuple[str, ...], source, required=True) -> Optional[Poly]:
    node = data
    for key in path:
        if not isinstance(node, dict) or key not in node:
            if required:
                line, col = _locate(text, path[:-1]) if len(path) > 1 else (None, None)
                raise ParseError(f"missing field {'.'.join(path)!r}", line=line, column=col, source=source)
            return None
        node = node[key]
    if not isinstance(node, str):
        line, col = _locate(text, path)
        raise ParseError(f"field {'.'.join(path)!r} must be a polynomial string", line=line, column=col, source=source)
    try:
        return parse_poly(node)
    except ParseError as exc:
        line, col = _locate(text, path)
        if line is None:
            raise ParseError(str(exc), source=source) from None
        raise ParseError(
            f"in {'.'.join(path)!r}: {exc}", line=line, column=col + (exc.column or 1) - 1, source=source
        ) from None


def _int_pair(text, data, key, source, required=True):
    if key not in data:
        if required:
            raise ParseError(f"missing field {key!r}", source=source)
        return None
    val = data[key]
    if (
        not isinstance(val, list) or len(val) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in val)
    ):
        line, col = _locate(text, (key,))
        raise ParseError(f"{key!r} must be a pair of integers", line=line, column=col, source=source)
    return (val[0], val[1])


def parse_problem(text: str, source: Optional[str] = None) -> ProblemFile:
    data = _load_json(text, source)
    if not isinstance(data, dict):
        raise ParseError("problem file must be a JSON object", line=1, column=1, source=source)
    weights = _int_pair(text, data, "weights", source)
    grading = _int_pair(text, data, "grading", source, required=False)
    h = _poly_field(text, data, ("h",), source)
    h0 = _poly_field(text, data, ("h0",), source, required=False)
    fld = None
    if "field" in data:
        fld = VField(_poly_field(text, data, ("field", "dx"), source), _poly_field(text, data, ("field", "dy"), source))
    x0 = None
    if "x0" in data:
        x0 = VField(_poly_field(text, data, ("x0", "dx"), source), _poly_field(text, data, ("x0", "dy"), source))
    K = data.get("truncation")
    if not isinstance(K, int) or isinstance(K, bool) or K < 1:
        line, col = _locate(text, ("truncation",))
        raise ParseError("'truncation' must be a positive integer", line=line, column=col, source=source)
    pipeline = data.get("pipeline", "foliation")
    if pipeline not in PIPELINES:
        line, col = _locate(text, ("pipeline",))
        raise ParseError(f"'pipeline' must be one of {', '.join(PIPELINES)}", line=line, column=col, source=source)
    pick = data.get("pick")
    if pick is not None and (not isinstance(pick, int) or isinstance(pick, bool) or pick < 1):
        line, col = _locate(text, ("pick",))
        raise ParseError("'pick' must be a positive (1-based) basis index", line=line, column=col, source=source)
    if pipeline != "cokernel" and fld is None:
        raise ParseError(f"pipeline {pipeline!r} needs a 'field' entry", source=source)
    try:
        Weights(*weights)
        if grading is not None:
            Weights(*grading)
    except ValueError as exc:
        line, col = _locate(text, ("weights",))
        raise ParseError(str(exc), line=line, column=col, source=source) from None
    return ProblemFile(weights, h, h0, fld, K, pipeline, pick, x0, grading, source)


def load_problem(path: str) -> ProblemFile:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read(), source=path)


# -- certificates ------------------------------------------------------------------


def vfield_to_json(X: VField, w: Weights) -> Dict[str, str]:
    return {"dx": format_poly(X.P, w), "dy": format_poly(X.Q, w)}


def series_to_json(d: Dict[int, mpq]) -> Dict[str, str]:
    return {str(j): str(c) for j, c in sorted(d.items())}


def format_series(d: Dict[int, mpq], var: str = "h") -> str:
    if not d:
        return "0"
    out = []
    for j, c in sorted(d.items()):
        mono = "" if j == 0 else (var if j == 1 else f"{var}^{j}")
        a = abs(c)
        body = str(a) if not mono else (mono if a == 1 else f"{a}*{mono}")
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


@dataclass(frozen=True)
class Certificate:
    """A conjugacy claim checkable without rerunning the synthesis.

    Pulling the problem field back by ``exp`` of each generator in order gives
    ``unit * (x0_coeff * X0 + r_coeff * R)`` up to ``truncation``.
    """

    truncation: int
    generators: Tuple[VField, ...]
    unit: Poly
    x0_coeff: Poly
    r_coeff: Poly
    fibered: bool = True
    extra: Dict = field(default_factory=dict, compare=False)

    def script(self) -> ConjugationScript:
        return ConjugationScript(self.generators, self.unit, self.fibered)


def certificate_to_json(cert: Certificate, problem: ProblemFile, ctx: QHContext) -> str:
    g = ctx.grading
    doc = {
        "format": CERTIFICATE_FORMAT,
        "problem": problem.echo(g),
        "truncation": cert.truncation,
        "fibered": cert.fibered,
        "generators": [vfield_to_json(Z, g) for Z in cert.generators],
        "unit": format_poly(cert.unit, g),
        "normal_form": {"x0_coeff": format_poly(cert.x0_coeff, g), "r_coeff": format_poly(cert.r_coeff, g)},
    }
    doc.update(cert.extra)
    return json.dumps(doc, indent=2, ensure_ascii=True) + "\n"


def parse_certificate(text: str, source: Optional[str] = None) -> Certificate:
    data = _load_json(text, source)
    if not isinstance(data, dict) or data.get("format") != CERTIFICATE_FORMAT:
        raise ParseError(f"not a {CERTIFICATE_FORMAT} document", line=1, column=1, source=source)
    K = data.get("truncation")
    if not isinstance(K, int) or K < 1:
        line, col = _locate(text, ("truncation",))
        raise ParseError("'truncation' must be a positive integer", line=line, column=col, source=source)
    gens = []
    for k, gen in enumerate(data.get("generators", [])):
        try:
            gens.append(VField(parse_poly(gen["dx"]), parse_poly(gen["dy"])))
        except (KeyError, TypeError):
            raise ParseError(f"generator {k} must have 'dx' and 'dy' strings", source=source) from None
        except ParseError as exc:
            raise ParseError(f"generator {k}: {exc}", source=source) from None
    unit = _poly_field(text, data, ("unit",), source)
    x0c = _poly_field(text, data, ("normal_form", "x0_coeff"), source)
    rc = _poly_field(text, data, ("normal_form", "r_coeff"), source)
    return Certificate(K, tuple(gens), unit, x0c, rc, bool(data.get("fibered", False)))


def load_certificate(path: str) -> Certificate:
    with open(path, encoding="utf-8") as fh:
        return parse_certificate(fh.read(), source=path)

