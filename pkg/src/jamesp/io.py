"""Vector files and CSV reports.

A vector file is UTF-8 JSON::

    {"p": 2.0, "vectors": [[1, -1, 1], [0, 0.5]], "meta": {...}}

``meta`` is optional and free-form.  NaN and infinities are rejected on read.
Floats are written with 17 significant digits so every file round-trips
bit-identically.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from .certify import DistortionReport
from .construction import Construction
from .core import FiniteVector


class VectorFileError(ValueError):
    pass


def _reject_constant(name: str) -> float:
    raise VectorFileError(f"non-finite number {name} is not allowed")


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _dump(obj: Any, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise VectorFileError("non-finite number cannot be written")
        text = fmt(obj)
        # keep the float marker so -0.0 is not read back as the integer 0
        return text if any(ch in text for ch in ".e") else text + ".0"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k), ensure_ascii=False)}: {_dump(v, indent + 1)}'
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        items = [f"{pad}  {_dump(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise VectorFileError(f"cannot serialise {type(obj).__name__}")


def dumps_vectors(p: float, vectors: Iterable[FiniteVector], meta: dict | None = None) -> str:
    doc: dict[str, Any] = {"p": float(p), "vectors": [v.tolist() for v in vectors]}
    if meta is not None:
        doc["meta"] = meta
    return _dump(doc) + "\n"


def write_vectors(path: str | Path, p: float, vectors: Iterable[FiniteVector],
                  meta: dict | None = None) -> None:
    Path(path).write_text(dumps_vectors(p, vectors, meta), encoding="utf-8")


def loads_vectors(text: str) -> tuple[float, list[FiniteVector], dict]:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise VectorFileError(f"malformed vector file: {exc}") from exc
    if not isinstance(doc, dict):
        raise VectorFileError("vector file must contain a JSON object")
    p = doc.get("p")
    if isinstance(p, bool) or not isinstance(p, (int, float)):
        raise VectorFileError("field 'p' must be a number")
    raw = doc.get("vectors")
    if not isinstance(raw, list):
        raise VectorFileError("field 'vectors' must be an array of arrays")
    vectors = []
    for i, row in enumerate(raw):
        if not isinstance(row, list) or any(
                isinstance(v, bool) or not isinstance(v, (int, float)) for v in row):
            raise VectorFileError(f"vector {i} must be an array of numbers")
        vectors.append(FiniteVector([float(v) for v in row]))
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise VectorFileError("field 'meta' must be an object")
    return float(p), vectors, meta


def read_vectors(path: str | Path) -> tuple[float, list[FiniteVector], dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise VectorFileError(f"cannot read {path}: {exc}") from exc
    return loads_vectors(text)


def _csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


STAGE_COLUMNS = ("k", "n_k", "m_k", "gamma_k", "eps_k", "E_k", "support")


def stage_rows(c: Construction) -> list[tuple]:
    return [(s.k, s.n, s.m, s.gamma, s.eps, s.E, s.support) for s in c.stages]


def construction_csv(c: Construction) -> str:
    return _csv(STAGE_COLUMNS, stage_rows(c))


def construction_table(c: Construction) -> str:
    lines = [f"construction: K={c.K} eps={c.eps:g} p={c.p:g} mode={c.mode}",
             f"{'k':>3} {'n_k':>10} {'m_k':>12} {'gamma_k':>12} {'eps_k':>12} "
             f"{'E_k':>12} {'support':>10}"]
    for k, n, m, g, e, E, sup in stage_rows(c):
        lines.append(f"{k:>3} {n:>10} {m:>12} {g:>12.6f} {e:>12.6g} {E:>12.6g} {sup:>10}")
    return "\n".join(lines)


def pattern_key(d: Sequence[int]) -> str:
    return "".join("+" if s > 0 else "-" for s in d)


def distortion_csv(r: DistortionReport) -> str:
    return _csv(("pattern", "norm"), ((pattern_key(d), v) for d, v in r.per_pattern.items()))


def distortion_summary(r: DistortionReport) -> str:
    dist = fmt(r.distortion) if r.certified else "not certified"
    return "\n".join([
        f"K = {r.K}, p = {r.p:g}",
        f"M (max over sign patterns)      = {fmt(r.M)}",
        f"m_low (min vector norm)         = {fmt(r.m_low)}",
        f"lower bound 2*m_low - M         = {fmt(r.lower)}",
        f"distortion M / (2*m_low - M)    = {dist}",
    ])


def rows_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    return _csv(header, rows)
