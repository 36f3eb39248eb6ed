"""JSON and CSV formats used by the command line.

Spec files::

    {"rank": k, "dim": d,
     "subspaces": [{"degree": [g_1, ..., g_k], "basis": [M, ...]}, ...]}

where every matrix M is a d x d row-major array of ``[re, im]`` pairs.
Floats are written with ``%.17g`` in JSON and ``%.12e`` in CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .grading import GradingSpec, SpecError
from .matrix_core import InputError


class FormatError(InputError):
    """Unparseable or schema-violating input file."""


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = "%.17g" % x
    if "." not in s and "e" not in s:
        s += ".0"
    return s


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON with ``%.17g`` floats and sorted-insertion keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def loads(text: str, source: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def read_json(path: str | Path) -> Any:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from exc
    return loads(text, str(path))


def matrix_to_json(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=np.complex128)
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def matrix_from_json(data: Any, dim: int | None = None, where: str = "matrix") -> np.ndarray:
    if isinstance(data, dict) and "matrix" in data:
        data = data["matrix"]
    if not isinstance(data, list) or not data:
        raise FormatError(f"{where}: expected a nonempty array of rows")
    d = len(data)
    if dim is not None and d != dim:
        raise FormatError(f"{where}: has {d} rows, expected {dim}")
    out = np.zeros((d, d), dtype=np.complex128)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != d:
            raise FormatError(f"{where}: row {i} must have {d} entries")
        for j, pair in enumerate(row):
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)):
                raise FormatError(f"{where}: entry ({i}, {j}) must be a [re, im] pair")
            out[i, j] = complex(pair[0], pair[1])
    if not np.all(np.isfinite(out)):
        raise FormatError(f"{where}: non-finite entries")
    return out


def spec_from_json(data: Any) -> GradingSpec:
    if not isinstance(data, dict):
        raise FormatError("spec: top level must be an object")
    for key in ("rank", "dim", "subspaces"):
        if key not in data:
            raise FormatError(f"spec: missing field {key!r}")
    k, d = data["rank"], data["dim"]
    if not (isinstance(k, int) and k >= 1 and isinstance(d, int) and d >= 1):
        raise FormatError("spec: rank and dim must be positive integers")
    if not isinstance(data["subspaces"], list):
        raise FormatError("spec: subspaces must be an array")
    pairs = []
    for idx, entry in enumerate(data["subspaces"]):
        where = f"subspaces[{idx}]"
        if not isinstance(entry, dict) or "degree" not in entry or "basis" not in entry:
            raise FormatError(f"{where}: needs 'degree' and 'basis'")
        deg = entry["degree"]
        if not (isinstance(deg, list) and len(deg) == k
                and all(isinstance(v, int) and not isinstance(v, bool) for v in deg)):
            raise FormatError(f"{where}: degree must be {k} integers")
        if not isinstance(entry["basis"], list) or not entry["basis"]:
            raise FormatError(f"{where}: basis must be a nonempty array")
        basis = [matrix_from_json(m, d, f"{where}.basis[{j}]") for j, m in enumerate(entry["basis"])]
        pairs.append((deg, basis))
    try:
        return GradingSpec.from_pairs(d, k, pairs)
    except SpecError as exc:
        raise FormatError(f"spec: {exc}") from exc


def spec_to_json(spec: GradingSpec) -> dict:
    return {
        "rank": spec.rank,
        "dim": spec.dim,
        "subspaces": [{"degree": list(g), "basis": [matrix_to_json(b) for b in basis]}
                      for g, basis in spec.subspaces.items()],
    }


def read_spec(path: str | Path) -> GradingSpec:
    return spec_from_json(read_json(path))


def write_spec(spec: GradingSpec, path: str | Path) -> None:
    Path(path).write_text(dumps(spec_to_json(spec)) + "\n", encoding="utf-8")


def read_matrix(path: str | Path, dim: int | None = None) -> np.ndarray:
    return matrix_from_json(read_json(path), dim, str(path))


def parse_weights(text: str) -> np.ndarray:
    """Weights from ``"[[1],[0]]"`` (JSON), ``"1,0"`` (k = 1) or ``"1,0;0,1"``."""
    text = text.strip()
    try:
        if text.startswith("["):
            w = np.array(json.loads(text), dtype=np.int64)
        elif ";" in text:
            w = np.array([[int(v) for v in row.split(",")] for row in text.split(";")], dtype=np.int64)
        else:
            w = np.array([[int(v)] for v in text.split(",")], dtype=np.int64)
    except (ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot parse weights {text!r}") from exc
    if w.ndim == 1:
        w = w[:, None]
    if w.ndim != 2 or w.size == 0:
        raise FormatError(f"weights {text!r} must form a (d, k) integer table")
    return w


def parse_multi_indices(text: str, k: int) -> list[tuple[int, ...]]:
    """``"1,2,4"`` -> diagonal indices (t,...,t); ``"1:2,3:4"`` -> explicit ones."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            coords = tuple(int(v) for v in item.split(":"))
        except ValueError as exc:
            raise FormatError(f"cannot parse index {item!r}") from exc
        if len(coords) == 1:
            coords = coords * k
        if len(coords) != k:
            raise FormatError(f"index {item!r} does not have rank {k}")
        out.append(coords)
    if not out:
        raise FormatError("empty index list")
    return out


def format_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([("%.12e" % v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    Path(path).write_text(format_csv(header, rows), encoding="utf-8")


def trigpoly_rows(poly) -> list[tuple[int, float, float]]:
    """Rows ``n,re,im`` for a TrigPoly."""
    return [(int(n), float(c.real), float(c.imag)) for n, c in zip(poly.degrees(), poly.coeffs)]


def samples_rows(t, values) -> list[tuple[float, float, float]]:
    """Rows ``t,re,im`` for sampled data."""
    return [(float(a), float(v.real), float(v.imag)) for a, v in zip(t, np.asarray(values))]


def read_samples_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``t,re,im`` sampled data."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != ["t", "re", "im"]:
        raise FormatError(f"{path}: expected header t,re,im")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric entry") from exc
    if data.ndim != 2 or data.shape[1] != 3 or data.shape[0] < 2:
        raise FormatError(f"{path}: need at least two rows of t,re,im")
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


def read_trigpoly_csv(path: str | Path):
    from .function_models import TrigPoly

    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != ["n", "re", "im"]:
        raise FormatError(f"{path}: expected header n,re,im")
    try:
        return TrigPoly.from_dict({int(r[0]): complex(float(r[1]), float(r[2])) for r in rows[1:] if r})
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: malformed row") from exc
