"""CSV and key=value file formats.

Pattern CSV: header ``q_norm,intensity``; joint-rate CSV (long form):
header ``q_norm,qp_norm,rate``. Numbers use ``repr`` so they round-trip
exactly. Files are UTF-8 with ``\\n`` line endings.
"""
import math

import numpy as np

from .errors import DataParseError

PATTERN_HEADER = "q_norm,intensity"
JOINT_HEADER = "q_norm,qp_norm,rate"


def _fmt(x):
    return repr(float(x))


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_pattern_csv(path, q, intensity):
    lines = [PATTERN_HEADER]
    lines.extend(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(q, intensity))
    _write_lines(path, lines)


def write_columns_csv(path, header, columns):
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    _write_lines(path, lines)


def write_joint_csv(path, q, values):
    """Row-major long form: one line per (q, q') pair."""
    lines = [JOINT_HEADER]
    qs = [_fmt(v) for v in q]
    for i, qi in enumerate(qs):
        row = values[i]
        lines.extend(f"{qi},{qj},{_fmt(row[j])}" for j, qj in enumerate(qs))
    _write_lines(path, lines)


def read_pattern_csv(path):
    """Read a pattern CSV into ``(q, intensity)`` arrays.

    Blank lines and ``#`` comments are skipped. Intensities may be negative
    (background-subtracted or noisy data); ordering is preserved.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except UnicodeDecodeError as exc:
        raise DataParseError(f"not UTF-8 text ({exc.reason})", path=path) from None
    q, y = [], []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line.replace(" ", "") != PATTERN_HEADER:
                raise DataParseError(f"expected header {PATTERN_HEADER!r}, got {line!r}",
                                     line=lineno, path=path)
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataParseError(f"expected 2 columns, got {len(parts)}", line=lineno, path=path)
        try:
            a, b = float(parts[0]), float(parts[1])
        except ValueError:
            raise DataParseError(f"non-numeric value in {line!r}", line=lineno, path=path) from None
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DataParseError(f"non-finite value in {line!r}", line=lineno, path=path)
        q.append(a)
        y.append(b)
    if not header_seen:
        raise DataParseError("empty data file", path=path)
    if not q:
        raise DataParseError("data file has a header but no rows", path=path)
    return np.array(q), np.array(y)


def write_keyvalue(path, items):
    lines = [f"{key} = {value}" for key, value in items]
    _write_lines(path, lines)


def read_keyvalue(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataParseError(f"expected key = value, got {line!r}", line=lineno, path=path)
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value
    return out
