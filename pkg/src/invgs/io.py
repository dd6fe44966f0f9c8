"""
Plain-text file formats.

Values are written as ``%.16e`` (17 significant digits), which parses back
to the identical double.  Readers accept either comma- or
whitespace-separated fields; writers emit commas.  Every writer goes through
a temporary file and ``os.replace`` so a crash never leaves a partial file.

MatrixFile
    One matrix row per line, no header.
TensorFile
    ``dims M B N`` then ``N`` blocks of ``M`` lines with ``B`` values each,
    blocks separated by a single blank line.
CoeffFile
    ``n_vectors N`` then ``N(N-1)/2`` values, one per line, in packed order.
ReportFile
    ``key = value`` lines: method, seed, M, N, max_po, mae, mse, psnr, and
    optionally keep.  ``seed`` may be ``none``; ``psnr`` may be ``inf``.
PlotFile
    ``k,value`` lines with ``k`` running 1 .. N(N-1)/2.
"""
from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import PackedCoefficients, n_coefficients
from .lab import ExperimentRow

REPORT_KEYS = ("method", "seed", "M", "N", "max_po", "mae", "mse", "psnr")
OPTIONAL_REPORT_KEYS = ("keep",)


class FormatError(ValueError):
    """Malformed input file.  ``line`` and ``column`` are 1-based when known."""

    def __init__(self, path, message, line=None, column=None):
        self.path = str(path)
        self.line = line
        self.column = column
        where = self.path
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")


def fmt(x):
    return "%.16e" % x


def atomic_write(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_lines(path):
    with open(path) as fh:
        return fh.read().splitlines()


def _splitter(lines):
    if any("," in line for line in lines):
        return lambda line: [f.strip() for f in line.split(",")]
    return str.split


def _parse_float(path, token, line, column, finite=True):
    try:
        x = float(token)
    except ValueError:
        raise FormatError(path, f"not a number: {token!r}", line, column) from None
    if finite and not math.isfinite(x):
        raise FormatError(path, f"non-finite value: {token!r}", line, column)
    return x


def _parse_row(path, split, text, lineno):
    return [_parse_float(path, tok, lineno, col) for col, tok in enumerate(split(text), 1)]


def _header(path, lines, keyword, count):
    if not lines:
        raise FormatError(path, "empty file", 1)
    fields = lines[0].split()
    if len(fields) != count + 1 or fields[0] != keyword:
        raise FormatError(path, f"expected header '{keyword}' with {count} integer(s)", 1)
    try:
        dims = [int(f) for f in fields[1:]]
    except ValueError:
        raise FormatError(path, "header dimensions must be integers", 1) from None
    if any(d < 1 for d in dims):
        raise FormatError(path, "header dimensions must be >= 1", 1)
    return dims


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------

def write_matrix(v, path):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {v.shape}")
    atomic_write(path, "".join(",".join(fmt(x) for x in row) + "\n" for row in v))


def read_matrix(path):
    lines = _read_lines(path)
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise FormatError(path, "empty matrix file", 1)
    split = _splitter(lines)
    rows = []
    for i, text in enumerate(lines, 1):
        if not text.strip():
            raise FormatError(path, "blank line inside matrix", i)
        row = _parse_row(path, split, text, i)
        if rows and len(row) != len(rows[0]):
            raise FormatError(path, f"expected {len(rows[0])} fields, got {len(row)}", i)
        rows.append(row)
    return np.array(rows, dtype=np.float64)


def is_tensor_file(path):
    """True if the file starts with a ``dims`` header."""
    with open(path) as fh:
        first = fh.readline().split()
    return bool(first) and first[0] == "dims"


# ---------------------------------------------------------------------------
# Tensors
# ---------------------------------------------------------------------------

def write_tensor(v, path):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 3:
        raise ValueError(f"expected a 3-D array, got shape {v.shape}")
    m, b, n = v.shape
    blocks = [
        "".join(",".join(fmt(x) for x in row) + "\n" for row in v[:, :, j])
        for j in range(n)
    ]
    atomic_write(path, f"dims {m} {b} {n}\n" + "\n".join(blocks))


def read_tensor(path):
    lines = _read_lines(path)
    m, b, n = _header(path, lines, "dims", 3)
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    split = _splitter(body)
    out = np.empty((m, b, n))
    pos = 0
    for j in range(n):
        if j > 0:
            if pos >= len(body) or body[pos].strip():
                raise FormatError(path, "expected a blank line between blocks", pos + 2)
            pos += 1
        for i in range(m):
            if pos >= len(body) or not body[pos].strip():
                raise FormatError(
                    path, f"declared dims {m} {b} {n} but block {j + 1} is short", pos + 2
                )
            row = _parse_row(path, split, body[pos], pos + 2)
            if len(row) != b:
                raise FormatError(path, f"expected {b} fields, got {len(row)}", pos + 2)
            out[i, :, j] = row
            pos += 1
    if pos != len(body):
        raise FormatError(path, f"declared dims {m} {b} {n} but file has more data", pos + 2)
    return out


# ---------------------------------------------------------------------------
# Packed coefficients
# ---------------------------------------------------------------------------

def write_coeffs(r, path):
    if not isinstance(r, PackedCoefficients):
        raise TypeError("write_coeffs expects PackedCoefficients")
    text = f"n_vectors {r.n_vectors}\n" + "".join(fmt(x) + "\n" for x in r.values)
    atomic_write(path, text)


def read_coeffs(path):
    lines = _read_lines(path)
    (n,) = _header(path, lines, "n_vectors", 1)
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    expected = n_coefficients(n)
    if len(body) != expected:
        raise FormatError(
            path, f"n_vectors {n} needs {expected} coefficients, found {len(body)}"
        )
    values = [_parse_float(path, text.strip(), i, 1) for i, text in enumerate(body, 2)]
    return PackedCoefficients(np.array(values), n)


# ---------------------------------------------------------------------------
# Reports and plot data
# ---------------------------------------------------------------------------

def _report_value(x):
    if x is None:
        return "none"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return fmt(x)


def write_report(row, path):
    """Write an :class:`ExperimentRow` as ``key = value`` lines."""
    items = [
        ("method", row.method),
        ("seed", row.seed),
        ("M", row.m),
        ("N", row.n),
        ("max_po", row.max_po),
        ("mae", row.mae),
        ("mse", row.mse),
        ("psnr", row.psnr),
    ]
    if row.keep is not None:
        items.append(("keep", row.keep))
    atomic_write(path, "".join(f"{k} = {_report_value(v)}\n" for k, v in items))


def read_report(path):
    """Parse a ReportFile back into an :class:`ExperimentRow`."""
    found = {}
    for i, text in enumerate(_read_lines(path), 1):
        if not text.strip():
            continue
        key, sep, value = text.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise FormatError(path, "expected 'key = value'", i)
        if key not in REPORT_KEYS and key not in OPTIONAL_REPORT_KEYS:
            raise FormatError(path, f"unknown key {key!r}", i)
        if key in found:
            raise FormatError(path, f"duplicate key {key!r}", i)
        found[key] = (value, i)
    missing = [k for k in REPORT_KEYS if k not in found]
    if missing:
        raise FormatError(path, f"missing keys: {', '.join(missing)}")

    def integer(key, optional=False):
        value, line = found[key]
        if optional and value == "none":
            return None
        try:
            return int(value)
        except ValueError:
            raise FormatError(path, f"{key} must be an integer", line) from None

    def real(key, optional=True):
        value, line = found[key]
        if optional and value == "none":
            return None
        return _parse_float(path, value, line, None, finite=False)

    return ExperimentRow(
        n=integer("N"),
        max_po=real("max_po", optional=False),
        method=found["method"][0],
        seed=integer("seed", optional=True),
        m=integer("M"),
        mae=real("mae"),
        mse=real("mse"),
        psnr=real("psnr"),
        keep=integer("keep", optional=True) if "keep" in found else None,
    )


def write_plot(po_vector, path):
    w = np.asarray(po_vector, dtype=np.float64).reshape(-1)
    atomic_write(path, "".join(f"{k},{fmt(x)}\n" for k, x in enumerate(w, 1)))


def read_plot(path):
    lines = [line for line in _read_lines(path) if line.strip()]
    split = _splitter(lines)
    values = []
    for i, text in enumerate(lines, 1):
        fields = split(text)
        if len(fields) != 2:
            raise FormatError(path, f"expected 2 fields, got {len(fields)}", i)
        try:
            k = int(fields[0])
        except ValueError:
            raise FormatError(path, f"pair index must be an integer: {fields[0]!r}", i, 1) from None
        if k != i:
            raise FormatError(path, f"pair index {k} out of sequence (expected {i})", i, 1)
        values.append(_parse_float(path, fields[1], i, 2))
    n = 1
    while n * (n - 1) // 2 < len(values):
        n += 1
    if n * (n - 1) // 2 != len(values):
        raise FormatError(path, f"{len(values)} pairs is not N(N-1)/2 for any N")
    return np.array(values, dtype=np.float64)
