"""Plain-text matrix and channel records.

Matrix file::

    # comments and blank lines are ignored
    rows cols p
    <row 1: cols integers>
    ...

Real channel file: same header, then ``snr <value>``, optionally
``seed <int>``, then ``rows`` lines of ``cols`` floats.
"""

from __future__ import annotations

import re
from typing import Iterator

import numpy as np

from .errors import ParseError
from .gfmat import check_prime

_TOKEN = re.compile(r"\S+")


def _lines(text: str) -> Iterator[tuple[int, list[tuple[int, str]]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [(m.start() + 1, m.group()) for m in _TOKEN.finditer(body)]
        if toks:
            yield lineno, toks


def _num(tok: tuple[int, str], lineno: int, kind, source: str, what: str):
    col, s = tok
    try:
        return kind(s)
    except ValueError:
        raise ParseError(f"expected {what}, got {s!r}", lineno, col, source) from None


def _header(lines, source: str) -> tuple[int, int, int, int]:
    try:
        lineno, toks = next(lines)
    except StopIteration:
        raise ParseError("empty file: expected header 'rows cols p'", 1, 1, source) from None
    if len(toks) != 3:
        raise ParseError(f"header needs 'rows cols p', got {len(toks)} fields", lineno, 1, source)
    rows, cols, p = (_num(t, lineno, int, source, "an integer") for t in toks)
    if rows < 1 or cols < 1:
        raise ParseError("rows and cols must be positive", lineno, 1, source)
    try:
        check_prime(p)
    except ValueError as exc:
        raise ParseError(str(exc), lineno, toks[2][0], source) from None
    return rows, cols, p, lineno


def _rows(lines, rows: int, cols: int, kind, source: str, what: str, last: int) -> np.ndarray:
    out = []
    for _ in range(rows):
        try:
            lineno, toks = next(lines)
        except StopIteration:
            raise ParseError(f"expected {rows} matrix rows, got {len(out)}", last + 1, 1, source) from None
        if len(toks) != cols:
            if len(toks) > cols:
                col = toks[cols][0]
            else:
                col = toks[-1][0] + len(toks[-1][1]) + 1
            raise ParseError(f"expected {cols} entries, got {len(toks)}", lineno, col, source)
        out.append([_num(t, lineno, kind, source, what) for t in toks])
        last = lineno
    extra = next(lines, None)
    if extra is not None:
        raise ParseError("unexpected trailing data", extra[0], extra[1][0][0], source)
    return np.array(out)


def parse_matrix(text: str, source: str = "<matrix>") -> tuple[np.ndarray, int]:
    """Parse an integer matrix file; returns ``(entries, p)``."""
    lines = _lines(text)
    rows, cols, p, last = _header(lines, source)
    return _rows(lines, rows, cols, int, source, "an integer", last).astype(np.int64), p


def format_matrix(a: np.ndarray, p: int) -> str:
    a = np.asarray(a)
    body = "\n".join(" ".join(str(int(x)) for x in row) for row in a)
    return f"{a.shape[0]} {a.shape[1]} {p}\n{body}\n"


def parse_real_channel(text: str, source: str = "<channel>") -> tuple[np.ndarray, float, int, int | None]:
    """Parse a real channel record; returns ``(H, snr, p, seed)``."""
    lines = _lines(text)
    rows, cols, p, last = _header(lines, source)
    snr = None
    seed = None
    while True:
        try:
            lineno, toks = next(lines)
        except StopIteration:
            raise ParseError("missing matrix rows", last + 1, 1, source) from None
        key = toks[0][1].lower()
        if key in ("snr", "seed"):
            if len(toks) != 2:
                raise ParseError(f"expected '{key} <value>'", lineno, toks[0][0], source)
            if key == "snr":
                snr = _num(toks[1], lineno, float, source, "a float")
            else:
                seed = _num(toks[1], lineno, int, source, "an integer")
            last = lineno
            continue
        break
    if snr is None:
        raise ParseError("missing 'snr <value>' line before the matrix", lineno, 1, source)

    def chained():
        yield lineno, toks
        yield from lines

    H = _rows(chained(), rows, cols, float, source, "a float", last).astype(float)
    return H, snr, p, seed


def format_real_channel(H: np.ndarray, snr: float, p: int, seed: int | None = None) -> str:
    H = np.asarray(H, dtype=float)
    out = [f"{H.shape[0]} {H.shape[1]} {p}", f"snr {snr!r}"]
    if seed is not None:
        out.append(f"seed {int(seed)}")
    out += [" ".join(repr(float(x)) for x in row) for row in H]
    return "\n".join(out) + "\n"
