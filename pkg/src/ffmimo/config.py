"""Declarative TOML config files for channels, simulations and sweeps.

A channel file describes a :class:`~ffmimo.channel.FiniteChannel`::

    p = 2
    eps = [0.15, 0.15, 0.15]     # or: eps = 0.15 with n_r = 3
    Q = [[1], [1], [1]]          # optional, defaults to an all-ones column
    # pmfs = [[0.9, 0.1], ...]   # explicit noise marginals instead of eps
    # matrix = "q.txt"           # Q from a matrix file
    # real = "h.txt"             # a real channel file, run through the front end

Paths are relative to the config file.  Semantic errors are reported at the
line of the offending key.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .channel import FiniteChannel, RealChannel, transform
from .errors import ParseError
from .experiments import ExperimentConfig, preset
from .gfmat import GfMatrix
from .mc import McConfig
from .pmf import Pmf
from .textio import parse_matrix

_TOML_POS = re.compile(r"\(at line (\d+), column (\d+)\)")

CHANNEL_KEYS = {"p", "eps", "n_r", "Q", "pmfs", "matrix", "real"}
SIM_KEYS = {"scheme", "trials", "seed", "p", "n_t", "n_r", "eps", "eps_range", "noise", "batch_size", "workers"}


class Document:
    """A parsed TOML file that remembers its text for error positions."""

    def __init__(self, text: str, source: str = "<config>", base: Path | None = None):
        self.text = text
        self.source = source
        self.base = base or Path(".")
        try:
            self.data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            msg = str(exc)
            m = _TOML_POS.search(msg)
            if m:
                line, col = int(m.group(1)), int(m.group(2))
            else:
                lines = text.rstrip("\n").split("\n")
                line, col = len(lines), len(lines[-1]) + 1
            msg = re.sub(r"\s*\(at (end of document|line \d+, column \d+)\)", "", msg)
            raise ParseError(msg.strip(), line, col, source) from None

    @classmethod
    def load(cls, path) -> Document:
        path = Path(path)
        return cls(path.read_text(), str(path), path.parent)

    def line_of(self, key: str) -> tuple[int, int]:
        pat = re.compile(rf"^(\s*){re.escape(key)}\s*=", re.M)
        m = pat.search(self.text)
        if not m:
            return 1, 1
        return self.text.count("\n", 0, m.start()) + 1, len(m.group(1)) + 1

    def error(self, key: str, msg: str) -> ParseError:
        line, col = self.line_of(key)
        return ParseError(msg, line, col, self.source)

    def check_keys(self, table: dict, allowed: set[str]):
        for k in table:
            if k not in allowed:
                raise self.error(k, f"unknown key {k!r}")


def finite_channel(doc: Document, table: dict | None = None) -> FiniteChannel:
    """Build the channel described by ``table`` (default: the whole document)."""
    t = doc.data if table is None else table
    doc.check_keys(t, CHANNEL_KEYS)
    try:
        if "real" in t:
            path = doc.base / t["real"]
            return transform(RealChannel.from_text(path.read_text(), str(path)))
        if "p" not in t and "matrix" not in t:
            raise doc.error("p", "channel file needs p (or a matrix file)")
        if "matrix" in t:
            path = doc.base / t["matrix"]
            entries, p = parse_matrix(path.read_text(), str(path))
            Q = GfMatrix(entries, p)
        elif "Q" in t:
            Q = GfMatrix(np.asarray(t["Q"], dtype=np.int64), int(t["p"]))
        else:
            n_r = t.get("n_r", len(t["pmfs"] if "pmfs" in t else np.atleast_1d(t.get("eps", []))))
            Q = GfMatrix(np.ones((n_r, 1), dtype=np.int64), int(t["p"]))
        if "pmfs" in t:
            return FiniteChannel(Q, tuple(Pmf(np.asarray(f, dtype=float)) for f in t["pmfs"]))
        if "eps" not in t:
            raise doc.error("p", "channel file needs eps or pmfs")
        return FiniteChannel.symmetric(Q, t["eps"])
    except ParseError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        key = next((k for k in ("pmfs", "eps", "Q", "p") if k in t), "p")
        raise doc.error(key, str(exc)) from None


def mc_config(doc: Document, **overrides) -> McConfig:
    """``[simulation]`` settings plus an optional ``[channel]`` table."""
    sim = dict(doc.data.get("simulation", {}))
    extra = set(doc.data) - {"simulation", "channel"}
    if extra:
        k = sorted(extra)[0]
        raise doc.error(k, f"unknown key {k!r}")
    doc.check_keys(sim, SIM_KEYS)
    sim.update({k: v for k, v in overrides.items() if v is not None})
    if "channel" in doc.data:
        sim["channel"] = finite_channel(doc, doc.data["channel"])
    if "eps_range" in sim:
        sim["eps_range"] = tuple(sim["eps_range"])
    if "scheme" not in sim or "trials" not in sim:
        raise doc.error("scheme", "simulation needs scheme and trials")
    try:
        return McConfig(**sim)
    except (ValueError, TypeError) as exc:
        raise doc.error("scheme", str(exc)) from None


def experiment_config(doc: Document | None, figure: str | None, **overrides) -> ExperimentConfig:
    """A preset (or ``custom``) with settings from ``doc`` and then ``overrides``."""
    data = dict(doc.data) if doc is not None else {}
    grid = data.pop("grid", {})
    if not isinstance(grid, dict):
        raise doc.error("grid", "grid must be a table")
    figure = figure or data.pop("figure", None)
    data.pop("figure", None)
    if figure is None:
        raise (doc.error("figure", "no figure given") if doc else ValueError("no figure given"))
    settings = {**data, **grid, **{k: v for k, v in overrides.items() if v is not None}}
    if "eps_range" in settings:
        settings["eps_range"] = tuple(settings["eps_range"])
    for axis in ("p", "n_t", "n_r", "eps", "snr", "d_min"):
        if axis in settings and not isinstance(settings[axis], list):
            settings[axis] = [settings[axis]]
    try:
        if figure == "custom":
            base = {"figure": "custom", **settings}
            if not any(k in base for k in ("eps", "eps_range", "snr")):
                raise ValueError("custom sweep needs eps, eps_range or snr")
            for axis in ("eps", "eps_range", "snr"):
                base.setdefault(axis, None)
            return ExperimentConfig(**base)
        if any(k in settings for k in ("eps", "eps_range", "snr")):
            for axis in ("eps", "eps_range", "snr"):
                settings.setdefault(axis, None)
        return preset(figure, **settings)
    except (ValueError, TypeError) as exc:
        if doc is None:
            raise
        key = next((k for k in settings if k in str(exc)), "figure")
        raise doc.error(key, str(exc)) from None
