"""Command-line entry point: ``ffmimo {rate,simulate,mindist,transform,figure}``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import rates
from .channel import RealChannel, transform
from .codes import CodebookView
from .config import Document, experiment_config, finite_channel, mc_config, tomllib
from .errors import FfmimoError
from .experiments import PRESETS, run_figure
from .gfmat import GfMatrix
from .mc import run
from .textio import parse_matrix

log = logging.getLogger("ffmimo")

RATE_SCHEMES = ("rep", "anse", "sc", "zf", "elbc", "lbc", "capacity", "lincomb")


def _table(header, rows, fmt: str) -> str:
    sep = {"csv": ",", "tsv": "\t"}[fmt]
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=sep, lineterminator="\n")
    w.writerow(header)
    w.writerows([_cell(x) for x in r] for r in rows)
    return buf.getvalue()


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.10g}"
    return str(x)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _scheme_rate(name: str, fc, args) -> rates.SchemeRate:
    if name == "rep":
        if fc.n_t != 1:
            raise ValueError("rep needs a single transmit antenna")
        return rates.rate_repetition(fc.eps, fc.p)
    if name == "anse":
        return rates.rate_antenna_selection(fc)
    if name == "sc":
        return rates.rate_sc(fc)
    if name == "zf":
        return rates.rate_zf(fc)
    if name == "elbc":
        return rates.rate_elbc(fc)
    if name == "lbc":
        return rates.rate_lbc(fc, args.trials, args.seed)
    if name == "capacity":
        return rates.simo_capacity_numeric(fc) if fc.n_t == 1 else rates.mimo_sum_capacity(fc)
    w, bits = rates.best_linear_combiner(fc)
    return rates.SchemeRate("LinComb", bits, {"w": " ".join(map(str, w))})


def cmd_rate(args) -> str:
    fc = finite_channel(Document.load(args.spec))
    names = RATE_SCHEMES if args.scheme == "all" else [args.scheme]
    rows = []
    for name in names:
        try:
            r = _scheme_rate(name, fc, args)
        except (ValueError, FfmimoError) as exc:
            if args.scheme != "all":
                raise
            log.info("%s skipped: %s", name, exc)
            continue
        m = r.meta
        pe = m.get("pe", m.get("block_error"))
        se = m.get("stderr")
        if se is None and "block_error" in m:
            se = float(np.sqrt(pe * (1 - pe) / m["trials"]))
        rows.append([r.scheme, r.bits, pe, m.get("d_min"), m.get("trials", 0), se,
                     args.seed if "trials" in m else None])
    header = ["scheme", "rate_bits", "pe", "d_min", "trials", "stderr", "seed"]
    return _table(header, rows, args.format)


def cmd_simulate(args) -> str:
    cfg = mc_config(Document.load(args.config), trials=args.trials, seed=args.seed, workers=args.workers)
    res = run(cfg)
    rows = [[f"stream{k}", cfg.scheme, q, se, res.trials, res.seed]
            for k, (q, se) in enumerate(zip(res.stream_errors, res.stream_stderr))]
    rows.append(["block", cfg.scheme, res.block_error, res.block_stderr, res.trials, res.seed])
    return _table(["target", "scheme", "error_rate", "stderr", "trials", "seed"], rows, args.format)


def cmd_mindist(args) -> str:
    path = Path(args.matrix)
    entries, p = parse_matrix(path.read_text(), str(path))
    return f"{CodebookView(GfMatrix(entries, p)).d_min}\n"


def cmd_transform(args) -> str:
    path = Path(args.channel)
    fc = transform(RealChannel.from_text(path.read_text(), str(path)))
    header = ["antenna"] + [f"Q{j}" for j in range(fc.n_t)] + [f"A{j}" for j in range(fc.n_t)] + \
             ["eps", "entropy_bits", "pmf_method"]
    rows = [[m, *fc.Q.array[m], *fc.A[m], f.error_prob, f.entropy(), f.method]
            for m, f in enumerate(fc.noise_pmfs)]
    return _table(header, rows, args.format)


def _parse_override(s: str) -> tuple[str, object]:
    k, sep, v = s.partition("=")
    if not sep or not k.strip():
        raise argparse.ArgumentTypeError(f"expected key=value, got {s!r}")
    try:
        return k.strip(), tomllib.loads(f"x = {v}")["x"]
    except tomllib.TOMLDecodeError:
        return k.strip(), v.strip()


def cmd_figure(args) -> str:
    doc = Document.load(args.config) if args.config else None
    figure = None if args.name == "from-config" else args.name
    overrides = dict(args.set or [])
    overrides.update(seed=args.seed, trials=args.trials, workers=args.workers)
    cfg = experiment_config(doc, figure, **overrides)
    return run_figure(cfg, args.format)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "tsv"), default="csv")
    common.add_argument("--workers", type=int, default=None, help="worker processes")
    common.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="ffmimo", description="Finite-field MIMO rates and simulations.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("rate", parents=[common], help="achievable rate of a scheme on a channel description")
    p.add_argument("spec", help="channel description (TOML)")
    p.add_argument("--scheme", choices=RATE_SCHEMES + ("all",), default="all")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo detection error rates")
    p.add_argument("config", help="simulation config (TOML)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mindist", parents=[common], help="minimum distance of a generator matrix file")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_mindist)

    p = sub.add_parser("transform", parents=[common], help="finite-field model of a real channel file")
    p.add_argument("channel")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("figure", parents=[common], help="run a figure preset or a custom sweep")
    p.add_argument("name", choices=sorted(PRESETS) + ["custom", "from-config"])
    p.add_argument("--config", help="sweep settings (TOML) applied on top of the preset")
    p.add_argument("--set", action="append", type=_parse_override, metavar="KEY=VALUE",
                   help="override one setting, e.g. --set n_r=[3,5]")
    p.set_defaults(func=cmd_figure)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.cmd in ("rate",):
        args.trials = 10**5 if args.trials is None else args.trials
        args.seed = 0 if args.seed is None else args.seed
    try:
        _emit(args.func(args), args.out)
    except (FfmimoError, ValueError, OSError) as exc:
        print(f"ffmimo: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
