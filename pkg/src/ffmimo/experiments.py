"""Figure presets and grid sweeps producing plot-ready CSV.

Every grid point is evaluated independently from substreams keyed by
``(seed, point index, channel index)``; channel index ``i`` of an ensemble
gets the same crossover draw and simulation seed at every grid point, so the
curves of one figure share random numbers.  Rows are emitted in grid order
whatever the number of workers.
"""

from __future__ import annotations

import copy
import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ._rng import substream
from .channel import FiniteChannel, RealChannel, transform
from .codes import CodebookView, messages
from .errors import FfmimoError, UnfixableChannelError
from .gfmat import GfMatrix, mat_rank
from .mc import draw_random_Q
from .rates import (
    SchemeRate,
    linear_combiner_rate,
    mimo_sum_capacity,
    rate_antenna_selection,
    rate_elbc,
    rate_lbc,
    rate_repetition,
    rate_repetition_mc,
    rate_sc,
    rate_zf,
    simo_capacity,
    simo_capacity_numeric,
)

COLUMNS = ("figure", "p", "N_t", "N_r", "eps_spec", "snr", "scheme", "rate_bits", "pe", "d_min",
           "trials", "stderr", "seed", "n_channels")
SCHEME_NAMES = ("AnSe", "LinComb", "Capacity", "Rep", "Rep-MC", "SC", "ZF", "eLBC", "LBC")
MAX_CONDITIONAL_DRAWS = 10**6

_K_EPS, _K_Q, _K_SIM, _K_REJ, _K_H = 0xE5, 0x0B, 0x51, 0x2E, 0x4A


@dataclass
class ExperimentConfig:
    """A sweep over ``p x N_t x N_r x (eps | snr) x d_min``.

    Crossovers come from ``eps`` (fixed value per grid point) or, when
    ``eps_range`` is set, are drawn uniformly per antenna.  Giving ``snr``
    instead builds real Gaussian channels with iid N(0, 1) entries and runs
    them through the front end.  ``d_min`` conditions a random-Q ensemble on
    the minimum distance of ``Q``.  ``channels`` is the ensemble size; a
    SIMO point with a fixed ``eps`` uses the all-ones channel and needs no
    ensemble.
    """

    figure: str = "custom"
    p: list[int] = field(default_factory=lambda: [2])
    n_t: list[int] = field(default_factory=lambda: [1])
    n_r: list[int] = field(default_factory=lambda: [1])
    eps: list[float] | None = None
    eps_range: tuple[float, float] | None = None
    snr: list[float] | None = None
    d_min: list[int] | None = None
    schemes: list[str] = field(default_factory=lambda: ["AnSe"])
    channels: int = 1
    trials: int = 0
    seed: int = 0
    workers: int = 1
    note: str = ""

    def __post_init__(self):
        for name in ("p", "n_t", "n_r"):
            if not getattr(self, name):
                raise ValueError(f"grid axis {name!r} is empty")
        if sum(x is not None for x in (self.eps, self.eps_range, self.snr)) != 1:
            raise ValueError("give exactly one of eps, eps_range, snr")
        if self.eps is not None and not self.eps:
            raise ValueError("grid axis 'eps' is empty")
        if self.snr is not None and not self.snr:
            raise ValueError("grid axis 'snr' is empty")
        if self.d_min is not None and not self.d_min:
            raise ValueError("grid axis 'd_min' is empty")
        bad = [s for s in self.schemes if s not in SCHEME_NAMES]
        if bad or not self.schemes:
            raise ValueError(f"unknown schemes {bad}; choose from {SCHEME_NAMES}")
        if self.channels < 1 or self.trials < 0:
            raise ValueError("channels must be >= 1 and trials >= 0")

    def points(self) -> list[dict]:
        out = []
        for p in self.p:
            for n_t in self.n_t:
                for n_r in self.n_r:
                    for x in (self.snr or self.eps or [None]):
                        for d in (self.d_min or [None]):
                            out.append({"p": p, "n_t": n_t, "n_r": n_r,
                                        "eps": x if self.eps is not None else None,
                                        "snr": x if self.snr is not None else None, "d_min": d})
        return out

    def describe(self) -> str:
        d = asdict(self)
        d.pop("workers")
        return " ".join(f"{k}={v}" for k, v in d.items() if v not in (None, "") and k != "note")


_EPS_GRID = [0.01, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5]

PRESETS: dict[str, ExperimentConfig] = {
    "fig3": ExperimentConfig(
        figure="fig3", p=[2], n_t=[1], n_r=[2], eps=_EPS_GRID, schemes=["AnSe", "LinComb", "Capacity"],
        note="N_r=2 over Z_2, equal crossover on both antennas; LinComb is log p - H(z~_1 + z~_2), "
             "the combined-noise rate of the all-ones combiner; "
             "Capacity is H(u) - sum H(z~) computed assuming independent noise"),
    "fig4": ExperimentConfig(
        figure="fig4", p=[2], n_t=[1], n_r=list(range(1, 16)), eps=[0.15],
        schemes=["AnSe", "Rep", "Rep-MC", "Capacity"], trials=10**4,
        note="p=2, eps=0.15, sweep N_r; Rep-MC simulates plurality decoding"),
    "fig5": ExperimentConfig(
        figure="fig5", p=[2, 3, 5, 7], n_t=[1], n_r=[7], eps=[0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
        schemes=["Rep", "Rep-MC"], trials=10**4,
        note="N_r=7, sweep p; Rep is the uniform-off-zero lower bound, Rep-MC the plug-in estimate"),
    "fig6": ExperimentConfig(
        figure="fig6", p=[5], n_t=[2], n_r=[5], eps_range=(0.05, 0.15), d_min=[1, 2, 3, 4],
        schemes=["AnSe", "eLBC", "LBC"], channels=100, trials=10**4,
        note="N_t=2, N_r=5, p=5; random full-rank Q conditioned on d_min(Q)=l by rejection; "
             "eps ~ U[0.05,0.15] per antenna"),
    "fig7": ExperimentConfig(
        figure="fig7", p=[2], n_t=[6], n_r=[16, 20, 24, 32, 40, 48, 64], eps_range=(0.05, 0.15),
        schemes=["AnSe", "eLBC", "LBC"], channels=20, trials=10**4,
        note="N_t=6 over Z_2, eps ~ U[0.05,0.15] per antenna, random full-rank Q"),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown figure {name!r}; choose from {sorted(PRESETS)}")
    cfg = copy.deepcopy(PRESETS[name])
    names = {f.name for f in fields(ExperimentConfig)}
    for k, v in overrides.items():
        if k not in names:
            raise ValueError(f"unknown experiment setting {k!r}")
        setattr(cfg, k, v)
    cfg.__post_init__()
    return cfg


def _min_distance_batch(Qs: np.ndarray, p: int) -> np.ndarray:
    """d_min of a stack of generators ``Qs[b]`` (``N_r x N_t``) by enumeration."""
    msgs = messages(p, Qs.shape[2])[1:]
    cw = np.mod(np.einsum("mk,bnk->bmn", msgs, Qs), p)
    return np.count_nonzero(cw, axis=2).min(axis=1)


def _conditional_Qs(cfg: ExperimentConfig, idx: int, pt: dict) -> tuple[list[GfMatrix], int]:
    """Rejection-sample full-rank Q with the requested d_min; returns (matrices, draws)."""
    p, n_r, n_t, want = pt["p"], pt["n_r"], pt["n_t"], pt["d_min"]
    rng = substream(cfg.seed, _K_REJ, idx)
    found: list[GfMatrix] = []
    draws = 0
    while len(found) < cfg.channels and draws < MAX_CONDITIONAL_DRAWS:
        n = min(4096, MAX_CONDITIONAL_DRAWS - draws)
        Qs = rng.integers(0, p, size=(n, n_r, n_t))
        draws += n
        for b in np.nonzero(_min_distance_batch(Qs, p) == want)[0]:
            found.append(GfMatrix(Qs[b], p))
            if len(found) == cfg.channels:
                break
    return found, draws


def _crossovers(cfg: ExperimentConfig, i: int, n_r: int, eps) -> np.ndarray:
    if eps is not None:
        return np.full(n_r, float(eps))
    return substream(cfg.seed, _K_EPS, i, n_r).uniform(*cfg.eps_range, size=n_r)


def _channels(cfg: ExperimentConfig, idx: int, pt: dict) -> tuple[list[FiniteChannel], str]:
    p, n_r, n_t = pt["p"], pt["n_r"], pt["n_t"]
    if pt["snr"] is not None:
        out = []
        for i in range(cfg.channels):
            rng = substream(cfg.seed, _K_H, idx, i)
            for _ in range(100):
                try:
                    out.append(transform(RealChannel(rng.standard_normal((n_r, n_t)), pt["snr"], p)))
                    break
                except UnfixableChannelError:
                    continue
        return out, ""
    if pt["d_min"] is not None:
        Qs, draws = _conditional_Qs(cfg, idx, pt)
        diag = f"d_min={pt['d_min']} accepted={len(Qs)} draws={draws}"
        return [FiniteChannel.symmetric(Q, _crossovers(cfg, i, n_r, pt["eps"])) for i, Q in enumerate(Qs)], diag
    if n_t == 1 and pt["eps"] is not None:
        return [FiniteChannel.symmetric(GfMatrix(np.ones((n_r, 1), dtype=np.int64), p), pt["eps"])], ""
    out = []
    for i in range(cfg.channels):
        Q = draw_random_Q(n_r, n_t, p, rng=substream(cfg.seed, _K_Q, idx, i), nonzero=n_t == 1)
        out.append(FiniteChannel.symmetric(Q, _crossovers(cfg, i, n_r, pt["eps"])))
    return out, ""


def _scheme_rate(name: str, fc: FiniteChannel, cfg: ExperimentConfig, i: int, cb_cache: dict):
    """One scheme on one channel; ``None`` when it does not apply."""
    square = fc.n_r == fc.n_t
    simo = fc.n_t == 1
    sim_seed = int(substream(cfg.seed, _K_SIM, i).integers(2**62))
    if name == "AnSe":
        return rate_antenna_selection(fc)
    if name == "LinComb":
        if not simo:
            return None
        return SchemeRate("LinComb", linear_combiner_rate(fc, np.ones(fc.n_r, dtype=np.int64)),
                          {"max_bits": math.log2(fc.p)})
    if name == "Capacity":
        if simo:
            eps = fc.eps
            if fc.p == 2 and np.all(eps == eps[0]) and np.all(fc.Q.array == 1):
                return SchemeRate("Capacity", simo_capacity(float(eps[0]), fc.n_r),
                                  {"assume_independent": True, "max_bits": 1.0})
            return simo_capacity_numeric(fc)
        return mimo_sum_capacity(fc) if square else None
    if name == "Rep":
        return rate_repetition(fc.eps, fc.p) if simo else None
    if name == "Rep-MC":
        if not simo or cfg.trials == 0:
            return None
        return rate_repetition_mc(fc, cfg.trials, sim_seed)
    if name in ("SC", "ZF"):
        if not square:
            return None
        return rate_sc(fc) if name == "SC" else rate_zf(fc)
    cb = cb_cache.get(i)
    if cb is None:
        cb = cb_cache[i] = CodebookView(fc.Q)
    if name == "eLBC":
        return rate_elbc(fc, d_min=cb.d_min)
    if cfg.trials == 0:
        return None
    return rate_lbc(fc, cfg.trials, sim_seed, cb=cb)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.10g}"
    return str(x)


def _evaluate_point(args) -> tuple[list[dict], list[str]]:
    cfg, idx, pt = args
    if cfg.eps_range is not None:
        eps_spec = f"U[{cfg.eps_range[0]:g},{cfg.eps_range[1]:g}]"
    elif pt["eps"] is not None:
        eps_spec = f"{pt['eps']:g}"
    else:
        eps_spec = ""
    base = {"figure": cfg.figure, "p": pt["p"], "N_t": pt["n_t"], "N_r": pt["n_r"], "eps_spec": eps_spec,
            "snr": pt["snr"], "seed": cfg.seed}
    diagnostics = []
    if pt["n_r"] < pt["n_t"]:
        return [], [f"skipped: point {idx} has N_r < N_t"]
    chans, diag = _channels(cfg, idx, pt)
    where = f"point {idx} (p={pt['p']} N_t={pt['n_t']} N_r={pt['n_r']})"
    if diag:
        diagnostics.append(f"ensemble: {where} {diag}")
    rows = []
    if not chans:
        diagnostics.append(f"missing: {where} no usable channel")
        for name in cfg.schemes:
            rows.append({**base, "scheme": name, "d_min": pt["d_min"], "trials": cfg.trials, "n_channels": 0})
        return rows, diagnostics
    cb_cache: dict = {}
    for name in cfg.schemes:
        results = [(_scheme_rate(name, fc, cfg, i, cb_cache)) for i, fc in enumerate(chans)]
        if any(r is None for r in results):
            continue
        bits = math.fsum(r.bits for r in results) / len(results)
        pes = [r.meta.get("pe", r.meta.get("block_error")) for r in results]
        pe = math.fsum(pes) / len(pes) if all(x is not None for x in pes) else None
        mc = name in ("Rep-MC", "LBC")
        stderr = None
        if mc:
            se = [r.meta["stderr"] if "stderr" in r.meta else _block_se(r) for r in results]
            stderr = math.sqrt(math.fsum(s * s for s in se)) / len(se)
        if pt["d_min"] is not None:
            d_min = pt["d_min"]
        elif name in ("eLBC", "LBC"):
            d_min = math.fsum(r.meta["d_min"] for r in results) / len(results)
        else:
            d_min = None
        rows.append({**base, "scheme": name, "rate_bits": bits, "pe": pe, "d_min": d_min,
                     "trials": cfg.trials if mc else 0, "stderr": stderr, "n_channels": len(results)})
    return rows, diagnostics


def _block_se(r: SchemeRate) -> float:
    q, n = r.meta["block_error"], r.meta["trials"]
    return math.sqrt(q * (1 - q) / n)


def run_figure(cfg: ExperimentConfig, fmt: str = "csv") -> str:
    """Evaluate the sweep and return the delimited table (with ``#`` header lines)."""
    sep = {"csv": ",", "tsv": "\t"}[fmt]
    pts = cfg.points()
    jobs = [(cfg, i, pt) for i, pt in enumerate(pts)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            results = list(ex.map(_evaluate_point, jobs))
    else:
        results = [_evaluate_point(j) for j in jobs]
    buf = io.StringIO()
    buf.write(f"# {cfg.figure}: {cfg.note}\n" if cfg.note else f"# {cfg.figure}\n")
    buf.write(f"# config: {cfg.describe()}\n")
    for _, diags in results:
        for d in diags:
            buf.write(f"# {d}\n")
    w = csv.writer(buf, delimiter=sep, lineterminator="\n")
    w.writerow(COLUMNS)
    for rows, _ in results:
        for row in rows:
            w.writerow([_fmt(row.get(c)) for c in COLUMNS])
    return buf.getvalue()


def read_rows(text: str) -> list[dict]:
    """Parse a table written by :func:`run_figure` back into dicts of strings."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    sep = "\t" if "\t" in lines[0] else ","
    return list(csv.DictReader(lines, delimiter=sep))


class ExperimentError(FfmimoError, ValueError):
    pass
