"""Seeded size sweeps: generate, solve, approximate, measure.

One cell is one ``(n, seed index)`` pair.  The cell's graph seed is derived
from ``(master_seed, n, index)`` alone, so the output does not depend on the
order or the number of workers used to run the cells.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .asymptotics import approx_mixture, approx_sbm_equal, approx_sbm_general
from .errors import ParameterError
from .graphs import (
    Graph,
    SbmParams,
    WeightSpec,
    expected_adjacency_chung_lu,
    expected_adjacency_sbm,
    gen_chung_lu,
    gen_er,
    gen_sbm,
    realize_weights,
)
from .io import write_vector
from .metrics import max_relative_error, tv_distance
from .pagerank import PageRankConfig, pagerank_power
from .spectral import second_eigenvalue_magnitude

logger = logging.getLogger(__name__)

MODELS = ("er", "chung_lu", "sbm", "power_law")
CSV_HEADER = (
    "model,n,seed,alpha,preference,tv_error,max_relative_error,"
    "lambda2,degree_ratio,iterations,wall_time_ms,flags"
)
DEFAULT_SIZES = (1024, 2048, 4096, 8192)

# p_n = C log^7(n) / n, with C fixed so that p = 0.5 at n = 1024
ER_LOG7_C = 0.5 * 1024 / math.log(1024) ** 7
ER_DENSITY_CAP = 0.5


@dataclass
class ExperimentConfig:
    model: str
    sizes: list[int] = field(default_factory=lambda: list(DEFAULT_SIZES))
    seeds_per_size: int = 10
    alpha: float = 0.85
    preference: str = "uniform"
    model_params: dict = field(default_factory=dict)
    output_dir: str = "results"
    master_seed: int = 2017
    name: str = ""
    tol: float = 1e-10
    max_iter: int = 10_000
    # "full": disconnected samples are flagged and excluded from medians;
    # "giant": each sample is reduced to its largest connected component
    component: str = "full"
    spectral_method: str = "lanczos"
    record_timings: bool = False
    threads: int = 1
    dump_vectors: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ParameterError(f"unknown model {self.model!r}; choose from {MODELS}")
        if not self.sizes or any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ParameterError("sizes must be non-empty and strictly increasing")
        if self.seeds_per_size < 1:
            raise ParameterError("seeds_per_size must be >= 1")
        if not (0.0 <= self.alpha < 1.0):
            raise ParameterError("alpha must lie in [0, 1)")
        if self.component not in ("full", "giant"):
            raise ParameterError("component must be 'full' or 'giant'")
        if self.component == "giant" and self.model == "sbm":
            raise ParameterError("giant-component mode is not supported for the block model")
        parse_preference(self.preference)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config fields: {sorted(unknown)}")
        data = dict(data)
        if "sizes" in data:
            data["sizes"] = [int(s) for s in data["sizes"]]
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> ExperimentConfig:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data)


@dataclass(frozen=True)
class ExperimentRecord:
    model: str
    n: int
    seed: int
    alpha: float
    preference: str
    tv_error: float
    max_relative_error: float
    lambda2: float
    degree_ratio: float
    iterations: int
    wall_time_ms: float | None = None
    flags: str = ""

    @property
    def excluded(self) -> bool:
        return "disconnected" in self.flags.split(";")


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

_ER = {"density": "log7", "C": ER_LOG7_C, "cap": ER_DENSITY_CAP}
_CL = {"weights": "geometric_clipped", "mean_coefficient": 10.0, "mean_exponent": 1 / 3, "ratio": 7.0}
_PL = {"beta": 4.0, "avg_degree_exponent": 1 / 6, "max_degree_exponent": 1 / 3, "i0_form": "standard"}
_SBM = {"p": 0.1, "q": 0.01, "m_fraction": 0.5}

PRESETS = {
    "fig1_er": dict(model="er", model_params=_ER),
    "fig1_cl": dict(model="chung_lu", model_params=_CL),
    "fig2_er": dict(model="er", model_params=_ER),
    "fig2_cl": dict(model="chung_lu", model_params=_CL),
    "fig3_powerlaw": dict(model="power_law", model_params=_PL, component="giant"),
    "fig4_pointmass": dict(model="er", model_params=_ER, preference="point_mass(1)"),
    "fig5_sbm": dict(model="sbm", model_params=_SBM),
}

# y-axis quantities plotted for each figure
PRESET_PLOTS = {
    "fig1_er": ("max_relative_error",),
    "fig1_cl": ("max_relative_error",),
    "fig2_er": ("tv_error",),
    "fig2_cl": ("tv_error",),
    "fig3_powerlaw": ("tv_error", "max_relative_error"),
    "fig4_pointmass": ("tv_error", "max_relative_error"),
    "fig5_sbm": ("tv_error", "max_relative_error"),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    kwargs = {"name": name, **PRESETS[name]}
    kwargs["model_params"] = dict(kwargs["model_params"])
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------


_PREF_RE = re.compile(r"^(uniform|point_mass\((\d+)\)|community_indicator\(([12])\))$")


def parse_preference(tag: str) -> tuple[str, int | None]:
    m = _PREF_RE.match(tag.strip())
    if not m:
        raise ParameterError(
            f"bad preference {tag!r}; use uniform, point_mass(k) (1-based) or community_indicator(1|2)"
        )
    if m.group(2) is not None:
        k = int(m.group(2))
        if k < 1:
            raise ParameterError("point_mass index is 1-based")
        return "point_mass", k
    if m.group(3) is not None:
        return "community_indicator", int(m.group(3))
    return "uniform", None


def build_preference(tag: str, n: int, sbm: SbmParams | None = None) -> np.ndarray:
    kind, k = parse_preference(tag)
    if kind == "uniform":
        return np.full(n, 1.0 / n)
    if kind == "point_mass":
        if k > n:
            raise ParameterError(f"point_mass({k}) out of range for n={n}")
        v = np.zeros(n)
        v[k - 1] = 1.0
        return v
    if sbm is None:
        raise ParameterError("community_indicator preference needs the block model")
    v = np.zeros(n)
    block = slice(0, sbm.m) if k == 1 else slice(sbm.m, n)
    v[block] = 1.0
    return v / v.sum()


def cell_seed(master_seed: int, n: int, index: int) -> int:
    state = np.random.SeedSequence([int(master_seed) & ((1 << 64) - 1), n, index]).generate_state(1, np.uint64)
    return int(state[0])


def er_probability(n: int, params: dict) -> float:
    if "p" in params:
        return float(params["p"])
    p = params["C"] * math.log(n) ** 7 / n
    return min(params.get("cap", 1.0), p)


def weight_spec(model: str, n: int, params: dict) -> WeightSpec:
    if model == "chung_lu":
        kind = params.get("weights", "geometric_clipped")
        if kind == "geometric_clipped":
            mean = params["mean_coefficient"] * n ** params["mean_exponent"]
            return WeightSpec.geometric_clipped(mean, params.get("ratio", 7.0))
        if kind == "constant":
            return WeightSpec.constant(params["w"])
        raise ParameterError(f"unknown Chung-Lu weight family {kind!r}")
    if model == "power_law":
        return WeightSpec.power_law(
            params["beta"],
            n ** params["avg_degree_exponent"],
            n ** params["max_degree_exponent"],
            params.get("i0_form", "linear"),
        )
    raise ParameterError(f"model {model!r} has no weight spec")


def sbm_params(n: int, params: dict) -> SbmParams:
    m = int(params["m"]) if "m" in params else int(round(params.get("m_fraction", 0.5) * n))
    return SbmParams(m, n, params["p"], params["q"], params.get("allow_q_above_p", False))


@dataclass
class Instance:
    """A sampled graph plus what is needed to approximate and verify it."""

    graph: Graph
    expected_degrees: np.ndarray
    expectation: object
    sbm: SbmParams | None = None


def build_instance(model: str, n: int, params: dict, seed: int, threads: int = 1) -> Instance:
    if model == "er":
        p = er_probability(n, params)
        g = gen_er(n, p, seed, threads)
        w = np.full(n, n * p)
        return Instance(g, w, expected_adjacency_chung_lu(w))
    if model in ("chung_lu", "power_law"):
        w = realize_weights(weight_spec(model, n, params), n, seed=seed)
        g = gen_chung_lu(w, seed, threads=threads)
        return Instance(g, w, expected_adjacency_chung_lu(w))
    if model == "sbm":
        sp_ = sbm_params(n, params)
        g = gen_sbm(sp_, seed, threads)
        return Instance(g, sp_.expected_degrees(), expected_adjacency_sbm(sp_), sp_)
    raise ParameterError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def _approximation(cfg: ExperimentConfig, inst: Instance, g: Graph, v: np.ndarray) -> np.ndarray:
    if cfg.model == "sbm":
        sp_ = inst.sbm
        if 2 * sp_.m == sp_.n:
            return approx_sbm_equal(sp_.n, sp_.p, sp_.q, v, cfg.alpha)
        return approx_sbm_general(sp_, v, cfg.alpha)
    return approx_mixture(g, v, cfg.alpha)


def run_cell(cfg: ExperimentConfig, n: int, index: int) -> ExperimentRecord:
    seed = cell_seed(cfg.master_seed, n, index)
    t0 = time.perf_counter()
    inst = build_instance(cfg.model, n, cfg.model_params, seed)
    g = inst.graph
    flags: list[str] = []
    v = build_preference(cfg.preference, n, inst.sbm)

    if cfg.component == "giant" and not g.is_connected():
        keep = g.largest_component()
        flags.append(f"lcc_dropped={n - len(keep)}")
        g = g.subgraph(keep)
        kind, k = parse_preference(cfg.preference)
        if kind == "point_mass" and (k - 1) not in set(keep.tolist()):
            v = np.zeros(g.n)
            v[0] = 1.0
            flags.append("restart_moved")
        else:
            v = v[keep] / v[keep].sum()

    nan = float("nan")
    if g.degrees.min() == 0 or not g.is_connected():
        flags.append("disconnected")
        return ExperimentRecord(
            cfg.model, n, seed, cfg.alpha, cfg.preference, nan, nan, nan,
            nan if g.degrees.min() == 0 else float(g.degrees.max() / g.degrees.min()),
            0, _elapsed(cfg, t0), ";".join(flags),
        )

    res = pagerank_power(g, v, PageRankConfig(cfg.alpha, cfg.tol, cfg.max_iter))
    if not res.converged:
        flags.append("pagerank_nonconverged")
    pibar = _approximation(cfg, inst, g, v)
    est = second_eigenvalue_magnitude(g, tol=1e-6, max_iter=5000, seed=seed, method=cfg.spectral_method)
    if not est.converged:
        flags.append("lambda2_nonconverged")
    if cfg.dump_vectors:
        vec_dir = Path(cfg.output_dir) / "vectors"
        vec_dir.mkdir(parents=True, exist_ok=True)
        stem = f"{cfg.model}_n{n}_s{index}"
        write_vector(res.pi, vec_dir / f"{stem}_pi.txt")
        write_vector(pibar, vec_dir / f"{stem}_pibar.txt")
    if np.all(pibar > 0):
        rel = max_relative_error(res.pi, pibar)
    else:
        # only possible at alpha = 0 with a sparse restart vector
        rel = nan
        flags.append("relative_undefined")
    return ExperimentRecord(
        model=cfg.model,
        n=n,
        seed=seed,
        alpha=cfg.alpha,
        preference=cfg.preference,
        tv_error=tv_distance(res.pi, pibar),
        max_relative_error=rel,
        lambda2=est.value,
        degree_ratio=float(g.degrees.max() / g.degrees.min()),
        iterations=res.iterations,
        wall_time_ms=_elapsed(cfg, t0),
        flags=";".join(flags),
    )


def _elapsed(cfg, t0):
    return (time.perf_counter() - t0) * 1000.0 if cfg.record_timings else None


def sort_records(records):
    return sorted(records, key=lambda r: (r.model, r.n, r.seed))


def run_experiment(cfg: ExperimentConfig) -> tuple[list[ExperimentRecord], dict]:
    cfg.validate()
    cells = [(n, k) for n in cfg.sizes for k in range(cfg.seeds_per_size)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            records = list(pool.map(lambda c: run_cell(cfg, *c), cells))
    else:
        records = []
        for n, k in cells:
            logger.info("%s n=%d seed#%d", cfg.model, n, k)
            records.append(run_cell(cfg, n, k))
    records = sort_records(records)
    return records, summarize(records)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    if len(lx) < 2:
        return float("nan")
    lx = lx - lx.mean()
    return float((lx @ (ly - ly.mean())) / (lx @ lx))


def summarize(records) -> dict:
    by_model: dict[str, dict] = {}
    for model in sorted({r.model for r in records}):
        rows = [r for r in records if r.model == model]
        sizes = sorted({r.n for r in rows})
        per_n = []
        for n in sizes:
            cell = [r for r in rows if r.n == n]
            good = [r for r in cell if not r.excluded]
            per_n.append(
                {
                    "n": n,
                    "samples": len(cell),
                    "excluded": len(cell) - len(good),
                    "median_tv_error": _median([r.tv_error for r in good]),
                    "median_max_relative_error": _median([r.max_relative_error for r in good]),
                    "median_lambda2": _median([r.lambda2 for r in good]),
                }
            )
        entry = {"per_n": per_n, "excluded": sum(p["excluded"] for p in per_n)}
        for key in ("tv_error", "max_relative_error"):
            pts = [(p["n"], p[f"median_{key}"]) for p in per_n if p[f"median_{key}"] > 0]
            entry[f"slope_{key}"] = loglog_slope(*zip(*pts)) if len(pts) >= 2 else float("nan")
        by_model[model] = entry
    return by_model


def _median(values) -> float:
    return float(np.median(values)) if values else float("nan")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def emit_csv(records, path) -> Path:
    records = list(records)
    if not records:
        raise ParameterError("no records to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    attrs = CSV_HEADER.split(",")
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        for r in sort_records(records):
            writer.writerow([_fmt(getattr(r, a)) for a in attrs])
    return path


def read_csv(path) -> list[ExperimentRecord]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if ",".join(reader.fieldnames or []) != CSV_HEADER:
            raise ParameterError(f"{path}: unexpected header")
        for row in reader:
            out.append(
                ExperimentRecord(
                    model=row["model"],
                    n=int(row["n"]),
                    seed=int(row["seed"]),
                    alpha=float(row["alpha"]),
                    preference=row["preference"],
                    tv_error=float(row["tv_error"]),
                    max_relative_error=float(row["max_relative_error"]),
                    lambda2=float(row["lambda2"]),
                    degree_ratio=float(row["degree_ratio"]),
                    iterations=int(row["iterations"]),
                    wall_time_ms=float(row["wall_time_ms"]) if row["wall_time_ms"] else None,
                    flags=row["flags"],
                )
            )
    return out
