"""Wall and k sweeps over gridworlds: one BoundReport per (w, seed, k) cell."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ..bounds import make_report
from ..chain import solve_poisson
from ..errors import LaprepError, SchemaError
from ..gdo import GdoConfig, learn_representation
from ..gridworld import build_grid, carve_walls, to_chain
from ..spectral import build_laplacian, spectral_gap, spectrum

log = logging.getLogger(__name__)

# Calibrated on the 15x15 grid: eps falls below 1% of sum(lambda_1..20) after
# ~500 iterations and to ~1e-6 of it by 2000.
DEFAULT_GDO = GdoConfig(k=20, beta=5.0, step_size=0.05, iterations=2000)


@dataclass(frozen=True)
class SweepConfig:
    n: int = 15
    m: int = 15
    walls: tuple = tuple(range(1, 51))
    seeds: tuple = tuple(range(5))
    k_values: tuple = (20,)
    gdo: GdoConfig = DEFAULT_GDO
    output_path: str = "results.csv"
    workers: int = 1
    record_runtime: bool = False

    def __post_init__(self):
        edges = self.n * (self.m - 1) + self.m * (self.n - 1)
        limit = edges - (self.n * self.m - 1)
        for w in self.walls:
            if not 0 <= w <= limit:
                raise SchemaError(f"w={w} outside [0, {limit}] for a {self.n}x{self.m} grid")
        for k in self.k_values:
            if not 1 <= k < self.n * self.m:
                raise SchemaError(f"k={k} outside [1, {self.n * self.m - 1}]")
        if not self.seeds:
            raise SchemaError("seeds must be non-empty")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        d = dict(d)
        gdo = dict(d.pop("gdo", {}))
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise SchemaError(f"unknown config keys: {sorted(unknown)}")
        for key in ("walls", "seeds", "k_values"):
            if key in d:
                d[key] = _int_list(d[key], key)
        base = {k: v for k, v in asdict(DEFAULT_GDO).items()}
        base.update(gdo)
        try:
            return cls(gdo=GdoConfig(**base), **d)
        except TypeError as exc:
            raise SchemaError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "SweepConfig":
        with open(path, "rb") as fh:
            return cls.from_dict(tomllib.load(fh))


def _int_list(value, key: str) -> tuple:
    """Accept ``[1, 2, 3]`` or an inclusive range table ``{from = 1, to = 50}``."""
    if isinstance(value, dict):
        try:
            return tuple(range(int(value["from"]), int(value["to"]) + 1))
        except KeyError as exc:
            raise SchemaError(f"{key}: range table needs 'from' and 'to'") from exc
    if isinstance(value, int):
        return (value,)
    return tuple(int(x) for x in value)


@dataclass(frozen=True)
class SweepRecord:
    n: int
    m: int
    w: int
    seed: int
    k: int
    lambda2: float = math.nan
    lambda_k: float = math.nan
    lambda_k1: float = math.nan
    epsilon: float = math.nan
    err_exact: float = math.nan
    err_gdo: float = math.nan
    trunc_bound: float = math.nan
    est_bound: float | None = math.nan
    total_bound: float | None = math.nan
    runtime_ms: float | None = None
    error: str | None = None

    @property
    def sort_key(self):
        return (self.w, self.seed, self.k)


@dataclass
class CellResult:
    records: list = field(default_factory=list)
    poisson_residual: float = math.nan
    normalization: float = math.nan


def run_cell(config: SweepConfig, w: int, seed: int) -> CellResult:
    """Everything for one (w, seed): env, chain, value, spectrum, GDO per k."""
    out = CellResult()
    try:
        env = carve_walls(build_grid(config.n, config.m), w, seed)
        chain = to_chain(env)
        sol = solve_poisson(chain.P, chain.r)
        out.poisson_residual = sol.poisson_residual(chain.P)
        out.normalization = sol.normalization()
        L = build_laplacian(chain.P, sol.phi)
        bundle = spectrum(L, sol.phi)
        spectral_gap(bundle)
    except LaprepError as exc:
        log.warning("cell w=%d seed=%d failed: %s", w, seed, exc)
        out.records = [
            SweepRecord(config.n, config.m, w, seed, k, error=f"{type(exc).__name__}: {exc}")
            for k in config.k_values
        ]
        return out
    for k in config.k_values:
        start = time.perf_counter()
        try:
            rep = learn_representation(chain.P, L, sol.phi, bundle.lambdas, replace(config.gdo, k=k, seed=seed))
            report = make_report(bundle, rep, sol, k)
        except LaprepError as exc:
            log.warning("cell w=%d seed=%d k=%d failed: %s", w, seed, k, exc)
            out.records.append(SweepRecord(config.n, config.m, w, seed, k, error=f"{type(exc).__name__}: {exc}"))
            continue
        elapsed = (time.perf_counter() - start) * 1e3 if config.record_runtime else None
        out.records.append(
            SweepRecord(
                config.n, config.m, w, seed, k,
                lambda2=report.lambda2,
                lambda_k=report.lambda_k,
                lambda_k1=report.lambda_k1,
                epsilon=report.epsilon,
                err_exact=report.err_exact_basis,
                err_gdo=report.err_learned_basis,
                trunc_bound=report.truncation_bound,
                est_bound=report.estimation_bound,
                total_bound=report.total_bound,
                runtime_ms=elapsed,
            )
        )
    return out


def _run_cell_args(args):
    return run_cell(*args)


def run_cells(config: SweepConfig) -> list[CellResult]:
    jobs = [(config, w, s) for w in config.walls for s in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_run_cell_args, jobs, chunksize=1))
    return [run_cell(*job) for job in jobs]


def run_wall_sweep(config: SweepConfig) -> list[SweepRecord]:
    records = [rec for cell in run_cells(config) for rec in cell.records]
    return sorted(records, key=lambda r: r.sort_key)


def run_k_sweep(config: SweepConfig, k_values=None) -> list[SweepRecord]:
    """Same pipeline with the walls fixed and k ranging (default 1..60)."""
    if k_values is None:
        k_values = config.k_values if len(config.k_values) > 1 else tuple(range(1, 61))
    return run_wall_sweep(replace(config, k_values=tuple(k_values)))
