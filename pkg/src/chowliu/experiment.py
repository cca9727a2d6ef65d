"""Hard-instance sample-size experiment.

For every sample size ``m`` and instance index, a hard instance is generated;
each of ``runs`` runs draws ``m`` fresh samples, learns with Chow-Liu and
estimates ``d_TV(P, Q)`` by Monte Carlo.  Per instance the second largest run
value is kept (``eps_hat_p``); per ``m`` the maximum over instances is the
aggregate ``eps_hat``.  The fitted constant is the smallest ``c`` with
``eps_hat(m) <= c * sqrt(n ln n / m)`` for every ``m``.

Seeds derive from one master seed through ``SeedSequence(master,
spawn_key=...)``:

    (m, instance)            -> instance seed (first 32-bit word)
    (m, instance, run, 0)    -> sampling stream of the run
    (m, instance, run, 1)    -> Monte-Carlo evaluation stream of the run

so every task is reproducible on its own and worker count has no effect on
the output.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .evaluate import tv_mc
from .instances import HardInstanceConfig, generate_hard_detailed
from .learner import chow_liu

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentRecord",
    "ExperimentResult",
    "STANDARD_GRID",
    "standard_grid",
    "parse_config",
    "instance_seed",
    "run_seeds",
    "run_task",
    "run_experiment",
    "second_largest",
    "fit_constant",
    "write_outputs",
]

log = logging.getLogger(__name__)

RESULTS_HEADER = ("n", "m", "instance", "seed", "run", "tv_estimate")
INSTANCES_HEADER = ("n", "m", "instance", "seed", "p1", "p2", "p3", "eps_hat_p")
AGGREGATE_HEADER = ("m", "eps_hat", "reference")


class ConfigError(ValueError):
    pass


def standard_grid() -> tuple[int, ...]:
    """``floor(1000 * 100**(t/9))`` for ``t = 0..9``."""
    # the small offset keeps exact powers (t = 0, 9) from flooring one below
    return tuple(int(math.floor(1000 * 100 ** (t / 9) + 1e-7)) for t in range(10))


STANDARD_GRID = standard_grid()


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 100
    m_values: tuple = STANDARD_GRID
    instances: int = 25
    runs: int = 7
    mc_samples: int = 40000
    master_seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if not self.m_values or any(m < 1 for m in self.m_values):
            raise ConfigError("m_values must be a nonempty list of positive integers")
        if len(set(self.m_values)) != len(self.m_values):
            raise ConfigError("m_values must be distinct")
        for name in ("instances", "runs", "mc_samples", "jobs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be nonnegative")


_INT_KEYS = ("n", "instances", "runs", "mc_samples", "master_seed", "jobs")


def parse_config(text: str) -> ExperimentConfig:
    """Read a flat ``key = value`` file.

    Keys: ``n``, ``m_values`` (comma separated) or ``m_grid = standard``,
    ``instances``, ``runs``, ``mc_samples``, ``master_seed``, ``jobs``.
    ``#`` starts a comment.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in values or (key in ("m_values", "m_grid") and "m_values" in values):
            raise ConfigError(f"line {lineno}: {key} given twice")
        try:
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key == "m_values":
                values["m_values"] = tuple(int(v) for v in val.replace(",", " ").split())
            elif key == "m_grid":
                if val != "standard":
                    raise ConfigError(f"line {lineno}: m_grid supports only 'standard'")
                values["m_values"] = STANDARD_GRID
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from None
    return ExperimentConfig(**values)


def instance_seed(master: int, m: int, instance: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=(m, instance))
    return int(ss.generate_state(1)[0])


def run_seeds(master: int, m: int, instance: int, run: int) -> tuple:
    """(sampling seed, Monte-Carlo seed) as ``SeedSequence`` objects."""
    return (
        np.random.SeedSequence(master, spawn_key=(m, instance, run, 0)),
        np.random.SeedSequence(master, spawn_key=(m, instance, run, 1)),
    )


def run_task(args: tuple) -> float:
    """One run: sample, learn, estimate TV.  ``args = (n, m, instance, run, mc, master)``."""
    n, m, instance, run, mc, master = args
    inst = generate_hard_detailed(HardInstanceConfig(n, m, instance_seed(master, m, instance)))
    s_seed, mc_seed = run_seeds(master, m, instance, run)
    x = inst.model.sample(s_seed, m)
    q = chow_liu(x).to_tree_model()
    return tv_mc(inst.model, q, mc, mc_seed).value


def second_largest(values) -> float:
    """Second largest value (the only value when there is one)."""
    v = sorted(values)
    return float(v[-2] if len(v) >= 2 else v[-1])


def fit_constant(n: int, eps_hat: dict) -> float:
    """Smallest ``c`` with ``eps_hat[m] <= c sqrt(n ln n / m)`` for all ``m``."""
    scale = n * math.log(n)
    return max(e * math.sqrt(m / scale) for m, e in eps_hat.items())


@dataclass(frozen=True)
class ExperimentRecord:
    n: int
    m: int
    instance: int
    instance_seed: int
    p1: float
    p2: float
    p3: float
    run_tv: tuple
    eps_hat_p: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list = field(default_factory=list)
    eps_hat: dict = field(default_factory=dict)
    c: float = math.nan

    def reference(self, m: int) -> float:
        return self.c * math.sqrt(self.config.n * math.log(self.config.n) / m)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    cfg = config
    tasks = [
        (cfg.n, m, inst, run, cfg.mc_samples, cfg.master_seed)
        for m in cfg.m_values
        for inst in range(cfg.instances)
        for run in range(cfg.runs)
    ]
    log.info("experiment: %d tasks on %d worker(s)", len(tasks), cfg.jobs)
    if cfg.jobs > 1:
        workers = min(cfg.jobs, os.cpu_count() or 1, len(tasks))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = []
            for k, v in enumerate(pool.map(run_task, tasks, chunksize=1)):
                values.append(v)
                _progress(k, len(tasks))
    else:
        values = []
        for k, t in enumerate(tasks):
            values.append(run_task(t))
            _progress(k, len(tasks))

    result = ExperimentResult(cfg)
    it = iter(values)
    for m in cfg.m_values:
        best = -math.inf
        for inst in range(cfg.instances):
            runs = tuple(next(it) for _ in range(cfg.runs))
            seed = instance_seed(cfg.master_seed, m, inst)
            hi = generate_hard_detailed(HardInstanceConfig(cfg.n, m, seed))
            p1, p2, p3 = hi.proportions
            rec = ExperimentRecord(cfg.n, m, inst, seed, p1, p2, p3, runs, second_largest(runs))
            result.records.append(rec)
            best = max(best, rec.eps_hat_p)
        result.eps_hat[m] = best
        log.info("m=%d eps_hat=%.6f", m, best)
    result.c = fit_constant(cfg.n, result.eps_hat)
    return result


def _progress(k: int, total: int):
    if (k + 1) % max(1, total // 20) == 0 or k + 1 == total:
        log.info("progress %d/%d", k + 1, total)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def results_csv(result: ExperimentResult) -> str:
    rows = [
        (r.n, r.m, r.instance, r.instance_seed, run, repr(v))
        for r in result.records
        for run, v in enumerate(r.run_tv)
    ]
    return _csv(rows, RESULTS_HEADER)


def instances_csv(result: ExperimentResult) -> str:
    rows = [
        (r.n, r.m, r.instance, r.instance_seed, repr(r.p1), repr(r.p2), repr(r.p3), repr(r.eps_hat_p))
        for r in result.records
    ]
    return _csv(rows, INSTANCES_HEADER)


def aggregate_csv(result: ExperimentResult) -> str:
    rows = [(m, repr(e), repr(result.reference(m))) for m, e in result.eps_hat.items()]
    return _csv(rows, AGGREGATE_HEADER)


def write_outputs(result: ExperimentResult, out_dir: str, figure: bool = True) -> dict:
    """Write results.csv, instances.csv, aggregate.csv, fit.txt and figure.png."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "results": os.path.join(out_dir, "results.csv"),
        "instances": os.path.join(out_dir, "instances.csv"),
        "aggregate": os.path.join(out_dir, "aggregate.csv"),
        "fit": os.path.join(out_dir, "fit.txt"),
    }
    texts = {
        "results": results_csv(result),
        "instances": instances_csv(result),
        "aggregate": aggregate_csv(result),
        "fit": f"schema=v1\nn={result.config.n}\nc={result.c!r}\n",
    }
    for key, text in texts.items():
        with open(paths[key], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if figure:
        from .plotting import plot_experiment

        paths["figure"] = os.path.join(out_dir, "figure.png")
        plot_experiment(result, paths["figure"])
    return paths
