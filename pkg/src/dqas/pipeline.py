"""Two-stage training-free search pipeline with persisted, resumable stages.

Stage 1 generates a pool of circuits (per-circuit gate mix and nonlocal
probability drawn from the standard choices). Stage 2 keeps the top slice by
exact DAG path count, stage 3 the top slice of those by expressibility, and
stage 4 trains candidates in expressibility order until the query budget (or
an optional solution quota) is reached.

Every per-circuit computation is keyed by a sub-seed derived from
(master_seed, stream, index), so stages can be recomputed, parallelized or
resumed without changing a byte of output. Records live in one TSV per stage
under the output directory, plus a manifest.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .circuits import Circuit
from .dag import build_dag, count_paths
from .device import DeviceGraph, default_device, device_hash, device_to_text, load_device
from .expressibility import DEFAULT_BINS, DEFAULT_SAMPLES, estimate_expressibility
from .generation import (
    GATE_MIX_CHOICES,
    METHODS,
    P_NONLOCAL_CHOICES,
    generate,
)
from .hamiltonians import (
    PauliHamiltonian,
    build_heisenberg,
    build_tfim,
    exact_ground_energy,
    load_hamiltonian,
)
from .vcg import derive_position_sets
from .vqe import TrainConfig, train_query

STREAM_GENERATE = 1
STREAM_EXPRESS = 2
STREAM_TRAIN = 3

MANIFEST = "manifest.json"
DEVICE_FILE = "device.json"
GENERATION_TSV = "generation.tsv"
PATHS_TSV = "paths.tsv"
PATHS_SELECTED_TSV = "paths_selected.tsv"
EXPRESS_TSV = "expressibility.tsv"
EXPRESS_SELECTED_TSV = "expressibility_selected.tsv"
QUERIES_TSV = "queries.tsv"
TIMING_LOG = "timing.log"

DEFAULT_QUERY_CAP = 200


class ConfigError(ValueError):
    """Invalid pipeline configuration (CLI exit code 1)."""


class PipelineError(RuntimeError):
    """Runtime failure inside a pipeline stage (CLI exit code 2)."""


@dataclass(frozen=True)
class PipelineConfig:
    """Everything needed to reproduce a search run."""

    task: dict
    n_logical: int = 6
    n_gates: int = 60
    method: str = "telegate"
    n_pool: int = 5000
    n_path_keep: int = 500
    n_candidates: int = 50
    master_seed: int = 0
    express_samples: int = DEFAULT_SAMPLES
    express_bins: int = DEFAULT_BINS
    train: TrainConfig = field(default_factory=TrainConfig)
    query_budget: int | None = None
    max_solutions: int | None = None
    workers: int = 1
    output_dir: str = "run"
    device_text: str | None = None

    def __post_init__(self) -> None:
        if not (self.n_pool >= self.n_path_keep >= self.n_candidates >= 1):
            raise ConfigError(
                f"stage sizes must satisfy pool >= path_keep >= candidates >= 1, got "
                f"{self.n_pool}/{self.n_path_keep}/{self.n_candidates}"
            )
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.n_gates < 1 or self.n_logical < 1 or self.workers < 1:
            raise ConfigError("n_gates, n_logical and workers must be positive")

    @property
    def effective_budget(self) -> int:
        cap = self.query_budget if self.query_budget is not None else DEFAULT_QUERY_CAP
        return min(self.n_candidates, cap)

    def to_dict(self) -> dict:
        d = {
            "task": self.task,
            "n_logical": self.n_logical,
            "n_gates": self.n_gates,
            "method": self.method,
            "n_pool": self.n_pool,
            "n_path_keep": self.n_path_keep,
            "n_candidates": self.n_candidates,
            "master_seed": self.master_seed,
            "express_samples": self.express_samples,
            "express_bins": self.express_bins,
            "train": {
                "learning_rate": self.train.learning_rate,
                "max_iters": self.train.max_iters,
                "n_restarts": self.train.n_restarts,
                "accuracy_threshold": self.train.accuracy_threshold,
                "convergence_window": self.train.convergence_window,
                "convergence_tol": self.train.convergence_tol,
            },
            "query_budget": self.query_budget,
            "max_solutions": self.max_solutions,
            "workers": self.workers,
            "output_dir": self.output_dir,
        }
        if self.device_text is not None:
            d["device_text"] = self.device_text
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {
            "task", "n_logical", "n_gates", "method", "n_pool", "n_path_keep",
            "n_candidates", "master_seed", "express_samples", "express_bins",
            "train", "query_budget", "max_solutions", "workers", "output_dir",
            "device_text",
        }
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "task" not in d:
            raise ConfigError("config must declare a task")
        kwargs = dict(d)
        kwargs["method"] = str(kwargs.get("method", "telegate")).lower()
        train_d = kwargs.pop("train", {})
        try:
            kwargs["train"] = TrainConfig(**train_d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad train settings: {exc}") from exc
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad config: {exc}") from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def resolve_device(cfg: PipelineConfig) -> DeviceGraph:
    if cfg.device_text is None:
        return default_device()
    return load_device(cfg.device_text)


def build_task(task: dict) -> PauliHamiltonian:
    kind = str(task.get("kind", "")).lower()
    if kind == "tfim":
        return build_tfim(int(task.get("n", 6)), bool(task.get("periodic", True)))
    if kind == "heisenberg":
        return build_heisenberg(int(task.get("n", 6)), bool(task.get("periodic", True)))
    if kind == "file":
        path = task.get("path")
        if not path:
            raise ConfigError("file task needs a 'path'")
        try:
            return load_hamiltonian(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read Hamiltonian file {path}: {exc}") from exc
    raise ConfigError(f"unknown task kind {task.get('kind')!r}")


def sub_seed(master_seed: int, stream: int, index: int) -> int:
    """Stable per-item seed; independent streams for each pipeline stage."""
    ss = np.random.SeedSequence([int(master_seed), int(stream), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def generate_indexed(device: DeviceGraph, cfg: PipelineConfig, seed: int, sets=None) -> Circuit:
    """Regenerate the circuit identified by a stage-1 sub-seed."""
    rng = np.random.default_rng(seed)
    mix = GATE_MIX_CHOICES[int(rng.integers(len(GATE_MIX_CHOICES)))]
    p_nl = P_NONLOCAL_CHOICES[int(rng.integers(len(P_NONLOCAL_CHOICES)))]
    return generate(
        device,
        cfg.n_gates,
        mix,
        p_nl,
        cfg.method,
        cfg.n_logical,
        rng,
        sets=sets,
        seed=seed,
    )


# -- TSV plumbing -------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_tsv(path: Path, header: list[str], rows: list[list]) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")
    os.replace(tmp, path)


def read_tsv(path: Path) -> tuple[list[str], list[list[str]]]:
    lines = path.read_text().splitlines()
    if not lines:
        raise PipelineError(f"{path} is empty")
    header = lines[0].split("\t")
    return header, [line.split("\t") for line in lines[1:] if line]


# -- worker payloads ----------------------------------------------------------


class _StageWorker:
    """Picklable per-record computation shared by serial and process pools."""

    def __init__(self, cfg: PipelineConfig, device_text: str, kind: str):
        self.cfg = cfg
        self.device_text = device_text
        self.kind = kind
        self._device = None
        self._sets = None

    def _materialize(self):
        if self._device is None:
            self._device = load_device(self.device_text)
            self._sets = derive_position_sets(self._device)
        return self._device, self._sets

    def __call__(self, item):
        device, sets = self._materialize()
        cfg = self.cfg
        if self.kind == "generate":
            idx = item
            seed = sub_seed(cfg.master_seed, STREAM_GENERATE, idx)
            circuit = generate_indexed(device, cfg, seed, sets=sets)
            mix = circuit.meta.gate_mix
            return [idx, seed, mix[0], mix[1], mix[2], circuit.meta.p_nonlocal,
                    circuit.n_params, circuit.ebits]
        if self.kind == "paths":
            idx, seed = item
            circuit = generate_indexed(device, cfg, seed, sets=sets)
            wire_map = {q: i for i, q in enumerate(device.data_qubits)}
            dag = build_dag(circuit, len(device.data_qubits), wire_map)
            return [idx, count_paths(dag)]
        if self.kind == "express":
            idx, seed = item
            circuit = generate_indexed(device, cfg, seed, sets=sets)
            eseed = sub_seed(cfg.master_seed, STREAM_EXPRESS, idx)
            est = estimate_expressibility(
                circuit, cfg.express_samples, cfg.express_bins, np.random.default_rng(eseed)
            )
            return [idx, est.value, est.n_samples, est.n_bins, eseed]
        raise PipelineError(f"unknown worker kind {self.kind}")


def _map_records(worker: _StageWorker, items: list, workers: int) -> list[list]:
    if workers <= 1 or len(items) <= 1:
        return [worker(item) for item in items]
    chunk = max(1, len(items) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, items, chunksize=chunk))


# -- stages -------------------------------------------------------------------


def _out(cfg: PipelineConfig) -> Path:
    return Path(cfg.output_dir)


def _load_manifest(cfg: PipelineConfig) -> dict:
    path = _out(cfg) / MANIFEST
    if path.exists():
        return json.loads(path.read_text())
    return {"stages": {}}


def _save_manifest(cfg: PipelineConfig, manifest: dict) -> None:
    path = _out(cfg) / MANIFEST
    manifest["config"] = cfg.to_dict()
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


def _init_run(cfg: PipelineConfig) -> tuple[DeviceGraph, dict]:
    out = _out(cfg)
    out.mkdir(parents=True, exist_ok=True)
    device = resolve_device(cfg)
    (out / DEVICE_FILE).write_text(device_to_text(device))
    manifest = _load_manifest(cfg)
    recorded = manifest.get("device_hash")
    if recorded is not None and recorded != device_hash(device):
        raise PipelineError(
            f"output dir {out} was produced with a different device (hash mismatch)"
        )
    manifest["device_hash"] = device_hash(device)
    return device, manifest


def stage_generate(cfg: PipelineConfig) -> None:
    """Stage 1: build the circuit pool and record its generation scoreboard."""
    device, manifest = _init_run(cfg)
    if manifest["stages"].get("generation"):
        return
    worker = _StageWorker(cfg, device_to_text(device), "generate")
    rows = _map_records(worker, list(range(cfg.n_pool)), cfg.workers)
    write_tsv(
        _out(cfg) / GENERATION_TSV,
        ["idx", "seed", "mix_u", "mix_cnot", "mix_swap", "p_nonlocal", "n_params", "ebits"],
        rows,
    )
    manifest["stages"]["generation"] = {"count": len(rows)}
    _save_manifest(cfg, manifest)


def _generation_records(cfg: PipelineConfig) -> list[tuple[int, int]]:
    path = _out(cfg) / GENERATION_TSV
    if not path.exists():
        raise PipelineError(f"missing {path}; run the generate stage first")
    _, rows = read_tsv(path)
    return [(int(r[0]), int(r[1])) for r in rows]


def stage_paths(cfg: PipelineConfig) -> None:
    """Stage 2: score every pooled circuit by path count, keep the top slice."""
    device, manifest = _init_run(cfg)
    if manifest["stages"].get("paths"):
        return
    records = _generation_records(cfg)
    worker = _StageWorker(cfg, device_to_text(device), "paths")
    rows = _map_records(worker, records, cfg.workers)
    write_tsv(_out(cfg) / PATHS_TSV, ["idx", "paths"], rows)
    ranked = sorted(rows, key=lambda r: (-r[1], r[0]))[: cfg.n_path_keep]
    write_tsv(
        _out(cfg) / PATHS_SELECTED_TSV,
        ["rank", "idx", "paths"],
        [[rank, idx, paths] for rank, (idx, paths) in enumerate(ranked)],
    )
    manifest["stages"]["paths"] = {"selected": len(ranked)}
    _save_manifest(cfg, manifest)


def stage_express(cfg: PipelineConfig) -> None:
    """Stage 3: score the path-selected circuits by expressibility, keep the best."""
    device, manifest = _init_run(cfg)
    if manifest["stages"].get("express"):
        return
    sel_path = _out(cfg) / PATHS_SELECTED_TSV
    if not sel_path.exists():
        raise PipelineError(f"missing {sel_path}; run the score-paths stage first")
    _, selected = read_tsv(sel_path)
    seeds = dict(_generation_records(cfg))
    items = [(int(r[1]), seeds[int(r[1])]) for r in selected]
    worker = _StageWorker(cfg, device_to_text(device), "express")
    rows = _map_records(worker, items, cfg.workers)
    rows_by_idx = sorted(rows, key=lambda r: r[0])
    write_tsv(
        _out(cfg) / EXPRESS_TSV,
        ["idx", "expressibility", "n_samples", "n_bins", "seed"],
        rows_by_idx,
    )
    ranked = sorted(rows, key=lambda r: (r[1], r[0]))[: cfg.n_candidates]
    write_tsv(
        _out(cfg) / EXPRESS_SELECTED_TSV,
        ["rank", "idx", "expressibility"],
        [[rank, r[0], r[1]] for rank, r in enumerate(ranked)],
    )
    manifest["stages"]["express"] = {"selected": len(ranked)}
    _save_manifest(cfg, manifest)


def stage_train(cfg: PipelineConfig) -> None:
    """Stage 4: query candidates from best to worst expressibility.

    Appends one record per finished query so an interrupted run resumes at the
    next query. Training wall time goes to a side log; the scoreboard itself
    stays deterministic.
    """
    device, manifest = _init_run(cfg)
    if manifest["stages"].get("train"):
        return
    sel_path = _out(cfg) / EXPRESS_SELECTED_TSV
    if not sel_path.exists():
        raise PipelineError(f"missing {sel_path}; run the score-expressibility stage first")
    _, selected = read_tsv(sel_path)
    seeds = dict(_generation_records(cfg))
    hamiltonian = build_task(cfg.task)
    if hamiltonian.n != cfg.n_logical:
        raise ConfigError(
            f"task acts on {hamiltonian.n} qubits but n_logical={cfg.n_logical}"
        )
    target = exact_ground_energy(hamiltonian)
    manifest["ground_energy"] = target
    train_cfg = replace(cfg.train, target_energy=target)

    budget = cfg.effective_budget
    queue = [int(r[1]) for r in selected][:budget]
    out_path = _out(cfg) / QUERIES_TSV
    header = ["query", "idx", "ebits", "best_energy", "solved", "iterations", "restart_energies"]
    done = 0
    solved_so_far = 0
    if out_path.exists():
        _, existing = read_tsv(out_path)
        done = len(existing)
        solved_so_far = sum(1 for r in existing if r[4] == "1")
    else:
        with open(out_path, "w") as fh:
            fh.write("\t".join(header) + "\n")

    ebits_of = _ebits_map(cfg)
    sets = derive_position_sets(device)
    with open(out_path, "a") as fh, open(_out(cfg) / TIMING_LOG, "a") as tlog:
        for q in range(done, len(queue)):
            if cfg.max_solutions is not None and solved_so_far >= cfg.max_solutions:
                break
            idx = queue[q]
            circuit = generate_indexed(device, cfg, seeds[idx], sets=sets)
            tseed = sub_seed(cfg.master_seed, STREAM_TRAIN, idx)
            t0 = time.monotonic()
            result = train_query(circuit, hamiltonian, train_cfg, np.random.default_rng(tseed))
            elapsed = time.monotonic() - t0
            row = [
                q,
                idx,
                ebits_of[idx],
                result.best_energy,
                1 if result.solved else 0,
                ",".join(str(i) for i in result.iterations_used),
                ",".join(repr(e) for e in result.restart_energies),
            ]
            fh.write("\t".join(_fmt(v) for v in row) + "\n")
            fh.flush()
            tlog.write(f"query={q} idx={idx} seconds={elapsed:.3f}\n")
            tlog.flush()
            if result.solved:
                solved_so_far += 1
    manifest["stages"]["train"] = {"queried": len(queue)}
    _save_manifest(cfg, manifest)


def _ebits_map(cfg: PipelineConfig) -> dict[int, int]:
    _, rows = read_tsv(_out(cfg) / GENERATION_TSV)
    return {int(r[0]): int(r[7]) for r in rows}


@dataclass(frozen=True)
class PipelineReport:
    """Aggregates read back from a finished (or partial) run."""

    ground_energy: float | None
    best_energy: float | None
    gap: float | None
    n_solutions: int
    min_ebits_solving: int | None
    query_trace: tuple[tuple[int, float], ...]
    ebits_mean_pool: float | None
    ebits_mean_candidates: float | None
    stages_done: tuple[str, ...]


def collect_report(cfg: PipelineConfig) -> PipelineReport:
    """Summarize whatever stages have completed in the output directory."""
    out = _out(cfg)
    manifest_path = out / MANIFEST
    if not manifest_path.exists():
        raise PipelineError(f"no pipeline state under {out}")
    manifest = json.loads(manifest_path.read_text())
    stages = tuple(sorted(manifest.get("stages", {})))
    ground = manifest.get("ground_energy")

    ebits_pool = ebits_cand = None
    if (out / GENERATION_TSV).exists():
        _, rows = read_tsv(out / GENERATION_TSV)
        by_idx = {int(r[0]): int(r[7]) for r in rows}
        if by_idx:
            ebits_pool = float(np.mean(list(by_idx.values())))
        if (out / EXPRESS_SELECTED_TSV).exists():
            _, sel = read_tsv(out / EXPRESS_SELECTED_TSV)
            vals = [by_idx[int(r[1])] for r in sel]
            if vals:
                ebits_cand = float(np.mean(vals))

    trace: list[tuple[int, float]] = []
    best = None
    n_sol = 0
    min_ebits = None
    if (out / QUERIES_TSV).exists():
        _, rows = read_tsv(out / QUERIES_TSV)
        for r in rows:
            q, energy, solved, ebits = int(r[0]), float(r[3]), r[4] == "1", int(r[2])
            best = energy if best is None else min(best, energy)
            trace.append((q, best))
            if solved:
                n_sol += 1
                min_ebits = ebits if min_ebits is None else min(min_ebits, ebits)
    gap = None
    if best is not None and ground is not None:
        gap = best - ground
    return PipelineReport(
        ground_energy=ground,
        best_energy=best,
        gap=gap,
        n_solutions=n_sol,
        min_ebits_solving=min_ebits,
        query_trace=tuple(trace),
        ebits_mean_pool=ebits_pool,
        ebits_mean_candidates=ebits_cand,
        stages_done=stages,
    )


def run_pipeline(cfg: PipelineConfig) -> PipelineReport:
    """Run all four stages (skipping completed ones) and summarize."""
    stage_generate(cfg)
    stage_paths(cfg)
    stage_express(cfg)
    stage_train(cfg)
    return collect_report(cfg)
