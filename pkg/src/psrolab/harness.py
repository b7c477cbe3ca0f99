"""Experiment runner: strict JSON configs in, CSV and JSON artifacts out.

A config looks like ``{"schema_version": 1, "seed": 0, "jobs": [...]}`` where
every job has a ``type`` (forge, psro, global-psro, landscape, estimate-pe)
plus its own parameters. Jobs that play on a forged game refer to the forge
job by name, so forge jobs run first. Every artifact carries the schema
version and the job's resolved config; CSVs put both on a leading ``#``
comment line and never contain wall-clock times.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError, PsroLabError
from .forge import forge_theorem4_instance, forge_with_shortcut, forge_worst_case
from .game import Game, Population, game_from_dict, generate_game, rps
from .global_psro import GAMMA_NS, MODES, POOLS, RM_STEPS, run_global_psro
from .landscape import pe_landscape
from .lp import population_exploitability
from .meta import MSS_KINDS, MssSpec
from .psro import RunRecord, derive_seed, run_psro
from .rmbr import estimate_pe

SCHEMA_VERSION = 1
OUT_ENV = "PSROLAB_OUT"
DEFAULT_OUT = "psrolab-out"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GameConfig(_Strict):
    kind: Optional[Literal["gaussian-skew", "disc-elo-noise", "from-file", "rps"]] = None
    n: int = 0
    noise: float = 0.0
    seed: int = 0
    path: Optional[str] = None
    forged: Optional[str] = None  # name of a forge job in the same config

    @model_validator(mode="after")
    def _one_source(self):
        if (self.kind is None) == (self.forged is None):
            raise ValueError("give exactly one of 'kind' or 'forged'")
        if self.kind == "from-file" and not self.path:
            raise ValueError("from-file games need a 'path'")
        return self


class MssConfig(_Strict):
    kind: Literal[MSS_KINDS]  # type: ignore[valid-type]
    params: dict = Field(default_factory=dict)


class ShortcutRef(_Strict):
    shortcut_of: str


class _Job(_Strict):
    name: Optional[str] = None
    label: Optional[str] = None
    seed: Optional[int] = None


class ForgeJob(_Job):
    type: Literal["forge"]
    target: MssConfig
    n: int
    s: int = 1
    init: int = 0
    variant: Literal["worst-case", "shortcut", "pool-instance"] = "shortcut"


class PsroJob(_Job):
    type: Literal["psro"]
    game: GameConfig
    meta_solver: Union[MssConfig, ShortcutRef]
    init: int = 0
    max_iters: int = 100


class GlobalPsroJob(_Job):
    type: Literal["global-psro"]
    game: GameConfig
    base: MssConfig = MssConfig(kind="nash")
    init: int = 0
    k: int = 16
    mode: Literal[MODES] = "exact-pe"  # type: ignore[valid-type]
    max_rounds: int = 50
    evaluator: Optional[Literal["exact", "rmbr"]] = None
    pool: Literal[POOLS] = "dirichlet"  # type: ignore[valid-type]
    gamma_ns: float = GAMMA_NS
    rm_steps: int = RM_STEPS
    samples_per_step: int = 0
    noise: float = 0.0


class LandscapeJob(_Job):
    type: Literal["landscape"]
    game: GameConfig
    population: list[int]
    resolution: int = 50


class EstimatePeJob(_Job):
    type: Literal["estimate-pe"]
    game: GameConfig
    population: list[int]
    rm_steps: int = 1000
    samples_per_step: int = 0
    noise: float = 0.0


Job = Annotated[Union[ForgeJob, PsroJob, GlobalPsroJob, LandscapeJob, EstimatePeJob], Field(discriminator="type")]


class ExperimentConfig(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    seed: int = 0
    jobs: list[Job] = Field(default_factory=list)


def _error_key(err: dict) -> str:
    return ".".join(str(part) for part in err["loc"]) or "<root>"


def parse_config(doc) -> ExperimentConfig:
    """Validate a config document; errors name the offending key."""
    try:
        return ExperimentConfig.model_validate(doc)
    except ValidationError as exc:
        errors = exc.errors()
        # an unknown key is usually the real mistake behind any missing one
        first = next((e for e in errors if e["type"] == "extra_forbidden"), errors[0])
        raise ConfigError(f"invalid config at '{_error_key(first)}': {first['msg']}") from None


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON (line {exc.lineno}, column {exc.colno})") from None
    return parse_config(doc)


def resolve_jobs(config: ExperimentConfig) -> list[dict]:
    """Fill in job names and seeds; check forge references."""
    jobs = []
    names = set()
    for i, job in enumerate(config.jobs):
        doc = job.model_dump(mode="json")
        doc["name"] = doc["name"] or f"{i:03d}-{job.type}"
        if doc["seed"] is None:
            doc["seed"] = derive_seed(config.seed, i)
        if doc["name"] in names:
            raise ConfigError(f"invalid config at 'jobs.{i}.name': duplicate job name {doc['name']!r}")
        if "/" in doc["name"] or doc["name"].startswith("."):
            raise ConfigError(f"invalid config at 'jobs.{i}.name': {doc['name']!r} is not a plain file name")
        names.add(doc["name"])
        jobs.append(doc)
    forges = {j["name"] for j in jobs if j["type"] == "forge"}
    for i, j in enumerate(jobs):
        refs = _refs(j)
        for key, ref in refs:
            if ref not in forges:
                raise ConfigError(f"invalid config at 'jobs.{i}.{key}': no forge job named {ref!r}")
    return jobs


def _refs(job: dict) -> list:
    out = []
    game = job.get("game") or {}
    if game.get("forged"):
        out.append(("game.forged", game["forged"]))
    ms = job.get("meta_solver") or {}
    if "shortcut_of" in ms:
        out.append(("meta_solver.shortcut_of", ms["shortcut_of"]))
    return out


# -- artifact writing ---------------------------------------------------------

def _header(job: dict) -> str:
    snap = json.dumps({"schema_version": SCHEMA_VERSION, "config": job}, sort_keys=True, separators=(",", ":"))
    return f"# {snap}\n"


def _csv_text(job: dict, columns: list, rows) -> str:
    buf = io.StringIO()
    buf.write(_header(job))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _json_text(job: dict, payload: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "config": job, **payload}
    return json.dumps(doc, indent=1, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if obj == float("inf"):
        return None
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def read_csv(path) -> tuple[dict, list]:
    """(embedded header document, list of row dicts) for an artifact CSV."""
    text = Path(path).read_text()
    first, _, rest = text.partition("\n")
    if not first.startswith("# "):
        raise PsroLabError(f"{path} has no schema header line")
    meta = json.loads(first[2:])
    return meta, list(csv.DictReader(io.StringIO(rest)))


def trajectory_rows(record: RunRecord):
    for it in record.iterations:
        yield it.iter_index, it.added, it.pop_size, it.effective_size, float(it.pe)


TRAJECTORY_COLUMNS = ["iter", "added", "pop_size", "effective_size", "pe"]


# -- job execution -------------------------------------------------------------

def _load_forge(out_dir: Path, name: str) -> dict:
    path = out_dir / name / "forge.json"
    if not path.exists():
        raise PsroLabError(f"forge job {name!r} produced no result")
    return json.loads(path.read_text())["result"]


def _game(cfg: dict, out_dir: Path) -> Game:
    if cfg.get("forged"):
        return game_from_dict(_load_forge(out_dir, cfg["forged"])["game"])
    if cfg["kind"] == "rps":
        return rps()
    return generate_game(cfg["kind"], cfg["n"], cfg["noise"], cfg["seed"], cfg.get("path"))


def _meta(cfg: dict, out_dir: Path) -> MssSpec:
    if "shortcut_of" in cfg:
        return MssSpec.from_dict(_load_forge(out_dir, cfg["shortcut_of"])["shortcut"])
    return MssSpec(cfg["kind"], dict(cfg["params"]))


def _run_forge(job, out_dir):
    target = MssSpec(job["target"]["kind"], dict(job["target"]["params"]))
    if job["variant"] == "worst-case":
        if job["s"] != 1:
            raise ConfigError("worst-case forging has a pure equilibrium; use s = 1")
        res = forge_worst_case(target, job["n"], job["init"], job["seed"])
    elif job["variant"] == "shortcut":
        res = forge_with_shortcut(target, job["n"], job["s"], job["init"], job["seed"])
    else:
        res = forge_theorem4_instance(target, job["n"], job["s"], job["seed"], job["init"])
    log_rows = ((e.get("step"), e.get("n"), e.get("case"), e.get("eps"), e.get("e"), e.get("v"), e.get("added"))
                for e in res.construction_log)
    return {
        "forge.json": _json_text(job, {"result": res.to_dict()}),
        "construction_log.csv": _csv_text(job, ["step", "n", "case", "eps", "e", "v", "added"], log_rows),
    }


def _record_files(job, record: RunRecord) -> dict:
    return {
        "record.json": _json_text(job, {"record": record.to_dict()}),
        "trajectory.csv": _csv_text(job, TRAJECTORY_COLUMNS, trajectory_rows(record)),
    }


def _run_psro(job, out_dir):
    game = _game(job["game"], out_dir)
    record = run_psro(game, _meta(job["meta_solver"], out_dir), job["init"], job["max_iters"], job["seed"])
    return _record_files(job, record)


def _run_global(job, out_dir):
    game = _game(job["game"], out_dir)
    record = run_global_psro(
        game, _meta(job["base"], out_dir), job["init"], job["k"], job["mode"], job["max_rounds"], job["seed"],
        evaluator=job["evaluator"], pool=job["pool"], gamma_ns=job["gamma_ns"], rm_steps=job["rm_steps"],
        samples_per_step=job["samples_per_step"], noise=job["noise"],
    )
    files = _record_files(job, record)
    rows = ((r["round"], i, c["response"], c["eval_br"], c["expanded_pe"], c["p_hat"], c["score"],
             int(i == r["selected"])) for r in record.rounds for i, c in enumerate(r["candidates"]))
    files["candidates.csv"] = _csv_text(
        job, ["round", "candidate", "response", "eval_br", "expanded_pe", "p_hat", "score", "selected"], rows)
    return files


def _run_landscape(job, out_dir):
    game = _game(job["game"], out_dir)
    land = pe_landscape(game, Population(tuple(job["population"])), job["resolution"])
    return {"landscape.csv": _csv_text(job, ["p0", "p1", "p2", "pe", "br"], land.rows())}


def _run_estimate(job, out_dir):
    game = _game(job["game"], out_dir)
    pop = Population(tuple(job["population"]))
    est = estimate_pe(game, pop, job["rm_steps"], job["samples_per_step"], job["seed"], noise=job["noise"])
    exact = population_exploitability(game, pop)
    row = (est.pe_est, est.beta, exact.pe, exact.full_br, abs(est.pe_est - exact.pe))
    return {
        "estimate.csv": _csv_text(job, ["pe_est", "beta", "exact_pe", "exact_br", "abs_error"], [row]),
        "estimate.json": _json_text(job, {"rho": est.rho, "exact_mixture": exact.least_exploitable}),
    }


_RUNNERS = {
    "forge": _run_forge,
    "psro": _run_psro,
    "global-psro": _run_global,
    "landscape": _run_landscape,
    "estimate-pe": _run_estimate,
}


def run_job(job: dict, out_dir) -> dict:
    """Execute one resolved job and write its files; returns its manifest entry."""
    out_dir = Path(out_dir)
    entry = {"name": job["name"], "type": job["type"], "label": job.get("label")}
    try:
        files = _RUNNERS[job["type"]](job, out_dir)
    except (PsroLabError, ValueError, ArithmeticError, AssertionError) as exc:
        diag = getattr(exc, "diagnostics", None)
        entry.update(status="failed", error={"type": type(exc).__name__, "message": str(exc),
                                             "diagnostics": diag, "traceback": traceback.format_exc(limit=3)})
        return json.loads(json.dumps(entry, default=_json_default))
    job_dir = out_dir / job["name"]
    job_dir.mkdir(parents=True, exist_ok=True)
    hashes = {}
    for fname, text in sorted(files.items()):
        data = text.encode()
        (job_dir / fname).write_bytes(data)
        hashes[fname] = hashlib.sha256(data).hexdigest()
    entry.update(status="ok", files=hashes)
    return entry


def default_out_dir(config_path) -> Path:
    return Path(os.environ.get(OUT_ENV, DEFAULT_OUT)) / Path(config_path).stem


def run_config(config: ExperimentConfig, out_dir, workers: int = 1) -> dict:
    """Run every job; forge jobs first since other jobs may read their results."""
    jobs = resolve_jobs(config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = {}
    waves = [[j for j in jobs if j["type"] == "forge"], [j for j in jobs if j["type"] != "forge"]]
    for wave in waves:
        if workers > 1 and len(wave) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run_job, wave, [out_dir] * len(wave)))
        else:
            results = [run_job(j, out_dir) for j in wave]
        for j, res in zip(wave, results):
            entries[j["name"]] = res
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": config.model_dump(mode="json"),
        "jobs": [entries[j["name"]] for j in jobs],
        "failures": sum(e["status"] != "ok" for e in entries.values()),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return manifest


# -- comparison -----------------------------------------------------------------

def _method(meta: dict) -> str:
    job = meta["config"]
    if job.get("label"):
        return job["label"]
    if job["type"] == "psro":
        ms = job["meta_solver"]
        return "psro:shortcut" if "shortcut_of" in ms else f"psro:{ms['kind']}"
    return f"global-psro:{job['mode']}"


def collect_trajectories(run_dirs) -> dict:
    """Method label -> list of PE trajectories (one per run) found under the given output dirs."""
    groups: dict = {}
    for d in run_dirs:
        d = Path(d)
        manifest_path = d / "manifest.json"
        if not manifest_path.exists():
            raise PsroLabError(f"{d} is not a run directory (no manifest.json)")
        manifest = json.loads(manifest_path.read_text())
        if manifest.get("schema_version") != SCHEMA_VERSION:
            raise PsroLabError(f"{d}: unsupported schema version {manifest.get('schema_version')!r}")
        for entry in manifest["jobs"]:
            if entry.get("status") != "ok" or "trajectory.csv" not in entry.get("files", {}):
                continue
            meta, rows = read_csv(d / entry["name"] / "trajectory.csv")
            pe = [float(r["pe"]) for r in rows]
            groups.setdefault(_method(meta), []).append(pe)
    if not groups:
        raise PsroLabError("no trajectories found in the given run directories")
    return groups


def compare(run_dirs, bucket: int = 1) -> str:
    """CSV of mean and standard deviation of PE per iteration bucket per method.

    Runs that stopped early keep their last PE for later iterations.
    """
    if bucket < 1:
        raise ConfigError("bucket must be >= 1")
    groups = collect_trajectories(run_dirs)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "iter", "runs", "mean_pe", "std_pe"])
    for method in sorted(groups):
        runs = groups[method]
        horizon = max(len(r) for r in runs)
        table = np.array([r + [r[-1]] * (horizon - len(r)) for r in runs])
        for start in range(0, horizon, bucket):
            vals = table[:, start:start + bucket].mean(axis=1)
            writer.writerow([method, start, len(runs), repr(float(vals.mean())), repr(float(vals.std()))])
    return buf.getvalue()
