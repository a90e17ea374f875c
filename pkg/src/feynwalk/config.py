"""Run configuration and run artifacts."""

from __future__ import annotations

import json
import os
import subprocess
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

OUTPUT_ENV = "FEYNWALK_OUTPUT_DIR"

DEFAULT_TOLERANCES = {
    "table1_seconds": 1.0,
    "four_method_ell": 40,
    "sum_ell": 100,
    "oracle_instances": 100,
    "oracle_k_max": 9,
    "oracle_float": 1e-12,
    "c2_component": 1e-5,
    "c2_conjecture": 5e-3,
    "c2_seconds": 5.0,
    "h_inh_component": 1e-5,
    "residual_constant": 5.0,
    "tail_n_max": 256,
    "markov_n_min": 16,
    "markov_n_max": 256,
    "markov_c6": 5.0,
    "odd_step": 0.01,
    "bridge_samples": 100_000,
    "ks": 0.01,
    "sigma": 3.0,
    "refine_levels": 8,
    "refine_replicas": 64,
    "slope_m_max": 12,
    "slope_replicas": 16,
    "rate_slope": -0.4,
    "variance_level": 6,
    "variance_replicas": 10_000,
    "schrodinger_m9": 1e-3,
    "kernel_mass": 1e-10,
    "kernel_norm": 1e-8,
    "chapman_kolmogorov": 1e-8,
}

DEFAULT_THRESHOLDS = {"n0": 8, "k1": 32, "j1": 2}


@dataclass
class RunConfig:
    seed: int = 20240611
    exact_cap: int = 512
    output_dir: str = "feynwalk-out"
    tolerances: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    threads: int = 1

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        self.thresholds = {**DEFAULT_THRESHOLDS, **self.thresholds}

    def tol(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tolerances"] = {**DEFAULT_TOLERANCES, **self.tolerances}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - {"seed", "exact_cap", "output_dir", "tolerances", "thresholds", "threads"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def resolved_output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_ENV) or self.output_dir)


def version_string() -> str:
    """``git describe`` of the source tree, or the installed package version."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    from importlib.metadata import PackageNotFoundError, version
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


@dataclass
class RunArtifact:
    command: list
    config: dict
    version: str
    payloads: list = field(default_factory=list)
    duration: float = 0.0
    exit_code: int = 0
    summary: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


class ArtifactWriter:
    """Collects payload files for one command and writes ``run.json`` last."""

    def __init__(self, config: RunConfig, command: list, subdir: str):
        self.config = config
        self.command = command
        self.dir = config.resolved_output_dir() / subdir
        self.dir.mkdir(parents=True, exist_ok=True)
        self.payloads: list[str] = []
        self.t0 = time.perf_counter()

    def write_text(self, name: str, text: str) -> Path:
        path = self.dir / name
        path.write_text(text)
        self.payloads.append(str(path))
        return path

    def write_json(self, name: str, obj) -> Path:
        return self.write_text(name, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")

    def finish(self, exit_code: int = 0, summary: dict | None = None) -> RunArtifact:
        snapshot = self.config.to_dict()
        snapshot["output_dir"] = str(self.config.resolved_output_dir())
        art = RunArtifact(list(self.command), snapshot, version_string(),
                          list(self.payloads), time.perf_counter() - self.t0, exit_code, summary or {})
        (self.dir / "run.json").write_text(art.to_json() + "\n")
        return art


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if hasattr(x, "tolist"):
        return x.tolist()
    if hasattr(x, "item"):
        return x.item()
    raise TypeError(f"cannot serialise {type(x).__name__}")


__all__ = ["ArtifactWriter", "DEFAULT_THRESHOLDS", "DEFAULT_TOLERANCES", "OUTPUT_ENV",
           "RunArtifact", "RunConfig", "version_string"]
