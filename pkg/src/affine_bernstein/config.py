"""Run configuration: strict JSON loading, overrides and manifests."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .model import ModelParams, derive
from .sde import SimConfig

OUTPUT_ENV = "AFFINE_BERNSTEIN_OUT"
MANIFEST_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Options:
    """Command-specific settings; the defaults are the documented thresholds."""
    process: str = "x"
    t: float = 1.0
    q_min: float | None = None
    q_max: float | None = None
    n_q: int = 801
    delta: float | None = None
    ks_threshold: float = 0.02
    chi2_p_threshold: float = 0.01
    chi2_bins: int = 50
    pde_tolerance: float = 1e-5
    fd_step: float = 1e-4
    checkpoints: tuple = (0.5, 1.0, 2.0)
    check_n_paths: int = 100_000
    hitting_n_paths: int = 10_000
    euler_dt: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "checkpoints", tuple(float(c) for c in self.checkpoints))
        if self.process not in ("x", "z", "ou", "s"):
            raise ConfigError(f"options.process must be one of x, z, ou, s; got {self.process!r}")
        if self.n_q < 2:
            raise ConfigError("options.n_q must be >= 2")
        for name in ("ks_threshold", "chi2_p_threshold", "pde_tolerance", "fd_step", "euler_dt", "t"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"options.{name} must be positive")
        for name in ("check_n_paths", "hitting_n_paths", "chi2_bins"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"options.{name} must be a positive integer")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["checkpoints"] = list(self.checkpoints)
        return d


DEFAULT_MODEL = ModelParams(alpha=2.0, beta=0.0, phi=1.5, lam=1.0, r0=0.0)
DEFAULT_SIM = SimConfig(n_paths=1000, t_max=1.0, dt=0.01, seed=0)


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = DEFAULT_MODEL
    sim: SimConfig = DEFAULT_SIM
    options: Options = Options()
    output_dir: str = "out"

    def to_dict(self) -> dict:
        return {"model": self.model.to_dict(), "sim": self.sim.to_dict(),
                "options": self.options.to_dict(), "output_dir": self.output_dir}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        _reject_unknown(d, {"model", "sim", "options", "output_dir"}, "config")
        base = cls()
        model = base.model
        if "model" in d:
            _reject_unknown(d["model"], {"alpha", "beta", "phi", "lambda", "r0"}, "model")
            model = ModelParams.from_dict({**base.model.to_dict(), **d["model"]})
        sim = base.sim
        if "sim" in d:
            _reject_unknown(d["sim"], {f.name for f in fields(SimConfig)}, "sim")
            try:
                sim = SimConfig.from_dict({**base.sim.to_dict(), **d["sim"]})
            except (TypeError, ValueError) as e:
                raise ConfigError(f"sim: {e}") from e
        opts = base.options
        if "options" in d:
            _reject_unknown(d["options"], {f.name for f in fields(Options)}, "options")
            opts = Options(**{**base.options.to_dict(), **d["options"]})
        cfg = cls(model, sim, opts, str(d.get("output_dir", default_output_dir())))
        cfg.validate()
        return cfg

    def validate(self):
        derive(self.model)

    def with_overrides(self, model: dict | None = None, sim: dict | None = None,
                       options: dict | None = None, output_dir: str | None = None) -> "RunConfig":
        m = {k: v for k, v in (model or {}).items() if v is not None}
        s = {k: v for k, v in (sim or {}).items() if v is not None}
        o = {k: v for k, v in (options or {}).items() if v is not None}
        new = replace(
            self,
            model=ModelParams.from_dict({**self.model.to_dict(), **m}) if m else self.model,
            sim=SimConfig.from_dict({**self.sim.to_dict(), **s}) if s else self.sim,
            options=Options(**{**self.options.to_dict(), **o}) if o else self.options,
            output_dir=output_dir if output_dir is not None else self.output_dir,
        )
        new.validate()
        return new


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, "out")


def _reject_unknown(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a JSON object")
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"unknown field(s) in {where}: {', '.join(extra)}")


def load_config(path) -> tuple[RunConfig, dict | None]:
    """Load a run config, or a manifest (returns its config plus the manifest)."""
    with open(path) as fh:
        raw = json.load(fh)
    if isinstance(raw, dict) and "manifest_version" in raw:
        return RunConfig.from_dict(raw["config"]), raw
    return RunConfig.from_dict(raw), None


def dump_json(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")
