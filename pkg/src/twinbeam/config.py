"""Run configuration: JSON in, validated dataclasses out."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigError
from .schmidt import PumpConfig

__all__ = ["RunConfig", "SchmidtConfig", "SweepConfig", "GridConfig",
           "OutputConfig", "load_config", "config_hash"]


@dataclass(frozen=True)
class SchmidtConfig:
    # mu values are calibration knobs: chosen so the low-power mode count
    # lands at O(100) and the spectral weights stay broad enough to form
    # the narrow two-scale interference features at threshold-scale powers
    mu_spectral: float = 0.95
    mu_transverse: float = 0.8
    n_q: int = 10
    n_m: int = 11
    n_l: int = 5


@dataclass(frozen=True)
class SweepConfig:
    min: float = 1e-8
    max: float = 0.5
    n_points: int = 40
    scale: str = "log"


@dataclass(frozen=True)
class GridConfig:
    n_omega: int = 321
    half_span_sigmas: float | None = None
    n_time: int = 4096


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    figures: tuple = ()
    interference: bool = True   # include SFG/HOM feature columns in sweeps


@dataclass(frozen=True)
class RunConfig:
    pump: PumpConfig = field(default_factory=PumpConfig)
    schmidt: SchmidtConfig = field(default_factory=SchmidtConfig)
    gamma_list: tuple = (0.0, 0.5, 1.0)
    power_sweep: SweepConfig = field(default_factory=SweepConfig)
    grids: GridConfig = field(default_factory=GridConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gamma_list"] = list(self.gamma_list)
        d["outputs"]["figures"] = list(self.outputs.figures)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _build_section(cls, data, prefix, problems):
    """Instantiate a config dataclass from a dict, collecting all problems."""
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    for key in sorted(unknown):
        problems.append(f"{prefix}.{key}: unknown key")
    kwargs = {k: v for k, v in data.items() if k in known}
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        problems.extend(exc.problems)
    except (TypeError, ValueError) as exc:
        problems.append(f"{prefix}: {exc}")
    return None


def _validate(cfg: RunConfig, problems: list):
    for i, g in enumerate(cfg.gamma_list):
        if not isinstance(g, (int, float)) or not 0.0 <= g <= 1.0:
            problems.append(f"gamma_list[{i}]: must lie in [0, 1], got {g}")
    sw = cfg.power_sweep
    if sw.min <= 0:
        problems.append(f"power_sweep.min: must be > 0, got {sw.min}")
    if sw.max < sw.min:
        problems.append(f"power_sweep.max: must be >= min, got {sw.max}")
    if sw.n_points < 1:
        problems.append(f"power_sweep.n_points: must be >= 1, got {sw.n_points}")
    if sw.scale not in ("log", "linear"):
        problems.append(f"power_sweep.scale: must be 'log' or 'linear', got {sw.scale!r}")
    sc = cfg.schmidt
    for name in ("mu_spectral", "mu_transverse"):
        v = getattr(sc, name)
        if not 0.0 <= v < 1.0:
            problems.append(f"schmidt.{name}: must lie in [0, 1), got {v}")
    for name in ("n_q", "n_m", "n_l"):
        v = getattr(sc, name)
        if not (isinstance(v, int) and v >= 1):
            problems.append(f"schmidt.{name}: must be a positive integer, got {v}")
    if isinstance(sc.n_m, int) and sc.n_m % 2 == 0:
        problems.append(f"schmidt.n_m: must be odd (symmetric azimuthal range), got {sc.n_m}")
    gr = cfg.grids
    if gr.n_omega < 64:
        problems.append(f"grids.n_omega: must be >= 64, got {gr.n_omega}")
    if gr.n_time < 256:
        problems.append(f"grids.n_time: must be >= 256, got {gr.n_time}")
    for fig in cfg.outputs.figures:
        if not (isinstance(fig, int) and 1 <= fig <= 21):
            problems.append(f"outputs.figures: ids must be integers in 1..21, got {fig}")


def from_dict(data: dict) -> RunConfig:
    """Build and validate a RunConfig, reporting every offending key at once."""
    if not isinstance(data, dict):
        raise ConfigError(["top level: expected a JSON object"])
    problems: list[str] = []
    known = {"pump", "schmidt", "gamma_list", "power_sweep", "grids", "outputs"}
    for key in sorted(set(data) - known):
        problems.append(f"{key}: unknown top-level key")
    pump = _build_section(PumpConfig, data.get("pump", {}), "pump", problems)
    schmidt = _build_section(SchmidtConfig, data.get("schmidt", {}), "schmidt", problems)
    sweep = _build_section(SweepConfig, data.get("power_sweep", {}), "power_sweep", problems)
    grids = _build_section(GridConfig, data.get("grids", {}), "grids", problems)
    outputs_raw = dict(data.get("outputs", {}))
    if "figures" in outputs_raw and isinstance(outputs_raw["figures"], list):
        outputs_raw["figures"] = tuple(outputs_raw["figures"])
    outputs = _build_section(OutputConfig, outputs_raw, "outputs", problems)
    gammas = data.get("gamma_list", (0.0, 0.5, 1.0))
    if not isinstance(gammas, (list, tuple)) or not gammas:
        problems.append("gamma_list: expected a non-empty list")
        gammas = (0.0,)
    if None in (pump, schmidt, sweep, grids, outputs):
        raise ConfigError(problems or ["invalid configuration"])
    cfg = RunConfig(
        pump=pump, schmidt=schmidt, gamma_list=tuple(float(g) for g in gammas),
        power_sweep=sweep, grids=grids, outputs=outputs,
    )
    _validate(cfg, problems)
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path) -> RunConfig:
    """Read, parse and validate a JSON run configuration."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"{path}: not valid JSON ({exc})"]) from exc
    return from_dict(data)


def config_hash(cfg: RunConfig) -> str:
    """Stable short hash of the canonical JSON form."""
    canon = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
