"""Run configuration, validation and deterministic file output."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import yaml

from . import data
from .bilinear import VARIANTS, CounterexampleSpec
from .continuation import ContinuationParams
from .errors import ConfigError, KdvGevreyError
from .gevrey import GevreyParams
from .solver import SolverConfig
from .spectral import GridSpec, RealField

SECTIONS = {
    "grid": {"n_points", "domain_length"},
    "datum": {"kind", "kappa", "kappas", "positions", "amplitude", "width", "n_bumps", "x0"},
    "solver": {"dt", "t_end", "record_every", "dealias_on"},
    "gevrey": {"sigma", "s"},
    "radius": {"noise_floor_rel", "xi_lo", "cap", "presets", "power_law"},
    "picard": {"delta", "n_max", "tol", "n_slices"},
    "growth": {"delta", "sigmas"},
    "counterexample": {"variants", "rho", "N", "n_xi", "n_xi1", "n_mod", "s", "b", "b_prime",
                       "tolerance"},
    "kpv": {"n_draws", "n_xi", "n_tau", "extent", "box", "s", "b", "b_prime", "sigma"},
    "continuation": {"C", "c0", "a", "rho", "sigma0", "T", "T_ladder", "calibrate"},
}

DATUM_KINDS = ("zero", "soliton", "two_soliton", "lorentzian", "sech2", "gaussian", "random")

TOLERANCE_PROFILES = {
    "default": {"momentum_drift": 1e-8, "mass_drift": 1e-8, "hamiltonian_drift": 1e-6,
                "counterexample": None, "bound": 0.05},
    "strict": {"momentum_drift": 1e-10, "mass_drift": 1e-10, "hamiltonian_drift": 1e-8,
               "counterexample": 0.05, "bound": 0.01},
}


@dataclass
class RunConfig:
    raw: Dict[str, Dict[str, Any]]
    seed: int = 0
    output_dir: Path = Path("out")
    tolerance_profile: str = "default"
    grid: GridSpec = field(default_factory=GridSpec)

    def section(self, name: str) -> Dict[str, Any]:
        return dict(self.raw.get(name) or {})

    @property
    def tolerances(self) -> Dict[str, Any]:
        return TOLERANCE_PROFILES[self.tolerance_profile]

    def solver_config(self) -> SolverConfig:
        sec = self.section("solver")
        return SolverConfig(dt=float(sec.get("dt", 1e-3)), t_end=float(sec.get("t_end", 1.0)),
                            dealias_on=bool(sec.get("dealias_on", True)),
                            record_every=int(sec.get("record_every", 100)))

    def gevrey_params(self) -> GevreyParams:
        sec = self.section("gevrey")
        return GevreyParams(float(sec.get("sigma", 0.3)), float(sec.get("s", 0.0)))

    def datum(self) -> RealField:
        return build_datum(self.grid, self.section("datum"), self.seed)

    def continuation_params(self, M0: float = 1.0) -> ContinuationParams:
        sec = self.section("continuation")
        return ContinuationParams(C=float(sec.get("C", 1.0)), c0=float(sec.get("c0", 0.1)),
                                  a=float(sec.get("a", 4.0)), rho=float(sec.get("rho", 0.74)),
                                  sigma0=float(sec.get("sigma0", 0.5)), M0=M0)

    def counterexample_specs(self) -> List[CounterexampleSpec]:
        sec = self.section("counterexample")
        variants = sec.get("variants", ["xi_power"])
        if isinstance(variants, str):
            variants = [variants]
        rhos = sec.get("rho", 0.5)
        rhos = rhos if isinstance(rhos, list) else [rhos]
        ladder = sec.get("N", [64, 128, 256])
        extra = {k: sec[k] for k in ("n_xi", "n_xi1", "n_mod", "s", "b", "b_prime") if k in sec}
        return [CounterexampleSpec(float(N), float(rho), v, **extra)
                for v in variants for rho in rhos for N in ladder]


def build_datum(grid: GridSpec, sec: Dict[str, Any], seed: int = 0) -> RealField:
    kind = sec.get("kind", "soliton")
    amp = float(sec.get("amplitude", 1.0))
    if kind == "zero":
        return data.zero(grid)
    if kind == "soliton":
        base = data.soliton(grid, float(sec.get("kappa", 0.5)), float(sec.get("x0", 0.0)))
        return RealField(grid, amp * base.samples)
    if kind == "two_soliton":
        return data.two_soliton(grid, tuple(sec.get("kappas", (0.6, 0.3))), sec.get("positions"))
    if kind == "lorentzian":
        return data.lorentzian(grid, amp)
    if kind == "sech2":
        return data.sech2(grid, amp)
    if kind == "gaussian":
        return data.gaussian(grid, amp, float(sec.get("width", 1.0)))
    if kind == "random":
        rng = np.random.default_rng(seed)
        return data.random_smooth(grid, rng, float(sec.get("amplitude", 0.1)),
                                  int(sec.get("n_bumps", 4)))
    raise ConfigError(f"unknown datum kind {kind!r}; expected one of {DATUM_KINDS}")


def load_config(path: Optional[os.PathLike], seed: int = 0, output_dir: os.PathLike = "out",
                tolerance_profile: str = "default") -> RunConfig:
    """Read and validate a YAML run configuration.

    Every parameter is pushed through the module constructors here, so an
    invalid value fails before any computation starts.
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
            raw = yaml.safe_load(text) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of sections")
    for name, body in raw.items():
        if name not in SECTIONS:
            raise ConfigError(f"unknown config section {name!r}")
        if body is None:
            continue
        if not isinstance(body, dict):
            raise ConfigError(f"section {name!r} must be a mapping")
        unknown = set(body) - SECTIONS[name]
        if unknown:
            raise ConfigError(f"unknown keys in section {name!r}: {sorted(unknown)}")
    if tolerance_profile not in TOLERANCE_PROFILES:
        raise ConfigError(f"unknown tolerance profile {tolerance_profile!r}")
    if not 0 <= int(seed) < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    try:
        grid_sec = raw.get("grid") or {}
        grid = GridSpec(int(grid_sec.get("n_points", 1024)),
                        float(grid_sec.get("domain_length", 40.0 * np.pi)))
        cfg = RunConfig(raw, int(seed), Path(output_dir), tolerance_profile, grid)
        cfg.solver_config()
        cfg.gevrey_params()
        cfg.continuation_params()
        kind = cfg.section("datum").get("kind", "soliton")
        if kind not in DATUM_KINDS:
            raise ConfigError(f"unknown datum kind {kind!r}")
        if "counterexample" in raw:
            variants = cfg.section("counterexample").get("variants", ["xi_power"])
            for v in [variants] if isinstance(variants, str) else variants:
                if v not in VARIANTS:
                    raise ConfigError(f"unknown counterexample variant {v!r}")
        _check_positive(cfg.section("growth").get("sigmas", [1.0]), "growth.sigmas")
        _check_positive(cfg.section("continuation").get("T_ladder", [1.0]), "continuation.T_ladder")
        picard = cfg.section("picard")
        if "delta" in picard:
            _check_positive([picard["delta"]], "picard.delta")
    except ConfigError:
        raise
    except KdvGevreyError as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    return cfg


def _check_positive(values: Iterable, name: str) -> None:
    for v in values:
        if not float(v) > 0:
            raise ConfigError(f"{name} entries must be positive, got {v}")


# --- output ----------------------------------------------------------------

def fmt(value) -> str:
    """Deterministic text for CSV cells: shortest round-trip repr for floats."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    atomic_write_text(path, buf.getvalue())


def read_csv(path: Path) -> List[Dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_manifest(path: Path, manifest: Dict[str, Any]) -> None:
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    return str(obj)
