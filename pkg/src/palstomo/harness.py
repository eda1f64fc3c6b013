"""Experiment configuration, synthetic data generation and run orchestration.

A survey is described declaratively by a TOML file with sections
``[model]``, ``[phantom]``, ``[pals]``, ``[solver]``, ``[noise]`` and
``[output]`` (see ``configs/`` for annotated defaults).  All randomness
derives from the single ``noise.seed``: independent child streams are used
for measurement noise, bump-center placement and phantom heterogeneity, so
identical configs give identical results regardless of call order.

Noise convention ``global_rms`` (default) draws i.i.d. Gaussian entries with
standard deviation ``pct/100 * ||clean|| / sqrt(N)``, so the expected noise
norm is ``pct/100`` of the clean data norm; ``per_sample`` scales each entry
by its own clean magnitude instead.  Complex data get independent real and
imaginary perturbations at ``std / sqrt(2)`` each.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import io, optim, pals, phantoms
from .csrbf import WendlandKernel
from .ct import CtGeometry, CtModel, full_view_angles, limited_view_angles
from .dot import DotModel, make_dot_setup
from .ert import ErtModel, make_ert_setup
from .grids import Grid2D
from .pals import PalsModel
from .phantoms import Phantom, Primitive


class ConfigError(ValueError):
    """Bad configuration file or inconsistent settings."""


def _take(section: dict, name: str, key: str, default=..., cast=None):
    if key not in section:
        if default is ...:
            raise ConfigError(f"[{name}] missing required key '{key}'")
        return default
    v = section[key]
    if cast is not None:
        try:
            v = cast(v)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"[{name}] key '{key}': {e}") from e
    return v


@dataclass
class ModelConfig:
    kind: str = "ct"                 # ct | ert | dot
    view: str = "full"               # ct: full | limited
    grid_n: int = 64                 # ct / dot cells per side
    n_detectors: int = 34
    angle_step_deg: float = 1.0
    ert_inner_n: int = 75
    ert_pad_n: int = 25
    ert_background: float = 0.01
    dot_side_cm: float = 5.0
    dot_frequencies_mhz: tuple = (0.0, 25.0, 50.0)
    dot_mu_s_prime: float = 6.0
    dot_n_sources: int = 8
    dot_n_detectors: int = 8


@dataclass
class PhantomConfig:
    kind: str = "ct_lobes"
    contrast_in: float = 2.5
    contrast_out: float = 1.0
    heterogeneity_percent: float = 0.0
    primitives: list = field(default_factory=list)   # overrides kind if set


@dataclass
class PalsConfig:
    m0: int = 50
    alpha0: float = 0.2
    beta0: float = 2.5
    level: float = 0.15
    epsilon: float = 0.1
    heaviside: str = "H2"
    center_box: tuple = (-0.75, 0.75, -0.75, 0.75)   # x0,x1,y0,y1
    kernel_dim: int = 1
    kernel_smoothness: int = 1
    norm_smoothing: float = 0.0                      # 0: 1% of min grid spacing
    beta_min: float = 0.0                            # 0: supports capped at 20x diagonal


@dataclass
class SolverSection:
    scheme: str = "lm"
    max_iters: int = 50
    unknown_contrasts: bool = False
    contrast_init: tuple = (0.0, 0.0)
    lambda0: float = 0.0                             # 0: auto from trace(H0)
    lambda_up: float = 10.0
    lambda_down: float = 0.1
    stagnation_tol: float = 1e-6
    stagnation_patience: int = 5
    step_norm_tol: float = 1e-10
    max_retries: int = 30
    discrepancy_target: float = 0.0                  # 0: use the synthetic noise norm


@dataclass
class NoiseConfig:
    percent: float = 1.0
    seed: int = 0
    convention: str = "global_rms"                   # global_rms | per_sample


@dataclass
class OutputConfig:
    directory: str = "out"


@dataclass
class ExperimentConfig:
    model: ModelConfig
    phantom: PhantomConfig
    pals: PalsConfig
    solver: SolverSection
    noise: NoiseConfig
    output: OutputConfig

    def validate(self):
        if self.model.kind not in ("ct", "ert", "dot"):
            raise ConfigError("[model] kind must be 'ct', 'ert' or 'dot'")
        if self.model.kind == "ct" and self.model.view not in ("full", "limited"):
            raise ConfigError("[model] view must be 'full' or 'limited'")
        if self.noise.percent < 0:
            raise ConfigError("[noise] percent must be nonnegative")
        if self.noise.convention not in ("global_rms", "per_sample"):
            raise ConfigError("[noise] convention must be 'global_rms' or 'per_sample'")
        if self.pals.heaviside == "H2" and abs(self.pals.level) < self.pals.epsilon:
            raise ConfigError("[pals] H2 requires |level| >= epsilon")
        if self.pals.heaviside not in pals.HEAVISIDE_KINDS:
            raise ConfigError("[pals] heaviside must be 'H1' or 'H2'")
        if self.solver.max_iters < 0:
            raise ConfigError("[solver] max_iters must be nonnegative")
        return self


_SECTIONS = {
    "model": ModelConfig, "phantom": PhantomConfig, "pals": PalsConfig,
    "solver": SolverSection, "noise": NoiseConfig, "output": OutputConfig,
}


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML experiment description."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with path.open("rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    parts = {}
    for name, cls in _SECTIONS.items():
        if name not in raw:
            raise ConfigError(f"missing required section [{name}]")
        section = raw[name]
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(section) - fields
        if unknown:
            raise ConfigError(f"[{name}] unknown keys: {sorted(unknown)}")
        kwargs = {}
        for f in dataclasses.fields(cls):
            if f.name in section:
                v = section[f.name]
                if isinstance(f.default, tuple) and f.name != "primitives":
                    v = tuple(v)
                kwargs[f.name] = v
        parts[name] = cls(**kwargs)
    if "primitives" in raw.get("phantom", {}):
        parts["phantom"].primitives = [
            _primitive_from_dict(d) for d in raw["phantom"]["primitives"]]
    return ExperimentConfig(**parts).validate()


def _primitive_from_dict(d: dict) -> Primitive:
    kind = _take(d, "phantom.primitives", "kind")
    op = d.get("op", "add")
    if kind == "disc":
        return phantoms.disc(*_take(d, "phantom.primitives", "center"),
                             _take(d, "phantom.primitives", "radius"), op=op)
    if kind == "rect":
        return phantoms.rect(*_take(d, "phantom.primitives", "bounds"), op=op)
    raise ConfigError(f"[phantom.primitives] unknown kind {kind!r}")


# ---------------------------------------------------------------------------

class Experiment:
    """Configured survey: forward model, phantom truth, PaLS initialization
    and solver wiring."""

    def __init__(self, config: ExperimentConfig):
        self.config = config.validate()
        mc = config.model
        if mc.kind == "ct":
            grid = Grid2D.uniform((-1.0, 1.0), (-1.0, 1.0), mc.grid_n, mc.grid_n)
            angles = (full_view_angles(mc.angle_step_deg) if mc.view == "full"
                      else limited_view_angles(mc.angle_step_deg))
            geom = CtGeometry(n_detectors=mc.n_detectors, angles=angles)
            self.fwd = CtModel(geom, grid)
        elif mc.kind == "ert":
            setup = make_ert_setup(n_inner=mc.ert_inner_n, n_pad=mc.ert_pad_n,
                                   background=mc.ert_background)
            self.fwd = ErtModel(setup)
        else:
            setup = make_dot_setup(n=mc.grid_n, side_cm=mc.dot_side_cm,
                                   n_sources=mc.dot_n_sources,
                                   n_detectors=mc.dot_n_detectors,
                                   frequencies=[f * 1e6 for f in mc.dot_frequencies_mhz],
                                   mu_s_prime=mc.dot_mu_s_prime)
            self.fwd = DotModel(setup)
        self.grid = self.fwd.grid

        pc = config.phantom
        if pc.primitives:
            prims = pc.primitives
        else:
            if pc.kind not in phantoms.BUILTIN_SHAPES:
                raise ConfigError(f"[phantom] unknown kind {pc.kind!r}")
            prims = phantoms.BUILTIN_SHAPES[pc.kind]()
        self.phantom = Phantom(prims, pc.contrast_in, pc.contrast_out,
                               description=pc.kind)

    # child RNG streams off the one configured seed
    def _rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng([self.config.noise.seed, stream])

    def truth_field(self) -> np.ndarray:
        """Phantom property image, with additive Gaussian heterogeneity for
        nonzero ``heterogeneity_percent`` (std = pct/100 of the spatial
        mean), applied before data synthesis."""
        truth = self.phantom.field(self.grid)
        het = self.config.phantom.heterogeneity_percent
        if het > 0:
            std = het / 100.0 * float(truth.mean())
            truth = truth + self._rng(2).normal(0.0, std, truth.shape)
        return truth

    def synthesize_data(self) -> tuple[np.ndarray, np.ndarray, float]:
        """Clean data, noisy data and the exact injected noise norm."""
        clean = self.fwd.forward(self.truth_field())
        noisy, noise_norm = add_noise(clean, self.config.noise.percent,
                                      self._rng(0), self.config.noise.convention)
        return clean, noisy, noise_norm

    def init_pals(self) -> PalsModel:
        """PaLS starting state: seeded uniform centers in the configured
        box, alternating +/- weights, uniform dilations."""
        cfg = self.config.pals
        sc = self.config.solver
        rng = self._rng(1)
        x0, x1, y0, y1 = cfg.center_box
        centers = np.column_stack([rng.uniform(x0, x1, cfg.m0),
                                   rng.uniform(y0, y1, cfg.m0)])
        weights = np.where(np.arange(cfg.m0) % 2 == 0, cfg.alpha0, -cfg.alpha0)
        if sc.unknown_contrasts:
            contrast_in, contrast_out = sc.contrast_init
        else:
            contrast_in = self.config.phantom.contrast_in
            contrast_out = self.config.phantom.contrast_out
        upsilon = cfg.norm_smoothing or 0.01 * self.grid.min_spacing
        beta_min = cfg.beta_min or 0.05 / self.grid.diagonal
        return PalsModel(
            weights=weights,
            dilations=np.full(cfg.m0, cfg.beta0),
            centers=centers,
            contrast_in=float(contrast_in),
            contrast_out=float(contrast_out),
            level=cfg.level,
            epsilon=cfg.epsilon,
            norm_smoothing=upsilon,
            kernel=WendlandKernel(cfg.kernel_dim, cfg.kernel_smoothness),
            heaviside=cfg.heaviside,
            beta_min=beta_min,
        )

    def solver_config(self, noise_norm: float) -> optim.SolverConfig:
        sc = self.config.solver
        target = sc.discrepancy_target or noise_norm
        return optim.SolverConfig(
            scheme=sc.scheme,
            lambda0=sc.lambda0 or None,
            lambda_up=sc.lambda_up,
            lambda_down=sc.lambda_down,
            max_iters=sc.max_iters,
            discrepancy_target=target,
            stagnation_tol=sc.stagnation_tol,
            stagnation_patience=sc.stagnation_patience,
            step_norm_tol=sc.step_norm_tol,
            max_retries=sc.max_retries,
            unknown_contrasts=sc.unknown_contrasts,
        )

    def run(self):
        """Synthesize data, evolve the shape, return
        ``(state, log, metrics)``."""
        _, noisy, noise_norm = self.synthesize_data()
        model0 = self.init_pals()
        state, log = optim.run(self.solver_config(noise_norm), model0,
                               self.fwd, noisy)
        metrics = phantoms.shape_metrics(state.model, self.phantom, self.grid)
        metrics.update({
            "iterations": state.iteration,
            "stop_reason": state.stop_reason,
            "cost_final": state.cost,
            "residual_norm": float(np.sqrt(2.0 * state.cost)),
            "noise_norm": noise_norm,
            "seed": self.config.noise.seed,
        })
        return state, log, metrics

    def save_outputs(self, out_dir, state, log, metrics) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        io.write_field_csv(out / "truth.csv", self.grid,
                           self.phantom.field(self.grid), note="phantom property image")
        io.write_pgm(out / "truth.pgm", self.phantom.field(self.grid))
        phi = pals.eval_phi(state.model, self.grid)
        prop = pals.property_map(state.model, self.grid, phi)
        io.write_field_csv(out / "property.csv", self.grid, prop,
                           note="reconstructed property image")
        io.write_pgm(out / "property.pgm", prop)
        io.write_field_csv(out / "phi.csv", self.grid, phi,
                           note="reconstructed level set field")
        io.write_pgm(out / "phi.pgm", phi)
        io.write_convergence_csv(out / "convergence.csv", log)
        io.write_params_csv(out / "params_final.csv", state.model)
        snap_dir = out / "params"
        snap_dir.mkdir(exist_ok=True)
        for row, m in zip(log, state.model_history):
            io.write_params_csv(snap_dir / f"iter_{row['iteration']:04d}.csv", m)
        io.write_metrics(out / "metrics.txt", metrics)


def add_noise(clean: np.ndarray, percent: float, rng: np.random.Generator,
              convention: str = "global_rms") -> tuple[np.ndarray, float]:
    """Additive Gaussian noise at a given percent level; returns the noisy
    vector and the exact norm of the injected noise."""
    clean = np.asarray(clean)
    if percent == 0:
        return clean.copy(), 0.0
    n = clean.size
    if convention == "per_sample":
        std = percent / 100.0 * np.abs(clean)
    else:
        std = np.full(n, percent / 100.0 * np.linalg.norm(clean) / np.sqrt(n))
    if np.iscomplexobj(clean):
        e = (rng.normal(0.0, std / np.sqrt(2)) +
             1j * rng.normal(0.0, std / np.sqrt(2)))
    else:
        e = rng.normal(0.0, std)
    return clean + e, float(np.linalg.norm(e))


# paper-style default experiments ------------------------------------------

def default_config(name: str) -> ExperimentConfig:
    """Built-in experiment setups: ``ct_full``, ``ct_limited``,
    ``ert_shape``, ``ert_joint``, ``dot``."""
    if name == "ct_full":
        return config_from_dict({
            "model": {"kind": "ct", "view": "full", "grid_n": 64,
                      "n_detectors": 34, "angle_step_deg": 1.0},
            "phantom": {"kind": "ct_lobes", "contrast_in": 2.5, "contrast_out": 1.0},
            "pals": {"m0": 50, "alpha0": 0.2, "beta0": 2.5, "level": 0.15,
                     "epsilon": 0.1, "center_box": [-0.75, 0.75, -0.75, 0.75]},
            "solver": {"max_iters": 40, "unknown_contrasts": True,
                       "contrast_init": [1.5, 0.5]},
            "noise": {"percent": 5.0, "seed": 20110401},
            "output": {"directory": "out/ct_full"},
        })
    if name == "ct_limited":
        cfg = default_config("ct_full")
        cfg.model.view = "limited"
        cfg.noise.percent = 2.0
        cfg.solver.max_iters = 80
        cfg.solver.unknown_contrasts = False
        cfg.solver.contrast_init = (0.0, 0.0)
        cfg.output.directory = "out/ct_limited"
        return cfg
    if name == "ert_shape":
        return config_from_dict({
            "model": {"kind": "ert"},
            "phantom": {"kind": "ert_concave", "contrast_in": 0.05,
                        "contrast_out": 0.01},
            "pals": {"m0": 40, "alpha0": 0.2, "beta0": 4.0, "level": 0.15,
                     "epsilon": 0.1, "center_box": [-0.4, 0.4, -0.8, 0.0]},
            "solver": {"max_iters": 60},
            "noise": {"percent": 1.0, "seed": 20110401},
            "output": {"directory": "out/ert_shape"},
        })
    if name == "ert_joint":
        cfg = default_config("ert_shape")
        cfg.solver.unknown_contrasts = True
        cfg.solver.contrast_init = (0.01, 0.005)
        cfg.output.directory = "out/ert_joint"
        return cfg
    if name == "dot":
        return config_from_dict({
            "model": {"kind": "dot", "grid_n": 50},
            "phantom": {"kind": "dot_two_blobs", "contrast_in": 0.015,
                        "contrast_out": 0.005, "heterogeneity_percent": 2.0},
            # dilation 80 per meter = 0.8 per cm in this cm-based domain
            "pals": {"m0": 20, "alpha0": 0.2, "beta0": 0.8, "level": 0.15,
                     "epsilon": 0.1, "center_box": [0.5, 4.5, 0.5, 4.5]},
            "solver": {"max_iters": 250},
            "noise": {"percent": 0.1, "seed": 20110401},
            "output": {"directory": "out/dot"},
        })
    raise ConfigError(f"unknown default config {name!r}")
