"""Scenario configuration: a versioned, JSON-round-trippable run description.

A scenario fixes the lattice, the initial state (soliton / gaussian /
uniform), which engines to run, and the evolution controls.  The config
hash covers everything that affects the physics, so resumed runs can verify
they continue the same computation.  Presets reproduce the paper-style
pipelines (fig2 .. fig9); they are plain builders, so `preset <name>` and
the test suite share one source of truth.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .continuum import SolitonSpec, sound_speed, soliton_width
from .errors import ScenarioError
from .model import LatticeParams, gaussian_profile
from .quantum.config import EvolutionConfig
from .quantum.dense import MAX_DENSE_SITES

SCHEMA_VERSION = 1
ENGINES = ("meanfield", "quantum-mps", "quantum-exact")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    kind: str  # soliton | gaussian | uniform
    L: int
    J: float = 1.0
    V: float = 0.0
    rho0: float = 0.25
    # soliton fields
    vbar: float = 0.0
    branch: str = "bright"
    center: float | None = None
    # gaussian fields
    amplitude: float = 0.0
    width: float = 0.0
    gauss_phase_jump: bool = False
    # run controls
    engines: tuple = ("meanfield",)
    duration: float = 20.0
    dt: float = 0.05
    mf_dt: float = 0.01
    chi_max: int = 1000
    trunc_tol: float = 1e-10
    w_budget: float = 1e-9
    measure_every: float = 1.0
    allow_boundary_overrun: bool = False
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ScenarioError(
                f"unsupported schema version {self.schema_version} "
                f"(this build reads {SCHEMA_VERSION})"
            )
        if self.kind not in ("soliton", "gaussian", "uniform"):
            raise ScenarioError(f"unknown scenario kind {self.kind!r}")
        bad = [e for e in self.engines if e not in ENGINES]
        if bad:
            raise ScenarioError(f"unknown engines {bad}; valid: {ENGINES}")
        if "quantum-exact" in self.engines and self.L > MAX_DENSE_SITES:
            raise ScenarioError(
                f"quantum-exact requires L <= {MAX_DENSE_SITES}, got L={self.L}"
            )
        # constructors validate the rest
        self.lattice()
        if self.kind == "soliton":
            self.soliton_spec()

    def lattice(self) -> LatticeParams:
        return LatticeParams(L=self.L, J=self.J, V=self.V)

    def soliton_spec(self) -> SolitonSpec:
        return SolitonSpec(
            rho0=self.rho0,
            coupling_ratio=self.V / self.J,
            vbar=self.vbar,
            branch=self.branch,
            center=self.center,
        )

    def evolution_config(self) -> EvolutionConfig:
        return EvolutionConfig(
            duration=self.duration,
            dt=self.dt,
            chi_max=self.chi_max,
            trunc_tol=self.trunc_tol,
            measure_every=self.measure_every,
            w_budget=self.w_budget,
        )

    def to_dict(self):
        d = asdict(self)
        d["engines"] = list(self.engines)
        return d

    @classmethod
    def from_dict(cls, d) -> "ScenarioConfig":
        d = dict(d)
        d["engines"] = tuple(d.get("engines", ("meanfield",)))
        return cls(**d)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text) -> "ScenarioConfig":
        return cls.from_dict(json.loads(text))

    def config_hash(self):
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()

    def with_updates(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)


def boundary_horizon(config: ScenarioConfig):
    """Safe evolution time before soliton and boundary talk to each other.

    Quasi-particles travel at about the sound speed; the horizon is the
    distance from the feature's edge (center offset by ~2 widths) to the
    nearest boundary, over that speed.  Uniform backgrounds have no
    feature and no horizon.
    """
    if config.kind == "uniform":
        return np.inf
    cs = sound_speed(config.rho0, config.V / config.J) * config.J
    if cs == 0.0:
        return np.inf
    if config.kind == "soliton":
        width = soliton_width(config.soliton_spec())
    else:
        width = config.width
    x0 = config.center if config.center is not None else 0.5 * (config.L - 1)
    edge_distance = min(x0, config.L - 1 - x0)
    return max(edge_distance - 2.0 * width, 0.0) / cs


def initial_profile(config: ScenarioConfig):
    """(rho, phi) site arrays for the configured initial state."""
    from .continuum import sample_on_lattice  # local: keeps import graph flat

    if config.kind == "soliton":
        return sample_on_lattice(config.lattice(), config.soliton_spec())
    if config.kind == "gaussian":
        # same default placement as the solitons, so the two families can
        # be compared site by site
        center = config.center if config.center is not None else float(config.L // 2)
        return gaussian_profile(
            config.L,
            config.rho0,
            config.amplitude,
            config.width,
            center=center,
            phase_jump=config.gauss_phase_jump,
        )
    L = config.L
    return np.full(L, config.rho0), np.zeros(L)


def _soliton_gamma(rho0, vj):
    return soliton_width(SolitonSpec(rho0=rho0, coupling_ratio=vj))


def preset_configs(name):
    """Scenario list for one paper-figure preset."""
    builders = {
        "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5,
        "fig6": _fig6, "fig7": _fig7, "fig8": _fig8, "fig9": _fig9,
    }
    if name not in builders:
        raise ScenarioError(f"unknown preset {name!r}; have {sorted(builders)}")
    return builders[name]()


def _fig2():
    # continuum vs lattice mean field, broad and narrow solitons
    out = []
    for vj in (0.75, 0.95):
        for branch in ("bright", "dark"):
            out.append(
                ScenarioConfig(
                    name=f"fig2-{branch}-vj{vj:g}",
                    kind="soliton", L=40, V=vj, rho0=0.25, branch=branch,
                    engines=("meanfield",), duration=20.0,
                )
            )
    return out


def _fig3():
    # mean-field breakdown scan plus the two spacetime maps
    out = [
        ScenarioConfig(
            name=f"fig3-bright-vj{vj:g}", kind="soliton", L=40, V=vj,
            rho0=0.25, engines=("meanfield",), duration=20.0,
        )
        for vj in (0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95)
    ]
    for vj in (0.65, 0.45):
        out.append(
            ScenarioConfig(
                name=f"fig3-map-vj{vj:g}", kind="soliton", L=40, V=vj,
                rho0=0.25, engines=("meanfield",), duration=20.0,
            )
        )
    return out


def _fig4():
    # boundary check: same soliton on L=40 and L=100 (long-running)
    return [
        ScenarioConfig(
            name=f"fig4-L{L}", kind="soliton", L=L, V=0.95, rho0=0.45,
            engines=("meanfield", "quantum-mps"), duration=20.0,
        )
        for L in (40, 100)
    ]


def _fig5():
    # stationary bright and dark soliton, mean field vs full quantum
    return [
        ScenarioConfig(
            name=f"fig5-{branch}", kind="soliton", L=40, V=0.95, rho0=0.25,
            branch=branch, engines=("meanfield", "quantum-mps"), duration=20.0,
        )
        for branch in ("bright", "dark")
    ]


def _fig6():
    # desk-scale ground-state entropy reference (exact diagonalization)
    return [
        ScenarioConfig(
            name="fig6-ground-state", kind="uniform", L=12, V=0.95, rho0=0.25,
            engines=(), duration=0.0,
        )
    ]


def _fig7():
    # stability scan template; the scan grid lives in the pipeline
    return [
        ScenarioConfig(
            name="fig7-template", kind="soliton", L=40, V=0.9, rho0=0.25,
            engines=("meanfield", "quantum-mps"), duration=20.0,
            chi_max=64, trunc_tol=1e-8, w_budget=1e-4,
        )
    ]


def _fig8():
    # discrete soliton vs gaussian with / without the pi phase imprint
    # (bright row; rerun with branch=dark / amplitude=-rho0 for the notch)
    vj, rho0 = 0.95, 0.25
    width = _soliton_gamma(rho0, vj)
    common = dict(
        L=40, V=vj, rho0=rho0,
        engines=("meanfield", "quantum-mps"), duration=20.0,
        chi_max=64, trunc_tol=1e-8, w_budget=1e-4,
    )
    return [
        ScenarioConfig(name="fig8-soliton", kind="soliton", branch="bright", **common),
        ScenarioConfig(
            name="fig8-gauss-jump", kind="gaussian", amplitude=1.0 - rho0,
            width=width, gauss_phase_jump=True, **common,
        ),
        ScenarioConfig(
            name="fig8-gauss-nojump", kind="gaussian", amplitude=1.0 - rho0,
            width=width, gauss_phase_jump=False, **common,
        ),
    ]


def _fig9():
    # correlation and entropy spacetime maps of the fig5 states
    return [
        c.with_updates(name=c.name.replace("fig5", "fig9"))
        for c in _fig5()
    ]


PRESET_NAMES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9")
