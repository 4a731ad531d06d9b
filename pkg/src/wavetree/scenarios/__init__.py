"""Scenario registry: executable realizations of the physical situations."""

from __future__ import annotations

from ..errors import ConfigError
from .barrier import BarrierSpec, run_barrier_scattering
from .base import ScenarioResult, spec_from_dict
from .beam_splitter import BeamSplitterSpec, run_beam_splitter, run_beam_splitter_contrast
from .double_slit import DoubleSlitSpec, run_double_slit_photon
from .measurement import MeasurementSpec, run_measurement_toy
from .oscillator_models import (
    IdealModelSpec,
    OscillatorCompareSpec,
    OscillatorDecaySpec,
    run_ideal_model,
    run_oscillator_compare,
    run_oscillator_decay,
)

REGISTRY = {
    "barrier-scattering": (BarrierSpec, run_barrier_scattering),
    "beam-splitter": (BeamSplitterSpec, run_beam_splitter),
    "beam-splitter-contrast": (BeamSplitterSpec, run_beam_splitter_contrast),
    "measurement-toy": (MeasurementSpec, run_measurement_toy),
    "double-slit-photon": (DoubleSlitSpec, run_double_slit_photon),
    "oscillator-decay": (OscillatorDecaySpec, run_oscillator_decay),
    "oscillator-compare": (OscillatorCompareSpec, run_oscillator_compare),
    "ideal-model": (IdealModelSpec, run_ideal_model),
}


def load_spec(config: dict):
    kind = config.get("kind")
    if kind not in REGISTRY:
        raise ConfigError(f"unknown scenario kind {kind!r}; known: {sorted(REGISTRY)}")
    cls, _ = REGISTRY[kind]
    return spec_from_dict(cls, config)


def run_scenario(config: dict) -> ScenarioResult:
    kind = config.get("kind")
    spec = load_spec(config)
    _, runner = REGISTRY[kind]
    return runner(spec)


def scenario_state_and_engine(config: dict):
    """Initial state and engine for kinds whose trees can be re-verified."""
    from ..evolution import EvolutionEngine, square_barrier
    from ..grid import Grid
    from ..wavefunction import gaussian_packet

    kind = config.get("kind")
    spec = load_spec(config)
    if kind == "barrier-scattering":
        grid = Grid.line(spec.extent, spec.cells)
        engine = EvolutionEngine(grid, dt=spec.dt, mass=spec.mass,
                                 potential=square_barrier(grid, spec.barrier_height,
                                                          spec.barrier_width,
                                                          spec.barrier_center))
        psi0 = gaussian_packet(grid, spec.packet_center, spec.packet_momentum,
                               spec.packet_width)
        return psi0, engine
    if kind in ("beam-splitter", "beam-splitter-contrast"):
        grid = Grid.plane(spec.extent, (spec.cells, spec.cells))
        engine = EvolutionEngine(grid, dt=spec.dt, mass=spec.mass,
                                 potential=square_barrier(grid, spec.barrier_height,
                                                          spec.barrier_width, axis=0))
        psi0 = gaussian_packet(grid, (spec.packet_center, 0.0),
                               (spec.packet_momentum, 0.0),
                               (spec.packet_width, spec.pointer_width))
        return psi0, engine
    raise ConfigError(f"scenario kind {kind!r} does not produce a verifiable tree")


__all__ = [
    "REGISTRY", "ScenarioResult", "load_spec", "run_scenario",
    "scenario_state_and_engine",
    "BarrierSpec", "BeamSplitterSpec", "MeasurementSpec", "DoubleSlitSpec",
    "OscillatorDecaySpec", "OscillatorCompareSpec", "IdealModelSpec",
    "run_barrier_scattering", "run_beam_splitter", "run_beam_splitter_contrast",
    "run_measurement_toy", "run_double_slit_photon",
    "run_oscillator_decay", "run_oscillator_compare", "run_ideal_model",
]
