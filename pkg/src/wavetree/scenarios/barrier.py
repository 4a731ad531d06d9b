"""Barrier scattering: a packet splits into transmitted and reflected channels.

The run reports the transmitted/reflected masses against the stationary
quadrature prediction, extracts the branching tree, and verifies it.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..decomposition import minimize_overlap
from ..errors import ResolvabilityError
from ..evolution import EvolutionEngine, square_barrier
from ..grid import Grid
from ..tree import build_tree, detect_channels, verify_tree
from ..tunneling import packet_transmission
from ..wavefunction import decompose_by_partition, gaussian_packet
from .base import ScenarioResult, resolved_config
from .common import halfspace_mass


@dataclass(frozen=True)
class BarrierSpec:
    extent: float = 160.0
    cells: int = 1024
    dt: float = 0.005
    mass: float = 1.0
    packet_center: float = -40.0
    packet_momentum: float = 2.0
    packet_width: float = 5.0
    barrier_height: float = 1.65
    barrier_width: float = 2.0
    barrier_center: float = 0.0
    horizon: float = 40.0
    sample_dt: float = 1.0
    theta: float = 0.005
    d_min: float = 4.0
    epsilon: float = 0.05
    mass_floor: float = 1e-3
    confirm_window: int = 3
    oracle_rel_tol: float = 0.10

    def validate(self) -> None:
        grid = Grid.line(self.extent, self.cells)
        dx = grid.spacing[0]
        half = self.extent / 2
        if self.packet_width < 4 * dx:
            raise ResolvabilityError("packet_width below 4 cells")
        if abs(self.barrier_center) + self.barrier_width / 2 >= half:
            raise ResolvabilityError("barrier extends outside the grid")
        if self.packet_center >= self.barrier_center:
            raise ResolvabilityError("packet must start left of the barrier")
        if self.packet_momentum <= 0:
            raise ResolvabilityError("packet needs rightward momentum")
        if abs(self.packet_center) + 6 * self.packet_width > half:
            raise ResolvabilityError("packet closer than 6 widths to the boundary")
        # ballistic reach plus dispersion must stay inside the box
        tau = self.horizon / (2 * self.mass * self.packet_width ** 2)
        spread = self.packet_width * (1 + tau ** 2) ** 0.5
        reach = self.packet_center + self.packet_momentum / self.mass * self.horizon
        if max(reach, abs(self.packet_center)) + 3 * spread > half:
            raise ResolvabilityError("packet reaches the boundary before the horizon")


def run_barrier_scattering(spec: BarrierSpec) -> ScenarioResult:
    grid = Grid.line(spec.extent, spec.cells)
    engine = EvolutionEngine(
        grid, dt=spec.dt, mass=spec.mass,
        potential=square_barrier(grid, spec.barrier_height, spec.barrier_width,
                                 spec.barrier_center))
    psi0 = gaussian_packet(grid, spec.packet_center, spec.packet_momentum,
                           spec.packet_width)

    steps_per, dt_eff = engine.steps_for(spec.sample_dt)
    n_samples = int(spec.horizon / dt_eff + 1e-9)

    rows = []
    psi = psi0
    first_split_overlap = None
    for k in range(n_samples + 1):
        if k > 0:
            psi = engine.evolve_steps(psi, steps_per)
        t = k * dt_eff
        left, right = halfspace_mass(psi, 0, spec.barrier_center)
        part = detect_channels(psi, theta=spec.theta, d_min=spec.d_min,
                               mass_floor=spec.mass_floor)
        if part.n_blocks >= 2:
            overlap = minimize_overlap(decompose_by_partition(psi, part)).value
            if first_split_overlap is None:
                first_split_overlap = overlap
        else:
            overlap = 0.0
        rows.append((t, part.n_blocks, overlap, left, right, left + right))

    final_t, final_channels, final_overlap, mass_left, mass_right, total = rows[-1]
    t_pred = packet_transmission(spec.packet_momentum, spec.packet_width,
                                 spec.barrier_height, spec.barrier_width, spec.mass)
    rel_err = abs(mass_right - t_pred) / t_pred if t_pred > 0 else float("inf")

    tree = build_tree(psi0, engine, spec.horizon, spec.sample_dt,
                      theta=spec.theta, d_min=spec.d_min, epsilon=spec.epsilon,
                      confirm_window=spec.confirm_window, mass_floor=spec.mass_floor)
    verdict = verify_tree(tree, engine)

    expect_branch = t_pred > spec.mass_floor and (1 - t_pred) > spec.mass_floor
    verdicts = {
        "mass_conserved": abs(total - 1.0) <= 1e-6,
        "transmission_matches_oracle": rel_err <= spec.oracle_rel_tol,
        "branch_events": tree.n_branch_events == (1 if expect_branch else 0),
        "tree_verified": verdict.passed,
        "overlap_decreasing": (first_split_overlap is None
                               or final_overlap <= first_split_overlap + 1e-12),
    }
    summary = {
        "transmitted": mass_right,
        "reflected": mass_left,
        "transmission_predicted": t_pred,
        "transmission_rel_err": rel_err,
        "branch_events": tree.branch_events,
        "final_channels": final_channels,
        "tree_verdict": verdict.to_dict(),
    }
    return ScenarioResult(
        kind="barrier-scattering",
        config=resolved_config(spec, "barrier-scattering"),
        columns=["t", "channels", "overlap", "mass_left", "mass_right", "mass_total"],
        rows=rows,
        summary=summary,
        verdicts=verdicts,
        tree=tree,
    )
