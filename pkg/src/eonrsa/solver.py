"""Outer column-generation loop, optimality certification, and reporting.

One outer round: solve the master LP (pruning dropped columns), snapshot the
duals, price every starting slot against that snapshot, add every improving
configuration. The loop stops when no slot produces one (the pricing ILP
values are all zero); the run is certified when additionally every slot's
pricing LP bound is zero, making the final LP value a true upper bound.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from .instance import Instance
from .master import MasterDuals, PricingRequest, ProvisioningPlan, RestrictedMaster
from .oracle import verify_plan
from .pricing import PricingResult, price_slot

DEFAULT_FINAL_GAP = 0.1


@dataclass(frozen=True)
class SolveConfig:
    final_ilp_relative_gap: float = DEFAULT_FINAL_GAP
    improvement_tolerance: float = 1e-6
    dual_clamp: bool = True
    max_wall_clock_seconds: float = 0.0  # 0 = unlimited
    parallel_pricing: bool = False
    threads: int = 0  # 0 = executor default; only used with parallel_pricing
    deterministic: bool = True
    backend: str = "bundled"
    # Inner pricing LPs are tiny; the bundled engine beats the per-call
    # overhead of an external one regardless of the master's backend.
    pricing_backend: str = "bundled"
    final_ilp_use_warm_basis: bool = False  # fresh start before the ILP by default
    max_outer_iterations: int = 10_000
    record_dual_snapshots: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.final_ilp_relative_gap < 1.0:
            raise ValueError("final_ilp_relative_gap must lie in [0, 1)")
        if self.improvement_tolerance <= 0.0:
            raise ValueError("improvement_tolerance must be positive")


@dataclass
class SolveReport:
    """Everything a result row needs, plus the traces invariant checks read.

    Epsilons are stored as fractions (table display multiplies by 100);
    z values are in slot units with Tbps available via the helpers.
    """

    instance_name: str
    spectrum_slots: int
    num_requests: int
    offered_load_gbps: float
    slot_rate_gbps: float
    z_lp_star_slots: float
    z_ilp_slots: float
    epsilon_lp: float
    epsilon_tab: float
    gos_percent: float
    certified: bool
    timed_out: bool
    outer_iterations: int
    columns_generated: int
    final_ilp_gap: float
    timings: dict[str, float]
    lp_value_trace: list[float] = field(default_factory=list)
    prune_checks: list[tuple[float, float]] = field(default_factory=list)
    dual_snapshots: list[MasterDuals] = field(default_factory=list, repr=False)

    @property
    def offered_load_tbps(self) -> float:
        return self.offered_load_gbps / 1000.0

    @property
    def z_lp_star_tbps(self) -> float:
        return self.z_lp_star_slots * self.slot_rate_gbps / 1000.0

    @property
    def z_ilp_tbps(self) -> float:
        return self.z_ilp_slots * self.slot_rate_gbps / 1000.0


class Metrics(NamedTuple):
    epsilon_lp_percent: float
    epsilon_tab_percent: float
    gos_percent: float


def report_metrics(z_lp_star: float, z_ilp: float, offered_load: float) -> Metrics:
    """Quality metrics in percent (display rounds to one decimal).

    epsilon_lp divides the bound gap by z_LP*; epsilon_tab divides by the
    integral value, which is the arithmetic the result tables use. Zero
    denominators report 0; zero offered load reports a GoS of 100.
    """
    if z_ilp < 0 or z_lp_star < z_ilp - 1e-9:
        raise ValueError(f"need z_lp_star >= z_ilp >= 0, got {z_lp_star}, {z_ilp}")
    gap = max(z_lp_star - z_ilp, 0.0)
    eps_lp = 100.0 * gap / z_lp_star if z_lp_star > 1e-12 else 0.0
    eps_tab = 100.0 * gap / z_ilp if z_ilp > 1e-12 else 0.0
    gos = 100.0 * z_ilp / offered_load if offered_load > 1e-12 else 100.0
    return Metrics(eps_lp, eps_tab, gos)


def certify(results: Sequence[PricingResult], tolerance: float = 1e-6) -> bool:
    """True when every slot's pricing LP bound vanished in the final round.

    Only then does rc_ilp = 0 prove that no improving configuration exists at
    all, making the master LP value a valid upper bound.
    """
    for res in results:
        if res.rc_ilp > tolerance:
            raise ValueError("certification requires a finished run (rc_ilp ~ 0 everywhere)")
    return all(res.rc_lp_star <= tolerance for res in results)


def solve(
    instance: Instance,
    config: SolveConfig = SolveConfig(),
    pricing_requests: Optional[Sequence[PricingRequest]] = None,
) -> tuple[SolveReport, ProvisioningPlan]:
    """Full run: column generation, certification, final ILP, post-processing."""
    t0 = time.monotonic()
    deadline = t0 + config.max_wall_clock_seconds if config.max_wall_clock_seconds > 0 else None
    rmp = RestrictedMaster(instance, pricing_requests, backend=config.backend)
    slot_requests = list(rmp.pricing_requests.values())

    lp_trace: list[float] = []
    snapshots: list[MasterDuals] = []
    columns_generated = 0
    outer = 0
    timed_out = False
    final_results: list[PricingResult] = []
    z_lp_star = 0.0

    while True:
        outer += 1
        if outer > config.max_outer_iterations:
            raise RuntimeError(f"column generation exceeded {config.max_outer_iterations} rounds")
        value, duals = rmp.solve_lp_and_prune()
        lp_trace.append(value)
        z_lp_star = value
        snapshot = duals.clamped() if config.dual_clamp else duals
        if config.record_dual_snapshots:
            snapshots.append(duals)
        results = _price_all_slots(instance, snapshot, slot_requests, config)
        improving = [r for r in results if r.configuration is not None]
        if not improving:
            final_results = results
            break
        for res in improving:
            rmp.add_column(res.configuration)
        columns_generated += len(improving)
        if deadline is not None and time.monotonic() > deadline:
            timed_out = True
            final_results = results
            # bring the LP value in line with the columns just added, so the
            # reported bound is the true relaxation value of the final RMP
            z_lp_star, _ = rmp.solve_lp_and_prune()
            lp_trace.append(z_lp_star)
            break

    certified = (not timed_out) and certify(final_results, config.improvement_tolerance)
    lp_seconds = time.monotonic() - t0

    t1 = time.monotonic()
    z_ilp, selected, mip = rmp.solve_final_ilp(
        config.final_ilp_relative_gap,
        use_warm_basis=config.final_ilp_use_warm_basis,
        deadline=deadline,
    )
    plan = rmp.post_process(selected)
    ilp_seconds = time.monotonic() - t1

    verify_plan(instance, plan, expected_slots=z_ilp)
    if z_ilp > z_lp_star + 1e-6 * (1.0 + abs(z_lp_star)):
        raise RuntimeError(f"integral value {z_ilp} above the LP bound {z_lp_star}")

    eps = report_metrics(z_lp_star, z_ilp, instance.offered_load_gbps / instance.slot_rate_gbps)
    report = SolveReport(
        instance_name=instance.name,
        spectrum_slots=instance.spectrum_slots,
        num_requests=len(instance.requests),
        offered_load_gbps=instance.offered_load_gbps,
        slot_rate_gbps=instance.slot_rate_gbps,
        z_lp_star_slots=z_lp_star,
        z_ilp_slots=z_ilp,
        epsilon_lp=eps.epsilon_lp_percent / 100.0,
        epsilon_tab=eps.epsilon_tab_percent / 100.0,
        gos_percent=eps.gos_percent,
        certified=certified,
        timed_out=timed_out,
        outer_iterations=outer,
        columns_generated=columns_generated,
        final_ilp_gap=mip.gap if math.isfinite(mip.gap) else 1.0,
        timings={
            "lp_phase": lp_seconds,
            "ilp_phase": ilp_seconds,
            "total": time.monotonic() - t0,
        },
        lp_value_trace=lp_trace,
        prune_checks=list(rmp.prune_checks),
        dual_snapshots=snapshots,
    )
    return report, plan


def _price_all_slots(
    instance: Instance,
    duals: MasterDuals,
    slot_requests: Sequence[PricingRequest],
    config: SolveConfig,
) -> list[PricingResult]:
    slots = range(1, instance.spectrum_slots + 1)

    def one(s: int) -> PricingResult:
        return price_slot(
            instance,
            s,
            duals,
            pricing_requests=slot_requests,
            backend=config.pricing_backend,
            tolerance=config.improvement_tolerance,
        )

    if not config.parallel_pricing:
        return [one(s) for s in slots]
    workers = config.threads if config.threads > 0 else None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, slots))
    return sorted(results, key=lambda r: r.slot)
