"""Exhaustive reference solver for tiny instances, plus the plan scanner.

Everything here recomputes from first principles (path enumeration, explicit
conflict masks) so it can stand as ground truth against the column-generation
stack. Keep it simple enough to be obviously correct; it must never share
shortcuts with the solver it checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ConflictDetected, InvariantViolation, LimitsExceeded
from .instance import Instance
from .master import MasterDuals, PricingRequest, ProvisioningPlan
from .topology import Path, enumerate_simple_paths


@dataclass(frozen=True)
class OracleLimits:
    max_nodes: int = 6
    max_requests: int = 5
    max_spectrum: int = 10
    max_hops: int = 5


@dataclass(frozen=True)
class OracleSolution:
    value_slots: int
    assignments: dict[int, tuple[Path, int]]  # pricing key -> (path, start slot)


def _check_limits(instance: Instance, limits: OracleLimits, n_requests: int) -> None:
    if instance.topology.num_nodes > limits.max_nodes:
        raise LimitsExceeded(
            f"{instance.topology.num_nodes} nodes > oracle cap {limits.max_nodes}"
        )
    if n_requests > limits.max_requests:
        raise LimitsExceeded(f"{n_requests} requests > oracle cap {limits.max_requests}")
    if instance.spectrum_slots > limits.max_spectrum:
        raise LimitsExceeded(
            f"{instance.spectrum_slots} slots > oracle cap {limits.max_spectrum}"
        )


def oracle_solve(
    instance: Instance,
    limits: OracleLimits = OracleLimits(),
    pricing_requests: Optional[Sequence[PricingRequest]] = None,
) -> OracleSolution:
    """Exact maximum served demand by depth-first search over all assignments.

    Each request is either rejected or given a (simple path, starting slot);
    conflicts are tracked with a (link, slot) bitmask. With pricing_requests
    given (derived-request mode) an extra mask keeps member atomics disjoint.
    """
    if pricing_requests is None:
        pricing_requests = [PricingRequest.from_request(r) for r in instance.requests]
    _check_limits(instance, limits, len(pricing_requests))
    demands = {r.id: r.demand for r in instance.requests}
    spectrum = instance.spectrum_slots
    atom_bit = {k: 1 << i for i, k in enumerate(sorted(demands))}

    entries = []
    for p in sorted(pricing_requests, key=lambda p: (-sum(demands[k] for k in p.members), p.key)):
        value = sum(demands[k] for k in p.members)
        amask = 0
        for k in p.members:
            amask |= atom_bit[k]
        options = []
        for path in enumerate_simple_paths(instance.topology, p.source, p.dest, limits.max_hops):
            for s in range(1, spectrum - p.width + 2):
                mask = 0
                for link in path.links:
                    for slot in range(s, s + p.width):
                        mask |= 1 << (link * spectrum + slot - 1)
                options.append((path, s, mask))
        entries.append((p.key, value, amask, options))

    suffix = [0] * (len(entries) + 1)
    for i in range(len(entries) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + entries[i][1]

    best_value = 0
    best_assign: dict[int, tuple[Path, int]] = {}
    chosen: list[tuple[int, Path, int]] = []

    def dfs(i: int, cells: int, atoms: int, acc: int) -> None:
        nonlocal best_value, best_assign
        if acc > best_value:
            best_value = acc
            best_assign = {key: (path, s) for key, path, s in chosen}
        if i == len(entries) or acc + suffix[i] <= best_value:
            return
        key, value, amask, options = entries[i]
        if not (amask & atoms):
            for path, s, mask in options:
                if mask & cells:
                    continue
                chosen.append((key, path, s))
                dfs(i + 1, cells | mask, atoms | amask, acc + value)
                chosen.pop()
        dfs(i + 1, cells, atoms, acc)

    dfs(0, 0, 0, 0)
    return OracleSolution(value_slots=best_value, assignments=best_assign)


def oracle_max_reduced_cost(
    instance: Instance,
    s: int,
    master_duals: MasterDuals,
    limits: OracleLimits = OracleLimits(),
) -> float:
    """Exact best configuration reduced cost for slot s by full enumeration.

    Duals are clamped at zero exactly like the pricing path, so the bound
    ordering rc_ilp <= this <= rc_lp_star is comparable term by term.
    """
    _check_limits(instance, limits, len(instance.requests))
    duals = master_duals.clamped()
    entries = []
    for req in sorted(instance.requests, key=lambda r: r.id):
        if s + req.demand - 1 > instance.spectrum_slots:
            continue
        mu = duals.mu_request.get(req.id, 0.0)
        if mu <= 0.0:
            continue
        weights = duals.mu_cell[:, s - 1 : s - 1 + req.demand].sum(axis=1)
        options = []
        for path in enumerate_simple_paths(instance.topology, req.source, req.dest, limits.max_hops):
            value = mu - float(sum(weights[link] for link in path.links))
            if value <= 0.0:
                continue
            lmask = 0
            for link in path.links:
                lmask |= 1 << link
            options.append((value, lmask))
        if options:
            best = max(v for v, _ in options)
            entries.append((best, options))

    entries.sort(key=lambda e: -e[0])
    suffix = [0.0] * (len(entries) + 1)
    for i in range(len(entries) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + entries[i][0]

    best_total = 0.0

    def dfs(i: int, links: int, acc: float) -> None:
        nonlocal best_total
        if acc > best_total:
            best_total = acc
        if i == len(entries) or acc + suffix[i] <= best_total:
            return
        _, options = entries[i]
        for value, lmask in options:
            if lmask & links:
                continue
            dfs(i + 1, links | lmask, acc + value)
        dfs(i + 1, links, acc)

    dfs(0, 0, 0.0)
    return best_total


def verify_plan(
    instance: Instance,
    plan: ProvisioningPlan,
    expected_slots: Optional[float] = None,
) -> None:
    """Independent feasibility scan of a provisioning plan.

    Recomputes every occupied (link, slot) cell from the raw paths and
    windows; raises on any conflict, out-of-spectrum window, broken path, or
    throughput mismatch.
    """
    requests = {r.id: r for r in instance.requests}
    cells: dict[tuple[int, int], tuple] = {}
    for k, lp in plan.assignments.items():
        req = requests.get(k)
        if req is None:
            raise InvariantViolation(f"plan grants unknown request {k}")
        if k not in lp.members:
            raise InvariantViolation(f"lightpath for request {k} does not list it as member")
        if lp.start_slot < 1 or lp.start_slot + lp.width - 1 > instance.spectrum_slots:
            raise InvariantViolation(
                f"request {k}: window [{lp.start_slot}, {lp.start_slot + lp.width - 1}] "
                f"outside spectrum 1..{instance.spectrum_slots}"
            )
        instance.topology.validate_path(lp.path)
        if {lp.path.source, lp.path.dest} != {req.source, req.dest}:
            raise InvariantViolation(
                f"request {k}: path connects ({lp.path.source}, {lp.path.dest}), "
                f"request wants ({req.source}, {req.dest})"
            )
        ident = (lp.request_key, lp.path.links, lp.start_slot, lp.width)
        for link in lp.path.links:
            for slot in range(lp.start_slot, lp.start_slot + lp.width):
                cell = (link, slot)
                if cell in cells and cells[cell] != ident:
                    raise ConflictDetected(f"cell {cell} occupied twice")
                cells[cell] = ident
    total = sum(requests[k].demand for k in plan.assignments)
    if total != plan.throughput_slots:
        raise InvariantViolation(
            f"plan claims {plan.throughput_slots} slots, assignments sum to {total}"
        )
    if expected_slots is not None and abs(total - expected_slots) > 1e-6:
        raise InvariantViolation(
            f"plan throughput {total} differs from solver value {expected_slots}"
        )
