"""Restricted master problem over configuration columns.

Model (maximization): a [0,1] grant variable y_k per request weighted by its
demand, coverage rows ``y_k - sum_c a_k^c z_c <= 0``, and slot-occupancy rows
``sum_c b_{ls}^c z_c <= 1`` per (link, slot). Configuration columns carry no
objective weight of their own; the objective rides entirely on y.

Slots are 1-based everywhere. z columns are added with bounds [0, inf): any
real configuration occupies at least one (link, slot) cell, so the occupancy
rows already cap z at 1 and the explicit upper bound would only create
nonbasic-at-upper columns that pricing could regenerate. The final ILP makes
them binary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConflictDetected, InvalidConfiguration
from .instance import Instance, Request
from .lpsolver import INT_TOL, Model, MipSolution, SolveStatus, VarKind
from .topology import Path


@dataclass(frozen=True)
class PricingRequest:
    """What pricing provisions: a demand window between two nodes.

    In the base model this is exactly one traffic request (`members` is the
    singleton of its id). The guard-band extension prices derived requests
    whose members are several same-pair atomic requests.
    """

    key: int
    source: str
    dest: str
    width: int
    members: tuple[int, ...]

    @staticmethod
    def from_request(req: Request) -> "PricingRequest":
        return PricingRequest(
            key=req.id, source=req.source, dest=req.dest, width=req.demand, members=(req.id,)
        )


@dataclass(frozen=True)
class Lightpath:
    """A routed demand window: path plus contiguous slots on every path link."""

    request_key: int
    path: Path
    start_slot: int
    width: int
    members: tuple[int, ...]

    def cells(self) -> list[tuple[int, int]]:
        """(link id, slot) pairs this lightpath occupies."""
        return [
            (link, s)
            for link in self.path.links
            for s in range(self.start_slot, self.start_slot + self.width)
        ]

    @property
    def end_slot(self) -> int:
        return self.start_slot + self.width - 1


@dataclass(frozen=True)
class Configuration:
    """Link-disjoint lightpaths for distinct requests, all at one starting slot."""

    start_slot: int
    lightpaths: tuple[Lightpath, ...]

    def served_atomics(self) -> frozenset[int]:
        return frozenset(k for lp in self.lightpaths for k in lp.members)

    def served_keys(self) -> frozenset[int]:
        return frozenset(lp.request_key for lp in self.lightpaths)

    def occupied_cells(self) -> frozenset[tuple[int, int]]:
        return frozenset(cell for lp in self.lightpaths for cell in lp.cells())

    def signature(self) -> tuple:
        return (
            self.start_slot,
            tuple(sorted((lp.request_key, lp.path.links) for lp in self.lightpaths)),
        )


def validate_configuration(
    config: Configuration,
    spectrum_slots: int,
    requests: Optional[dict[int, PricingRequest]] = None,
) -> None:
    """Raise InvalidConfiguration on any structural breach."""
    if not config.lightpaths:
        raise InvalidConfiguration("configuration has no lightpaths")
    seen_keys: set[int] = set()
    seen_members: set[int] = set()
    seen_links: set[int] = set()
    for lp in config.lightpaths:
        if lp.start_slot != config.start_slot:
            raise InvalidConfiguration(
                f"lightpath for {lp.request_key} starts at {lp.start_slot}, "
                f"configuration at {config.start_slot}"
            )
        if lp.start_slot < 1 or lp.end_slot > spectrum_slots:
            raise InvalidConfiguration(
                f"window [{lp.start_slot}, {lp.end_slot}] outside spectrum 1..{spectrum_slots}"
            )
        if lp.request_key in seen_keys:
            raise InvalidConfiguration(f"request {lp.request_key} appears twice")
        seen_keys.add(lp.request_key)
        for k in lp.members:
            if k in seen_members:
                raise InvalidConfiguration(f"atomic request {k} covered twice")
            seen_members.add(k)
        for link in lp.path.links:
            if link in seen_links:
                raise InvalidConfiguration(f"link {link} used by two lightpaths")
            seen_links.add(link)
        if requests is not None:
            req = requests.get(lp.request_key)
            if req is None:
                raise InvalidConfiguration(f"unknown request key {lp.request_key}")
            ends = {lp.path.source, lp.path.dest}
            if ends != {req.source, req.dest}:
                raise InvalidConfiguration(
                    f"path endpoints {ends} do not match request ({req.source}, {req.dest})"
                )
            if lp.width != req.width:
                raise InvalidConfiguration(
                    f"window width {lp.width} != request width {req.width}"
                )


@dataclass(eq=False)
class MasterDuals:
    """Dual snapshot: one value per request row, one per (link, slot) row.

    mu_cell is indexed [link, slot-1]. Values are exactly what the engine
    reported; negatives survive until clamped().
    """

    mu_request: dict[int, float]
    mu_cell: np.ndarray

    def clamped(self) -> "MasterDuals":
        return MasterDuals(
            mu_request={k: max(v, 0.0) for k, v in self.mu_request.items()},
            mu_cell=np.maximum(self.mu_cell, 0.0),
        )

    def shifted(self, delta: float) -> "MasterDuals":
        """Uniformly perturbed copy (test hook for solver-noise robustness)."""
        return MasterDuals(
            mu_request={k: v + delta for k, v in self.mu_request.items()},
            mu_cell=self.mu_cell + delta,
        )

    def window_sum(self, link: int, start_slot: int, width: int) -> float:
        return float(self.mu_cell[link, start_slot - 1 : start_slot - 1 + width].sum())


@dataclass(frozen=True)
class ProvisioningPlan:
    """Final per-request provisioning: each granted request gets one lightpath."""

    assignments: dict[int, Lightpath]  # atomic request id -> carrying lightpath
    throughput_slots: int
    slot_rate_gbps: float

    @property
    def throughput_gbps(self) -> float:
        return self.throughput_slots * self.slot_rate_gbps

    def distinct_lightpaths(self) -> list[Lightpath]:
        seen: dict[tuple, Lightpath] = {}
        for lp in self.assignments.values():
            seen.setdefault((lp.request_key, lp.path.links, lp.start_slot), lp)
        return list(seen.values())


class RestrictedMaster:
    """Mutable RMP state: build, grow by columns, prune, and finish with the ILP."""

    def __init__(
        self,
        instance: Instance,
        pricing_requests: Optional[Sequence[PricingRequest]] = None,
        backend: str = "bundled",
    ):
        self.instance = instance
        self.atomics: dict[int, Request] = {r.id: r for r in instance.requests}
        if pricing_requests is None:
            pricing_requests = [PricingRequest.from_request(r) for r in instance.requests]
        self.pricing_requests: dict[int, PricingRequest] = {p.key: p for p in pricing_requests}
        self.model = Model(backend)
        self._y: dict[int, int] = {}
        self._row_request: dict[int, int] = {}
        self._row_cell: dict[tuple[int, int], int] = {}
        self._columns: dict[int, Configuration] = {}
        self.prune_checks: list[tuple[float, float]] = []
        self._last_lp_value: Optional[float] = None

        for req in sorted(self.atomics.values(), key=lambda r: r.id):
            y = self.model.add_variable(obj=float(req.demand), lo=0.0, hi=1.0)
            self._y[req.id] = y
            self._row_request[req.id] = self.model.add_constraint({y: 1.0}, 0.0)
        links = instance.topology.num_links
        for link in range(links):
            for s in range(1, instance.spectrum_slots + 1):
                self._row_cell[(link, s)] = self.model.add_constraint({}, 1.0)

    # -- columns -----------------------------------------------------------

    @property
    def num_columns(self) -> int:
        return len(self._columns)

    def column_ids(self) -> list[int]:
        return sorted(self._columns)

    def configurations(self) -> list[Configuration]:
        return [self._columns[vid] for vid in sorted(self._columns)]

    def column_coefficients(self, vid: int) -> tuple[frozenset[int], frozenset[tuple[int, int]]]:
        """Stored coefficients of a column: (covered atomics, occupied cells)."""
        coeffs = self.model._vars[vid].coeffs
        row_to_request = {row: k for k, row in self._row_request.items()}
        row_to_cell = {row: cell for cell, row in self._row_cell.items()}
        atomics = frozenset(row_to_request[c] for c, v in coeffs.items() if v == -1.0)
        cells = frozenset(row_to_cell[c] for c, v in coeffs.items() if v == 1.0)
        return atomics, cells

    def add_column(self, config: Configuration) -> int:
        validate_configuration(config, self.instance.spectrum_slots, self.pricing_requests)
        for k in config.served_atomics():
            if k not in self.atomics:
                raise InvalidConfiguration(f"configuration serves unknown atomic request {k}")
        coeffs: dict[int, float] = {}
        for k in config.served_atomics():
            coeffs[self._row_request[k]] = -1.0
        for cell in config.occupied_cells():
            row = self._row_cell.get(cell)
            if row is None:
                raise InvalidConfiguration(f"cell {cell} outside the master grid")
            coeffs[row] = 1.0
        vid = self.model.add_variable(obj=0.0, lo=0.0, hi=math.inf, coeffs=coeffs)
        self._columns[vid] = config
        return vid

    # -- LP phase ------------------------------------------------------------

    def solve_lp_and_prune(self) -> tuple[float, MasterDuals]:
        """Solve the LP, drop nonbasic zero columns, and re-verify the value.

        The post-prune re-solve starts from the retained basis, so it is cheap
        and doubles as the prune-invariance check.
        """
        sol = self._solve_lp_checked()
        self._prune(sol)
        sol2 = self._solve_lp_checked()
        self.prune_checks.append((sol.objective, sol2.objective))
        if abs(sol.objective - sol2.objective) > 1e-6 * (1.0 + abs(sol.objective)):
            raise RuntimeError(
                f"pruning changed the LP value: {sol.objective} -> {sol2.objective}"
            )
        self._last_lp_value = sol2.objective
        return sol2.objective, self._duals_from(sol2)

    def _solve_lp_checked(self):
        sol = self.model.solve_lp(use_warm_start=True)
        if sol.status is not SolveStatus.OPTIMAL:
            raise RuntimeError(f"master LP solve failed: {sol.status}")
        return sol

    def _prune(self, sol) -> None:
        drop = []
        for vid in self._columns:
            if sol.values.get(vid, 0.0) > INT_TOL:
                continue
            if sol.basic_variables is not None:
                if vid in sol.basic_variables:
                    continue
            elif sol.reduced_costs is not None and abs(sol.reduced_costs.get(vid, 0.0)) <= 1e-7:
                continue  # degenerate-optimal column; backend hides the basis
            drop.append(vid)
        if drop:
            self.model.remove_variables(drop)
            for vid in drop:
                del self._columns[vid]

    def _duals_from(self, sol) -> MasterDuals:
        mu_request = {k: sol.duals[row] for k, row in self._row_request.items()}
        links = self.instance.topology.num_links
        mu_cell = np.zeros((links, self.instance.spectrum_slots))
        for (link, s), row in self._row_cell.items():
            mu_cell[link, s - 1] = sol.duals[row]
        return MasterDuals(mu_request=mu_request, mu_cell=mu_cell)

    # -- final ILP ------------------------------------------------------------

    def solve_final_ilp(
        self,
        relative_gap: float,
        use_warm_basis: bool = False,
        deadline: Optional[float] = None,
    ) -> tuple[float, list[Configuration], MipSolution]:
        """Restrict columns to {0,1} and solve; y integrality must emerge."""
        for vid in self._columns:
            self.model.set_kind(vid, VarKind.BINARY)
        mip = self.model.solve_mip(
            relative_gap, use_warm_start=use_warm_basis, deadline=deadline
        )
        if mip.status in (SolveStatus.INFEASIBLE, SolveStatus.NUMERICAL_FAILURE):
            raise RuntimeError(f"final ILP failed: {mip.status}")
        if not mip.values:  # timed out before any incumbent
            return 0.0, [], mip
        for k, y in self._y.items():
            yv = mip.values[y]
            if min(yv, 1.0 - yv) > INT_TOL:
                raise RuntimeError(f"y for request {k} is fractional in the incumbent: {yv}")
        if self._last_lp_value is not None:
            scale = 1.0 + abs(self._last_lp_value)
            if mip.objective > self._last_lp_value + 1e-6 * scale:
                raise RuntimeError(
                    f"ILP incumbent {mip.objective} exceeds LP bound {self._last_lp_value}"
                )
        selected = [
            self._columns[vid]
            for vid in sorted(self._columns)
            if mip.values.get(vid, 0.0) > 0.5
        ]
        return mip.objective, selected, mip

    # -- post-processing ---------------------------------------------------

    def post_process(self, selected: Iterable[Configuration]) -> ProvisioningPlan:
        """Collapse multiple grants per request down to a single lightpath.

        Preference order: a lightpath already kept for another member, then
        fewest hops, smallest starting slot, lexicographically smallest link
        sequence. Dropped duplicates free their cells entirely.
        """
        covering: dict[int, list[Lightpath]] = {}
        for config in selected:
            for lp in config.lightpaths:
                for k in lp.members:
                    covering.setdefault(k, []).append(lp)

        def rank(lp: Lightpath) -> tuple:
            return (lp.path.hops, lp.start_slot, lp.path.links)

        assignments: dict[int, Lightpath] = {}
        kept: set[tuple] = set()
        for k in sorted(covering):
            options = covering[k]
            already = [lp for lp in options if _lp_key(lp) in kept]
            chosen = min(already, key=rank) if already else min(options, key=rank)
            kept.add(_lp_key(chosen))
            assignments[k] = chosen

        used: dict[tuple[int, int], tuple] = {}
        for lp_id, lp in {_lp_key(lp): lp for lp in assignments.values()}.items():
            for cell in lp.cells():
                if cell in used and used[cell] != lp_id:
                    raise ConflictDetected(f"cell {cell} used twice in the final plan")
                used[cell] = lp_id
        throughput = sum(self.atomics[k].demand for k in assignments)
        return ProvisioningPlan(
            assignments=assignments,
            throughput_slots=throughput,
            slot_rate_gbps=self.instance.slot_rate_gbps,
        )


def _lp_key(lp: Lightpath) -> tuple:
    return (lp.request_key, lp.path.links, lp.start_slot, lp.width)
