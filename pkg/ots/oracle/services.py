"""Brute-force ground truth over all line topologies."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple

from django.conf import settings

from core.exceptions import BackendError, InfeasibleEverywhere, TooLarge
from core.models import Instance, Network
from ots.formulation import builders
from ots.formulation.bounds import NO_CAP, Bounds, CostCap, RelaxationSpec
from ots.milp.model import SolveControls, SolveOutcome, SolveStatus
from ots.tighten.services.base_service import BaseService


TIE_TOL = 1e-9
COST_TOL = 1e-6
FLOW_TOL = 1e-6


@dataclass(frozen=True)
class OracleResult:
    cost: float
    x_opt: Dict[int, int]
    flows: Dict[int, float]
    n_feasible: int
    n_topologies: int


@dataclass(frozen=True)
class BoundsViolation:
    """A topology within the cost cap that the bounds cut off or make costlier.

    Attributes:
        x (dict): Line id -> status of the topology.
        line (int): A line whose DC flow or angle gap leaves its bounds, or None
            when no single line explains the violation.
        reason (str): ``excluded`` (infeasible under the bounds) or ``cost-raised``.
        oracle_cost (float): DC power flow cost of the topology.
        model_cost (float): Cost under the bounds, None when excluded.
    """
    x: Dict[int, int]
    line: Optional[int]
    reason: str
    oracle_cost: float
    model_cost: Optional[float]


def gray_code(n: int) -> Iterator[Tuple[int, ...]]:
    """All 0/1 vectors of length ``n``, consecutive ones differing in one entry."""
    for i in range(2 ** n):
        g = i ^ (i >> 1)
        yield tuple((g >> j) & 1 for j in range(n))


def is_better(cost: float, x: Tuple[int, ...], best_cost: Optional[float], best_x: Optional[Tuple[int, ...]]) -> bool:
    """Lower cost wins; costs equal within tolerance prefer the lexicographically larger x."""
    if best_cost is None:
        return True
    tol = TIE_TOL * max(1.0, abs(best_cost))
    if cost < best_cost - tol:
        return True
    return abs(cost - best_cost) <= tol and x > best_x


class OracleService(BaseService):
    """Enumerates every topology and solves its DC optimal power flow.

    Attributes:
        max_lines (int): Largest line count accepted for enumeration.
        jobs (int): Worker threads; the reduction is order independent.
    """

    def __init__(self, max_lines: int = None, jobs: int = 1) -> None:
        super().__init__()
        self.max_lines = settings.OTS_ORACLE_MAX_LINES if max_lines is None else max_lines
        self.jobs = jobs
        self.controls = SolveControls(time_limit=settings.OTS_TIME_LIMIT, rel_gap=0.0, threads=1)

    def check_size(self, net: Network) -> None:
        if len(net.lines) > self.max_lines:
            raise TooLarge(f'network {net.name}: {len(net.lines)} lines exceed the enumeration cap '
                           f'of {self.max_lines}.')

    def solve_topology(self, net: Network, inst: Instance, x: Tuple[int, ...]) -> SolveOutcome:
        outcome = self.solve(builders.build_dcopf_fixed(net, inst, x), self.controls)
        if outcome.status not in (SolveStatus.OPTIMAL, SolveStatus.INFEASIBLE):
            raise BackendError(f'topology {x}: DC power flow ended with {outcome.status.value}.')
        return outcome

    def topologies(self, net: Network, inst: Instance):
        """Yield ``(x, outcome)`` for every topology in Gray-code order."""
        vectors = list(gray_code(len(net.lines)))
        if self.jobs > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                yield from zip(vectors, pool.map(lambda x: self.solve_topology(net, inst, x), vectors))
        else:
            for x in vectors:
                yield x, self.solve_topology(net, inst, x)

    def brute_force(self, net: Network, inst: Instance) -> OracleResult:
        """Exact optimum over all topologies.

        Args:
            net (Network): The grid.
            inst (Instance): Demand realization.

        Returns:
            OracleResult: Optimal cost, topology and flows, and the number of
                feasible topologies.

        Raises:
            TooLarge: The network has more lines than ``max_lines``.
            InfeasibleEverywhere: No topology admits a feasible dispatch.
        """
        self.check_size(net)
        inst.validate_for(net, adequacy=False)
        if inst.total_demand > net.total_capacity + TIE_TOL:
            raise InfeasibleEverywhere(f'instance {inst.index}: demand exceeds total capacity in every topology.')

        best_cost = best_x = best_outcome = None
        n_feasible = n_topologies = 0
        with self.phase('oracle', network=net.name, instance=inst.index, lines=len(net.lines)):
            for x, outcome in self.topologies(net, inst):
                n_topologies += 1
                if outcome.status is not SolveStatus.OPTIMAL:
                    continue
                n_feasible += 1
                if is_better(outcome.objective, x, best_cost, best_x):
                    best_cost, best_x, best_outcome = outcome.objective, x, outcome

        if best_x is None:
            raise InfeasibleEverywhere(f'instance {inst.index}: no feasible topology on {net.name}.')
        return OracleResult(
            cost=best_cost,
            x_opt=dict(zip(net.line_ids, best_x)),
            flows={l: best_outcome.value(builders.f(l)) for l in net.line_ids},
            n_feasible=n_feasible,
            n_topologies=n_topologies,
        )

    def diagnose(self, net: Network, bounds: Bounds, status: Dict[int, int], outcome: SolveOutcome) -> Optional[int]:
        """First line whose DC flow (closed) or angle gap (open) leaves its bounds."""
        for line in net.lines:
            b = bounds[line.id]
            if status[line.id]:
                value, lo, hi = outcome.value(builders.f(line.id)), b.f_lo, b.f_hi
            else:
                gap = outcome.value(builders.theta(line.from_bus)) - outcome.value(builders.theta(line.to_bus))
                value, lo, hi = line.susceptance * gap, b.m_lo, b.m_hi
            if value < lo - FLOW_TOL or value > hi + FLOW_TOL:
                return line.id
        return None

    def verify_bounds(self, net: Network, inst: Instance, bounds: Bounds, cap: CostCap = NO_CAP):
        """Check that no topology within the cap is cut off by the bounds.

        Each topology whose DC power flow cost is at most the cap must keep that
        cost in the big-M model with its statuses fixed.

        Returns:
            BoundsViolation: The first violation, or None when the bounds are valid.

        Raises:
            TooLarge: The network has more lines than ``max_lines``.
        """
        self.check_size(net)
        bounds.covers(net)
        with self.phase('verify', network=net.name, instance=inst.index):
            for x, outcome in self.topologies(net, inst):
                if outcome.status is not SolveStatus.OPTIMAL:
                    continue
                cost = outcome.objective
                if cap.present and cost > cap.cap + COST_TOL * max(1.0, abs(cap.cap)):
                    continue

                status = dict(zip(net.line_ids, x))
                model = builders.build_ots(net, inst, bounds, RelaxationSpec.all_binary(net, status))
                fixed = self.solve(model, self.controls)
                if fixed.status is not SolveStatus.OPTIMAL:
                    violation = BoundsViolation(status, self.diagnose(net, bounds, status, outcome), 'excluded',
                                                cost, None)
                elif fixed.objective > cost + COST_TOL * max(1.0, abs(cost)):
                    violation = BoundsViolation(status, self.diagnose(net, bounds, status, outcome), 'cost-raised',
                                                cost, fixed.objective)
                else:
                    continue
                self.logger.warning('event=bounds-violation instance=%d x=%s line=%s reason=%s',
                                    inst.index, x, violation.line, violation.reason)
                return violation
        return None


def brute_force(net: Network, inst: Instance, max_lines: int = None) -> OracleResult:
    return OracleService(max_lines).brute_force(net, inst)


def verify_bounds(net: Network, inst: Instance, bounds: Bounds, cap: CostCap = NO_CAP,
                  max_lines: int = None) -> Optional[BoundsViolation]:
    return OracleService(max_lines).verify_bounds(net, inst, bounds, cap)
