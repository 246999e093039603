import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Optional

from core.exceptions import ValidationError
from core.models import Instance, Network
from core.utils.topo import build_line_graph, neighborhood
from ots.formulation import builders
from ots.formulation.bounds import NO_CAP, Bounds, RelaxationSpec
from ots.milp import backend
from ots.milp.model import SolveControls
from ots.tighten.config import Mode, Propagation, Solution, TightenConfig, TightenReport
from ots.tighten.services.base_service import BaseService
from ots.tighten.services.bounding import BoundingService, TighteningState
from ots.tighten.services.heuristic import HeuristicService


logger = logging.getLogger(__name__)

ZERO_COST = 1e-9


def percent_gap(cost: Optional[float], bound: Optional[float]) -> Optional[float]:
    """Relative gap in percent between an incumbent cost and a lower bound."""
    if cost is None or bound is None:
        return None
    if not math.isfinite(bound):
        return math.inf
    diff = max(0.0, cost - bound)
    if abs(cost) < ZERO_COST:
        return 0.0 if diff < ZERO_COST else math.inf
    return 100.0 * diff / abs(cost)


class TighteningPipeline(BaseService):
    """Initial bounds, cost cap, one or more bounding passes over all lines.

    Lines are processed in ascending id. In sequential propagation every update
    and every fixing is visible to the lines after it; in batch propagation all
    lines of a pass start from the same snapshot and their updates merge once
    the pass is over.
    """

    def __init__(self, cfg: TightenConfig) -> None:
        super().__init__()
        self.cfg = cfg
        self.heuristic = HeuristicService()
        self.bounding = BoundingService(cfg.problem_controls(), cfg.improvement_epsilon)

    def relaxation_for(self, line_graph, line_id: int, net: Network, fixed) -> RelaxationSpec:
        if self.cfg.mode is Mode.TBT:
            return RelaxationSpec.around(neighborhood(line_graph, line_id, self.cfg.k), fixed)
        return RelaxationSpec.all_binary(net, fixed)

    def _sequential_pass(self, net, inst, bounds, cap, fixed, line_graph, logs):
        for line_id in sorted(net.line_ids):
            state = TighteningState(net, inst, bounds, cap, dict(fixed))
            update = self.bounding.tighten_line(state, line_id, self.relaxation_for(line_graph, line_id, net, fixed))
            bounds = bounds.updated(line_id, **vars(update.bounds))
            if update.fixed is not None:
                fixed[line_id] = update.fixed
            logs.extend(update.logs)
        return bounds

    def _batch_pass(self, net, inst, bounds, cap, fixed, line_graph, logs):
        state = TighteningState(net, inst, bounds, cap, dict(fixed))

        def work(line_id):
            return self.bounding.tighten_line(state, line_id, self.relaxation_for(line_graph, line_id, net, fixed))

        with ThreadPoolExecutor(max_workers=self.cfg.jobs) as pool:
            updates = list(pool.map(work, sorted(net.line_ids)))

        lines = dict(bounds.lines)
        for update in updates:
            old = lines[update.line]
            lines[update.line] = replace(
                old,
                f_lo=max(old.f_lo, update.bounds.f_lo), f_hi=min(old.f_hi, update.bounds.f_hi),
                m_lo=max(old.m_lo, update.bounds.m_lo), m_hi=min(old.m_hi, update.bounds.m_hi),
            )
            if update.fixed is not None:
                fixed[update.line] = update.fixed
            logs.extend(update.logs)
        return Bounds(lines)

    def run(self, net: Network, inst: Instance) -> TightenReport:
        """Run the tightening procedure.

        Returns:
            TightenReport: Initial and final bounds, cap, fixings, times and logs.
        """
        self.logger.info('event=tighten-start network=%s instance=%d approach=%s propagation=%s passes=%d '
                         'problem_limit=%g heuristic_budget=%g', net.name, inst.index, self.cfg.label,
                         self.cfg.propagation.value, self.cfg.passes, self.cfg.per_problem_time_limit,
                         self.cfg.heuristic_budget)
        started = time.perf_counter()
        bounds0 = self.heuristic.initial_bounds(net)

        with self.phase('heuristic', instance=inst.index) as timer:
            cap = self.heuristic.upper_bound_cost(net, inst, self.cfg.heuristic_budget,
                                                  self.cfg.heuristic_controls(), bounds0)
        t_heuristic = timer['elapsed']

        line_graph = build_line_graph(net) if self.cfg.mode is Mode.TBT else None
        bounds, fixed, logs = bounds0, {}, []
        run_pass = self._sequential_pass if self.cfg.propagation is Propagation.SEQUENTIAL else self._batch_pass
        with self.phase('bounding', instance=inst.index, approach=self.cfg.label):
            for _ in range(self.cfg.passes):
                bounds = run_pass(net, inst, bounds, cap, fixed, line_graph, logs)
        bounds.validate(net)

        return TightenReport(
            network=net.name,
            instance=inst.index,
            approach=self.cfg.label,
            bounds0=bounds0,
            bounds=bounds,
            cap=cap,
            fixed_lines=dict(sorted(fixed.items())),
            t_bound=time.perf_counter() - started,
            t_heuristic=t_heuristic,
            per_line_log=logs,
        )


def initial_bounds(net: Network) -> Bounds:
    return HeuristicService().initial_bounds(net)


def upper_bound_cost(net: Network, inst: Instance, budget: float, controls: SolveControls = None):
    return HeuristicService().upper_bound_cost(net, inst, budget, controls)


def run_tbt(net: Network, inst: Instance, cfg: TightenConfig) -> TightenReport:
    if cfg.mode is not Mode.TBT:
        raise ValidationError(f'run_tbt needs a tbt configuration, got {cfg.mode.value}.')
    return TighteningPipeline(cfg).run(net, inst)


def run_sbt(net: Network, inst: Instance, cfg: TightenConfig) -> TightenReport:
    if cfg.mode is not Mode.SBT:
        raise ValidationError(f'run_sbt needs an sbt configuration, got {cfg.mode.value}.')
    return TighteningPipeline(cfg).run(net, inst)


def run_tightening(net: Network, inst: Instance, cfg: TightenConfig) -> TightenReport:
    return run_tbt(net, inst, cfg) if cfg.mode is Mode.TBT else run_sbt(net, inst, cfg)


def baseline_report(net: Network, inst: Instance) -> TightenReport:
    """Report of the untightened model: initial bounds, no cap, no fixings, no bounding time."""
    bounds0 = initial_bounds(net)
    return TightenReport(net.name, inst.index, 'MIP', bounds0, bounds0, NO_CAP)


def solve_ots(net: Network, inst: Instance, report: TightenReport, controls: SolveControls,
              dump_model: str = None) -> Solution:
    """Solve the switching model with the report's bounds and fixings.

    All statuses are binary and no cost cap is added.

    Args:
        net (Network): The grid.
        inst (Instance): Demand realization.
        report (TightenReport): Source of bounds and pinned statuses.
        controls (SolveControls): Time limit, gap and threads.
        dump_model (str): Optional LP file path for the final model.

    Returns:
        Solution: Status, incumbent topology, cost, gap and solve time.
    """
    report.bounds.validate(net)
    model = builders.build_ots(net, inst, report.bounds, RelaxationSpec.all_binary(net, report.fixed_lines))
    if dump_model:
        backend.get_backend().export(model, dump_model)

    outcome = backend.solve(model, controls)
    x, flows, dispatch = {}, {}, {}
    cost = None
    if outcome.has_primal:
        cost = outcome.objective
        x = {l: int(round(outcome.value(builders.x(l)))) for l in net.line_ids}
        flows = {l: outcome.value(builders.f(l)) for l in net.line_ids}
        dispatch = {n: outcome.value(builders.p(n)) for n in net.bus_ids}

    solution = Solution(
        status=outcome.status.value,
        cost=cost,
        dual_bound=outcome.dual_bound,
        x=x,
        flows=flows,
        dispatch=dispatch,
        gap=percent_gap(cost, outcome.dual_bound),
        t_opt=outcome.runtime,
    )
    logger.info('phase=solve elapsed=%.4f instance=%d approach=%s status=%s cost=%s',
                outcome.runtime, inst.index, report.approach, solution.status, cost)
    return solution
