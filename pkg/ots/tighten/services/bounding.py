import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from core.exceptions import BackendError
from core.models import Instance, Network
from ots.formulation.bounds import Bounds, CostCap, LineBounds, RelaxationSpec
from ots.formulation.builders import Target, build_bounding
from ots.milp.model import Sense, SolveControls, SolveOutcome, SolveStatus
from ots.tighten.config import Action, SubproblemLog
from ots.tighten.services.base_service import BaseService


# Fixed order of the four problems of a line, with the bound each one updates.
PROBLEMS = (
    (Target.FLOW, Sense.MIN, 'f_lo'),
    (Target.FLOW, Sense.MAX, 'f_hi'),
    (Target.DUMMY, Sense.MIN, 'm_lo'),
    (Target.DUMMY, Sense.MAX, 'm_hi'),
)


@dataclass(frozen=True)
class TighteningState:
    net: Network
    inst: Instance
    bounds: Bounds
    cap: CostCap
    fixed: Dict[int, int] = field(default_factory=dict)


@dataclass
class LineUpdate:
    """Result of bounding one line.

    Attributes:
        line (int): The line id.
        bounds (LineBounds): New bounds; never wider than the input bounds.
        fixed (int): Status pinned by infeasibility detection, or None.
        logs (list): One ``SubproblemLog`` per problem.
    """
    line: int
    bounds: LineBounds
    fixed: Optional[int] = None
    logs: List[SubproblemLog] = field(default_factory=list)


def candidate_bound(outcome: SolveOutcome) -> Optional[float]:
    """Valid bound from an outcome.

    The primal optimum of an exactly solved problem, otherwise the proven
    dual bound. Infinite or missing values give None.
    """
    if outcome.status is SolveStatus.OPTIMAL:
        value = outcome.objective
    elif outcome.status.at_limit:
        value = outcome.dual_bound
    else:
        return None
    if value is None or not math.isfinite(value):
        return None
    return value


class BoundingService(BaseService):
    """Per-line bounding problems.

    Each line gets four problems: min and max of its flow with the line closed,
    min and max of its dummy flow with the line open. A problem only ever
    shrinks the bound it targets.
    """

    def __init__(self, controls: SolveControls, improvement_epsilon: float = 1e-6) -> None:
        super().__init__()
        self.controls = controls
        self.improvement_epsilon = improvement_epsilon

    def clamp(self, current: LineBounds, attr: str, sense: Sense, candidate: float):
        """Apply a candidate bound monotonically.

        Returns:
            tuple: ``(value, improved)``; ``value`` is the current bound when the
                candidate widens it or improves it by less than the epsilon.
        """
        previous = getattr(current, attr)
        if sense is Sense.MIN:
            upper = current.f_hi if attr == 'f_lo' else current.m_hi
            if candidate > previous + self.improvement_epsilon:
                return min(candidate, upper), True
        else:
            lower = current.f_lo if attr == 'f_hi' else current.m_lo
            if candidate < previous - self.improvement_epsilon:
                return max(candidate, lower), True
        return previous, False

    def tighten_line(self, state: TighteningState, line_id: int, relax: RelaxationSpec) -> LineUpdate:
        """Solve the four bounding problems of a line.

        Args:
            state (TighteningState): Network, instance, current bounds, cap and
                statuses pinned so far.
            line_id (int): The line.
            relax (RelaxationSpec): Binary statuses of this line's problems.

        Returns:
            LineUpdate: New bounds, an optional fixing and the problem logs.

        Raises:
            BackendError: The solver failed, with the line in the message.
        """
        current = state.bounds[line_id]
        values = {attr: getattr(current, attr) for _, _, attr in PROBLEMS}
        pinned = {**relax.fixed, **state.fixed}
        relax = RelaxationSpec(relax.binary_lines, pinned)
        own_status = pinned.get(line_id)

        infeasible = {Target.FLOW: False, Target.DUMMY: False}
        logs = []
        for target, sense, attr in PROBLEMS:
            if own_status is not None and own_status != target.side_status:
                logs.append(SubproblemLog(line_id, target.value, sense.value, None, None, None, 0.0,
                                          Action.SKIPPED_FIXED))
                continue
            if infeasible[target]:
                logs.append(SubproblemLog(line_id, target.value, sense.value, SolveStatus.INFEASIBLE.value,
                                          None, None, 0.0, Action.INFEASIBLE))
                continue

            model = build_bounding(state.net, state.inst, state.bounds, line_id, target, sense, relax, state.cap)
            try:
                outcome = self.solve(model, self.controls)
            except BackendError as e:
                raise BackendError(f'line {line_id} ({target.value}, {sense.value}): {e}') from e

            if outcome.status is SolveStatus.INFEASIBLE:
                infeasible[target] = True
                action = Action.INFEASIBLE
            else:
                candidate = candidate_bound(outcome)
                if candidate is None:
                    action = Action.NO_BOUND
                else:
                    values[attr], improved = self.clamp(LineBounds(**values), attr, sense, candidate)
                    action = Action.TIGHTENED if improved else Action.NO_IMPROVEMENT

            logs.append(SubproblemLog(line_id, target.value, sense.value, outcome.status.value, outcome.objective,
                                      outcome.dual_bound, outcome.runtime, action))

        fixed = None
        if infeasible[Target.FLOW] and infeasible[Target.DUMMY]:
            self.logger.warning('event=both-sides-infeasible line=%d cap=%s', line_id, state.cap.cap)
        elif infeasible[Target.FLOW]:
            fixed = 0
        elif infeasible[Target.DUMMY]:
            fixed = 1
        if fixed is not None:
            self.logger.info('event=line-fixed line=%d status=%d', line_id, fixed)

        return LineUpdate(line_id, LineBounds(**values), fixed, logs)
