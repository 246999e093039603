import math
from typing import Dict, Optional, Tuple

from core.exceptions import MissingBounds, NoIncumbent, ZeroWidth
from core.models import Instance, Network
from ots.formulation.bounds import Bounds
from ots.formulation.builders import build_dcopf_fixed
from ots.milp import backend
from ots.milp.model import SolveControls, SolveStatus
from ots.tighten.services.pipeline import ZERO_COST, percent_gap


def compute_bound_metrics(bounds0: Bounds, bounds: Bounds) -> Tuple[float, float]:
    """Average percent reduction of the flow and big-M bound widths.

    Returns:
        tuple: ``(dF, dM)`` in percent.

    Raises:
        MissingBounds: The two bound sets cover different lines.
        ZeroWidth: An initial width is not positive.
    """
    if set(bounds0.lines) != set(bounds.lines):
        raise MissingBounds('bound sets cover different lines.')
    if not bounds0.lines:
        return 0.0, 0.0

    df = dm = 0.0
    for line_id in bounds0:
        before, after = bounds0[line_id], bounds[line_id]
        if before.f_width <= 0 or before.m_width <= 0:
            raise ZeroWidth(f'line {line_id}: initial bound width is zero.')
        df += 1.0 - after.f_width / before.f_width
        dm += 1.0 - after.m_width / before.m_width
    n = len(bounds0)
    return 100.0 * df / n, 100.0 * dm / n


def relative_pct(value: float, reference: float) -> float:
    diff = value - reference
    if abs(reference) < ZERO_COST:
        return 0.0 if abs(diff) < ZERO_COST else math.inf
    return 100.0 * diff / abs(reference)


def compute_solution_metrics(cost: Optional[float], dual_bound: Optional[float], best_cost: Optional[float],
                             refit_cost: Optional[float]) -> Tuple[Optional[float], Optional[float], Optional[float]]:
    """Gap, suboptimality and refit discrepancy, all in percent.

    Args:
        cost (float): Incumbent cost of the method.
        dual_bound (float): Proven lower bound of the method's solve.
        best_cost (float): Lowest cost any approach reached on the instance.
        refit_cost (float): DC power flow cost at the incumbent topology.

    Returns:
        tuple: ``(gap, sub, dif)``; ``sub`` and ``dif`` are None when their
            reference is missing.

    Raises:
        NoIncumbent: ``cost`` is None.
    """
    if cost is None:
        raise NoIncumbent('no incumbent: gap, sub and dif are undefined.')
    gap = percent_gap(cost, dual_bound)
    sub = max(0.0, relative_pct(cost, best_cost)) if best_cost is not None else None
    dif = abs(relative_pct(cost, refit_cost)) if refit_cost is not None else None
    return gap, sub, dif


def refit_cost(net: Network, inst: Instance, x: Dict[int, int], controls: SolveControls) -> Optional[float]:
    """DC power flow cost with the statuses of ``x``; None when infeasible."""
    outcome = backend.solve(build_dcopf_fixed(net, inst, x), controls)
    return outcome.objective if outcome.status is SolveStatus.OPTIMAL else None
