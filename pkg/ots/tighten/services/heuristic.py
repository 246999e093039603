from core.exceptions import HeuristicError
from core.models import Instance, Network
from ots.formulation.bounds import Bounds, CostCap, LineBounds, RelaxationSpec
from ots.formulation.builders import build_ots
from ots.milp.model import Emphasis, SolveControls
from ots.tighten.services.base_service import BaseService


class HeuristicService(BaseService):
    """Initial bounds and the cost cap.

    The cap comes from a time-limited solve of the switching model under the
    initial bounds with feasibility emphasis. When that solve finds no
    incumbent, the fallback is total demand times the most expensive cost.
    """

    def initial_bounds(self, net: Network) -> Bounds:
        """Thermal limits as flow bounds and the path surrogate as big-M bounds.

        ``M_hi[l] = b_l * sum(max(|f_min_j|, |f_max_j|) / b_j for j != l)`` and
        ``M_lo[l] = -M_hi[l]``: an open line's angle gap cannot exceed the sum of
        the largest angle drops of all other lines.

        Args:
            net (Network): The grid.

        Returns:
            Bounds: The initial bounds.
        """
        drops = {line.id: max(abs(line.f_min), abs(line.f_max)) / line.susceptance for line in net.lines}
        total = sum(drops.values())
        lines = {}
        for line in net.lines:
            m_hi = line.susceptance * (total - drops[line.id])
            lines[line.id] = LineBounds(f_lo=line.f_min, f_hi=line.f_max, m_lo=-m_hi, m_hi=m_hi)
        return Bounds(lines)

    def fallback_cap(self, net: Network, inst: Instance) -> float:
        if not net.buses:
            raise HeuristicError(f'network {net.name}: no buses, no fallback cost cap.')
        return inst.total_demand * max(bus.cost for bus in net.buses)

    def upper_bound_cost(self, net: Network, inst: Instance, budget: float, controls: SolveControls = None,
                         bounds: Bounds = None) -> CostCap:
        """Compute the cost cap.

        Args:
            net (Network): The grid.
            inst (Instance): Demand realization.
            budget (float): Seconds for the heuristic solve.
            controls (SolveControls): Optional controls; ``budget`` and the
                feasibility emphasis override theirs.
            bounds (Bounds): Bounds of the heuristic model, initial bounds by default.

        Returns:
            CostCap: Incumbent cost, or the fallback formula.

        Raises:
            HeuristicError: ``budget`` is not positive or no fallback exists.
        """
        if not budget > 0:
            raise HeuristicError(f'heuristic budget must be positive, got {budget}.')
        fallback = self.fallback_cap(net, inst)

        controls = SolveControls(
            time_limit=budget,
            rel_gap=controls.rel_gap if controls else 1e-4,
            threads=controls.threads if controls else 1,
            emphasis=Emphasis.FEASIBILITY,
        )
        model = build_ots(net, inst, bounds or self.initial_bounds(net), RelaxationSpec.all_binary(net))
        outcome = self.solve(model, controls)

        if outcome.has_primal:
            self.logger.info('event=cost-cap source=incumbent cap=%.6f status=%s', outcome.objective,
                             outcome.status.value)
            return CostCap(outcome.objective, 'incumbent')
        self.logger.warning('event=cost-cap source=fallback cap=%.6f status=%s', fallback, outcome.status.value)
        return CostCap(fallback, 'fallback')
