"""Model builders for the switching problem.

Naming is fixed so that dumps and tests are stable: ``p_{n}``, ``theta_{n}``,
``f_{l}``, ``ftil_{l}`` and ``x_{l}`` for variables; ``kirchhoff_{l}``,
``balance_{n}``, ``bigm_lo_{l}``, ``bigm_hi_{l}``, ``flow_lo_{l}``,
``flow_hi_{l}`` and ``cost_cap`` for constraints.
"""
import enum
from typing import Mapping, Sequence, Union

import networkx as nx

from core.exceptions import ValidationError
from core.models import Instance, Network
from ots.formulation.bounds import Bounds, CostCap, RelaxationSpec
from ots.milp.model import INF, Integrality, ModelBuilder, ModelSpec, Objective, Relation, Sense


class Target(str, enum.Enum):
    FLOW = 'flow'
    DUMMY = 'dummy'

    @property
    def side_status(self) -> int:
        """Status the bounding problem pins on its own line."""
        return 1 if self is Target.FLOW else 0


def p(bus_id: int) -> str:
    return f'p_{bus_id}'


def theta(bus_id: int) -> str:
    return f'theta_{bus_id}'


def f(line_id: int) -> str:
    return f'f_{line_id}'


def ftil(line_id: int) -> str:
    return f'ftil_{line_id}'


def x(line_id: int) -> str:
    return f'x_{line_id}'


def _add_dispatch(builder: ModelBuilder, net: Network, references) -> None:
    for bus in net.buses:
        builder.add_variable(p(bus.id), bus.p_min, bus.p_max)
    for bus in net.buses:
        if bus.id in references:
            builder.add_variable(theta(bus.id), 0.0, 0.0)
        else:
            builder.add_variable(theta(bus.id), -INF, INF)


def _add_balance(builder: ModelBuilder, net: Network, inst: Instance) -> None:
    terms = {bus.id: {p(bus.id): 1.0} for bus in net.buses}
    for line in net.lines:
        terms[line.from_bus][f(line.id)] = terms[line.from_bus].get(f(line.id), 0.0) - 1.0
        terms[line.to_bus][f(line.id)] = terms[line.to_bus].get(f(line.id), 0.0) + 1.0
    for bus_id, demand in inst.demand_at(net).items():
        builder.add_constraint(f'balance_{bus_id}', terms[bus_id], Relation.EQ, demand)


def _cost(net: Network):
    return {p(bus.id): bus.cost for bus in net.buses}


def build_ots(net: Network, inst: Instance, bounds: Bounds, relax: RelaxationSpec,
              cap: CostCap = CostCap()) -> ModelSpec:
    """Big-M mixed-binary model of the switching problem.

    The model is built with every status binary; statuses outside
    ``relax.binary_lines`` are then relaxed on a copy and pinned statuses fixed.

    Args:
        net (Network): The grid.
        inst (Instance): Demand realization.
        bounds (Bounds): Flow and big-M bounds of every line.
        relax (RelaxationSpec): Binary and pinned statuses.
        cap (CostCap): Optional cap on the generation cost.

    Returns:
        ModelSpec: Minimization of the generation cost.

    Raises:
        MissingBounds: ``bounds`` does not cover every line.
        InconsistentFixing: A pinned status is not 0 or 1.
    """
    bounds.covers(net)
    relax.validate(net)
    inst.validate_for(net, adequacy=False)

    builder = ModelBuilder(f'ots-{net.name}')
    _add_dispatch(builder, net, {net.reference_bus})
    for line in net.lines:
        builder.add_variable(f(line.id), -INF, INF)
    for line in net.lines:
        builder.add_variable(ftil(line.id), -INF, INF)
    for line in net.lines:
        builder.add_variable(x(line.id), 0.0, 1.0, Integrality.BINARY)

    for line in net.lines:
        b = line.susceptance
        builder.add_constraint(
            f'kirchhoff_{line.id}',
            {ftil(line.id): 1.0, theta(line.from_bus): -b, theta(line.to_bus): b},
            Relation.EQ, 0.0)
    _add_balance(builder, net, inst)

    for line in net.lines:
        lb = bounds[line.id]
        builder.add_constraint(
            f'bigm_lo_{line.id}', {f(line.id): -1.0, ftil(line.id): 1.0, x(line.id): lb.m_lo}, Relation.GE, lb.m_lo)
        builder.add_constraint(
            f'bigm_hi_{line.id}', {f(line.id): -1.0, ftil(line.id): 1.0, x(line.id): lb.m_hi}, Relation.LE, lb.m_hi)
        builder.add_constraint(f'flow_lo_{line.id}', {f(line.id): 1.0, x(line.id): -lb.f_lo}, Relation.GE, 0.0)
        builder.add_constraint(f'flow_hi_{line.id}', {f(line.id): 1.0, x(line.id): -lb.f_hi}, Relation.LE, 0.0)

    if cap.present:
        builder.add_constraint('cost_cap', _cost(net), Relation.LE, cap.cap)
    builder.set_objective(Sense.MIN, _cost(net))

    model = builder.build()
    return model.relaxed(keep_binary=[x(l) for l in relax.binary_lines]).fixed(
        {x(l): float(value) for l, value in relax.fixed.items()})


def build_bounding(net: Network, inst: Instance, bounds: Bounds, line_id: int, target: Target, sense: Sense,
                   relax: RelaxationSpec, cap: CostCap) -> ModelSpec:
    """Optimize the flow (``x_l = 1``) or dummy flow (``x_l = 0``) of one line.

    The feasible region is the switching model under ``relax`` with the cost
    cap added and the side status of the target pinned on ``line_id``.

    Raises:
        ValidationError: ``cap`` is absent.
        InconsistentFixing: ``relax`` pins ``line_id`` to the other status.
    """
    if not cap.present:
        raise ValidationError(f'bounding problems of line {line_id} need a cost cap.')
    net.line(line_id)
    side = relax.with_fixed(line_id, target.side_status)
    model = build_ots(net, inst, bounds, side, cap)
    variable = f(line_id) if target is Target.FLOW else ftil(line_id)
    return model.with_objective(
        Objective(sense, {variable: 1.0}), name=f'bound-{net.name}-l{line_id}-{target.value}-{sense.value}')


def normalize_statuses(net: Network, statuses: Union[Mapping[int, int], Sequence[int]]) -> dict:
    """Line id -> status from a mapping or from a vector in line order."""
    if isinstance(statuses, Mapping):
        result = {int(l): int(v) for l, v in statuses.items()}
    else:
        statuses = list(statuses)
        if len(statuses) != len(net.lines):
            raise ValidationError(f'{len(statuses)} statuses for {len(net.lines)} lines.')
        result = {line_id: int(v) for line_id, v in zip(net.line_ids, statuses)}
    if set(result) != set(net.line_ids):
        raise ValidationError('statuses must cover every line exactly.')
    if any(v not in (0, 1) for v in result.values()):
        raise ValidationError('statuses must be 0 or 1.')
    return result


def angle_references(net: Network, closed) -> set:
    """Lowest bus id of every island of the closed-line subgraph."""
    g = nx.MultiGraph()
    g.add_nodes_from(net.bus_ids)
    g.add_edges_from(net.line(l).endpoints for l in closed)
    return {min(component) for component in nx.connected_components(g)}


def build_dcopf_fixed(net: Network, inst: Instance, statuses) -> ModelSpec:
    """DC optimal power flow with every line status fixed.

    Open lines carry no flow and no Kirchhoff equation. Closed lines obey the
    DC flow equation and their thermal limits. No big-M constants appear.
    """
    inst.validate_for(net, adequacy=False)
    status = normalize_statuses(net, statuses)
    closed = [l for l in net.line_ids if status[l] == 1]

    builder = ModelBuilder(f'dcopf-{net.name}')
    _add_dispatch(builder, net, angle_references(net, closed))
    for line in net.lines:
        if status[line.id]:
            builder.add_variable(f(line.id), line.f_min, line.f_max)
        else:
            builder.add_variable(f(line.id), 0.0, 0.0)

    for line in net.lines:
        if status[line.id]:
            b = line.susceptance
            builder.add_constraint(
                f'kirchhoff_{line.id}',
                {f(line.id): 1.0, theta(line.from_bus): -b, theta(line.to_bus): b},
                Relation.EQ, 0.0)
    _add_balance(builder, net, inst)
    builder.set_objective(Sense.MIN, _cost(net))
    return builder.build()
