import logging
import math
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import mip

from core.exceptions import BackendError, ValidationError
from ots.milp.model import (
    Emphasis, Integrality, ModelSpec, Relation, Sense, SolveControls, SolveOutcome, SolveStatus,
)


logger = logging.getLogger(__name__)

# CBC reports "nothing proven" with huge finite numbers.
CBC_INFINITY = 1e30

EXPORT_SUFFIXES = ('.lp', '.mps')

STATUS_MAP = {
    mip.OptimizationStatus.OPTIMAL: SolveStatus.OPTIMAL,
    mip.OptimizationStatus.FEASIBLE: SolveStatus.FEASIBLE_AT_LIMIT,
    mip.OptimizationStatus.NO_SOLUTION_FOUND: SolveStatus.NO_SOLUTION_AT_LIMIT,
    mip.OptimizationStatus.INFEASIBLE: SolveStatus.INFEASIBLE,
    mip.OptimizationStatus.INT_INFEASIBLE: SolveStatus.INFEASIBLE,
    mip.OptimizationStatus.UNBOUNDED: SolveStatus.UNBOUNDED,
}


class CbcBackend(object):
    """python-mip adapter over the bundled COIN-OR CBC solver.

    Every call builds a fresh ``mip.Model``, so concurrent solves never share a
    solver environment. Maximization problems are handed to CBC negated and
    the results mapped back, so CBC always sees a minimization.

    Attributes:
        name (str): Backend name used in logs and ``--version``.
        supports_indicators (bool): Whether indicator constraints are available.
    """
    name = 'cbc'
    supports_indicators = False

    def identity(self) -> str:
        try:
            mip_version = version('mip')
        except PackageNotFoundError:
            mip_version = 'unknown'
        return f'python-mip {mip_version} (COIN-OR CBC)'

    def to_mip(self, m: ModelSpec, controls: SolveControls = None):
        """Translate a ModelSpec.

        Returns:
            tuple: ``(model, variables, trivially_infeasible)`` where ``variables``
                maps names to ``mip.Var`` and the flag reports a constraint with no
                terms whose constant side is violated.
        """
        model = mip.Model(name=m.name, sense=mip.MINIMIZE, solver_name=mip.CBC)
        model.verbose = 0
        model.seed = 0
        if controls is not None:
            model.threads = controls.threads
            model.max_mip_gap = controls.rel_gap
            if controls.emphasis is Emphasis.FEASIBILITY:
                model.emphasis = mip.SearchEmphasis.FEASIBILITY

        variables = {}
        for var in m.variables:
            var_type = mip.BINARY if var.integrality is Integrality.BINARY else mip.CONTINUOUS
            variables[var.name] = model.add_var(name=var.name, lb=var.lb, ub=var.ub, var_type=var_type)

        trivially_infeasible = False
        for con in m.constraints:
            if not con.coefficients:
                trivially_infeasible |= not con.relation.holds(0.0, con.rhs)
                continue
            expr = mip.xsum(coef * variables[name] for name, coef in con.coefficients.items())
            if con.relation is Relation.LE:
                model.add_constr(expr <= con.rhs, name=con.name)
            elif con.relation is Relation.GE:
                model.add_constr(expr >= con.rhs, name=con.name)
            else:
                model.add_constr(expr == con.rhs, name=con.name)

        sign = -1.0 if m.objective.sense is Sense.MAX else 1.0
        model.objective = mip.minimize(
            mip.xsum(sign * coef * variables[name] for name, coef in m.objective.coefficients.items()))
        return model, variables, trivially_infeasible

    def export(self, m: ModelSpec, path: str) -> None:
        """Write the model as an LP or MPS file. Maximization models are written negated.

        Raises:
            ValidationError: The file extension is neither ``.lp`` nor ``.mps``.
            BackendError: CBC could not write the file.
        """
        if Path(path).suffix.lower() not in EXPORT_SUFFIXES:
            raise ValidationError(f'{path}: model files must end in .lp or .mps.')
        try:
            model, _, _ = self.to_mip(m)
            model.write(str(path))
        except Exception as e:
            raise BackendError(f'CBC could not write model {m.name} to {path}: {e}') from e
        logger.info('event=model-exported model=%s path=%s', m.name, path)

    def solve(self, m: ModelSpec, controls: SolveControls) -> SolveOutcome:
        started = time.perf_counter()
        try:
            model, variables, trivially_infeasible = self.to_mip(m, controls)
            if trivially_infeasible:
                return SolveOutcome(SolveStatus.INFEASIBLE, runtime=time.perf_counter() - started)
            mip_status = model.optimize(max_seconds=controls.time_limit)
        except Exception as e:
            raise BackendError(f'CBC failed on model {m.name}: {e}') from e
        runtime = time.perf_counter() - started

        status = STATUS_MAP.get(mip_status)
        if status is None and runtime >= controls.time_limit:
            status = SolveStatus.NO_SOLUTION_AT_LIMIT
        if status is None:
            raise BackendError(f'CBC returned status {mip_status.name} on model {m.name}.')

        sign = -1.0 if m.objective.sense is Sense.MAX else 1.0
        primal = objective = None
        if status.has_primal:
            primal = {name: var.x for name, var in variables.items()}
            objective = sign * model.objective_value

        if status is SolveStatus.OPTIMAL and not m.is_mip:
            dual_bound = objective
        elif status in (SolveStatus.INFEASIBLE, SolveStatus.UNBOUNDED):
            dual_bound = None
        else:
            dual_bound = self._dual_bound(model, m, status, objective, sign)

        return SolveOutcome(status, primal, objective, dual_bound, runtime)

    def _dual_bound(self, model, m: ModelSpec, status: SolveStatus, objective, sign: float) -> float:
        """Proven bound in the model's own sense.

        A timed-out LP has no proven bound. For MIPs CBC reports the bound of the
        negated minimization; values at CBC's infinity mean nothing was proven.
        """
        unproven = -math.inf if sign > 0 else math.inf
        if not m.is_mip and status.at_limit:
            return unproven
        bound = model.objective_bound
        if bound is None or not math.isfinite(bound) or abs(bound) >= CBC_INFINITY:
            return unproven
        bound = sign * bound
        if objective is not None:
            bound = min(bound, objective) if sign > 0 else max(bound, objective)
        return bound


_backend = CbcBackend()


def get_backend() -> CbcBackend:
    return _backend


def solve(m: ModelSpec, controls: SolveControls) -> SolveOutcome:
    """Solve a model with the configured backend.

    Raises:
        BackendError: The solver failed.
    """
    outcome = get_backend().solve(m, controls)
    logger.debug('event=solve model=%s status=%s objective=%s bound=%s runtime=%.4f',
                 m.name, outcome.status.value, outcome.objective, outcome.dual_bound, outcome.runtime)
    return outcome
