"""Solver-neutral linear model representation.

A ``ModelSpec`` is a plain value: variables with bounds and integrality,
named linear constraints and a linear objective. Backends translate it; the
rest of the code base never talks to a solver directly.
"""
import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, Iterable, Mapping, Optional, Tuple

from django.conf import settings

from core.exceptions import ValidationError


INF = math.inf

# Absolute tolerance used when checking primal values against bounds.
FEAS_TOL = 1e-6


class Integrality(str, enum.Enum):
    CONTINUOUS = 'continuous'
    BINARY = 'binary'


class Relation(str, enum.Enum):
    LE = '<='
    EQ = '='
    GE = '>='

    def holds(self, lhs: float, rhs: float, tol: float = FEAS_TOL) -> bool:
        if self is Relation.LE:
            return lhs <= rhs + tol
        if self is Relation.GE:
            return lhs >= rhs - tol
        return abs(lhs - rhs) <= tol


class Sense(str, enum.Enum):
    MIN = 'min'
    MAX = 'max'


class Emphasis(str, enum.Enum):
    DEFAULT = 'default'
    FEASIBILITY = 'feasibility'


class SolveStatus(str, enum.Enum):
    OPTIMAL = 'Optimal'
    FEASIBLE_AT_LIMIT = 'FeasibleAtLimit'
    NO_SOLUTION_AT_LIMIT = 'NoSolutionAtLimit'
    INFEASIBLE = 'Infeasible'
    UNBOUNDED = 'Unbounded'

    @property
    def has_primal(self) -> bool:
        return self in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE_AT_LIMIT)

    @property
    def at_limit(self) -> bool:
        return self in (SolveStatus.FEASIBLE_AT_LIMIT, SolveStatus.NO_SOLUTION_AT_LIMIT)


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float = 0.0
    ub: float = INF
    integrality: Integrality = Integrality.CONTINUOUS

    @property
    def is_binary(self) -> bool:
        return self.integrality is Integrality.BINARY


@dataclass(frozen=True)
class Constraint:
    name: str
    coefficients: Mapping[str, float]
    relation: Relation
    rhs: float


@dataclass(frozen=True)
class Objective:
    sense: Sense
    coefficients: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ModelSpec:
    """A linear or mixed-binary program.

    Construction checks that every coefficient references a declared variable,
    that bounds are ordered and that binaries stay inside ``[0, 1]``.
    """
    name: str
    variables: Tuple[Variable, ...]
    constraints: Tuple[Constraint, ...]
    objective: Objective

    def __post_init__(self):
        object.__setattr__(self, 'variables', tuple(self.variables))
        object.__setattr__(self, 'constraints', tuple(self.constraints))

        names = set()
        for var in self.variables:
            if var.name in names:
                raise ValidationError(f'model {self.name}: duplicate variable {var.name}.')
            names.add(var.name)
            if var.lb > var.ub:
                raise ValidationError(f'model {self.name}: variable {var.name} has lb {var.lb} > ub {var.ub}.')
            if var.is_binary and (var.lb < 0 or var.ub > 1):
                raise ValidationError(f'model {self.name}: binary {var.name} bounds leave [0, 1].')

        for con in self.constraints:
            unknown = set(con.coefficients) - names
            if unknown:
                raise ValidationError(f'model {self.name}: constraint {con.name} uses undeclared {sorted(unknown)}.')
        unknown = set(self.objective.coefficients) - names
        if unknown:
            raise ValidationError(f'model {self.name}: objective uses undeclared {sorted(unknown)}.')

    @cached_property
    def index(self) -> Dict[str, Variable]:
        return {var.name: var for var in self.variables}

    def variable(self, name: str) -> Variable:
        return self.index[name]

    def constraint(self, name: str) -> Constraint:
        for con in self.constraints:
            if con.name == name:
                return con
        raise KeyError(name)

    @property
    def binary_names(self) -> Tuple[str, ...]:
        return tuple(var.name for var in self.variables if var.is_binary)

    @property
    def is_mip(self) -> bool:
        return bool(self.binary_names)

    def relaxed(self, keep_binary: Iterable[str] = ()) -> 'ModelSpec':
        """Copy with every binary outside ``keep_binary`` relaxed to ``[lb, ub]``."""
        keep = set(keep_binary)
        variables = tuple(
            replace(var, integrality=Integrality.CONTINUOUS) if var.is_binary and var.name not in keep else var
            for var in self.variables
        )
        return replace(self, variables=variables)

    def fixed(self, values: Mapping[str, float]) -> 'ModelSpec':
        """Copy with the given variables pinned to a value."""
        missing = set(values) - set(self.index)
        if missing:
            raise ValidationError(f'model {self.name}: cannot fix undeclared {sorted(missing)}.')
        variables = tuple(
            replace(var, lb=values[var.name], ub=values[var.name]) if var.name in values else var
            for var in self.variables
        )
        return replace(self, variables=variables)

    def with_objective(self, objective: Objective, name: str = None) -> 'ModelSpec':
        return replace(self, objective=objective, name=name or self.name)


class ModelBuilder(object):
    """Accumulates variables and constraints, then freezes them into a ``ModelSpec``."""

    def __init__(self, name: str):
        self.name = name
        self._variables = []
        self._constraints = []
        self._objective = Objective(Sense.MIN, {})

    def add_variable(self, name: str, lb: float = 0.0, ub: float = INF,
                     integrality: Integrality = Integrality.CONTINUOUS) -> str:
        self._variables.append(Variable(name, lb, ub, integrality))
        return name

    def add_constraint(self, name: str, coefficients: Mapping[str, float], relation: Relation, rhs: float) -> None:
        terms = {var: coef for var, coef in coefficients.items() if coef != 0}
        self._constraints.append(Constraint(name, terms, relation, float(rhs)))

    def set_objective(self, sense: Sense, coefficients: Mapping[str, float]) -> None:
        self._objective = Objective(sense, {var: coef for var, coef in coefficients.items() if coef != 0})

    def build(self) -> ModelSpec:
        return ModelSpec(self.name, tuple(self._variables), tuple(self._constraints), self._objective)


@dataclass(frozen=True)
class SolveControls:
    """Time and gap controls of one solve.

    Attributes:
        time_limit (float): Wall seconds, fractional allowed.
        rel_gap (float): Relative MIP gap at which the solver may stop.
        threads (int): Solver threads.
        emphasis (Emphasis): Search emphasis; ``FEASIBILITY`` for the cost-cap heuristic.
    """
    time_limit: float
    rel_gap: float = 1e-4
    threads: int = 1
    emphasis: Emphasis = Emphasis.DEFAULT

    def __post_init__(self):
        if not self.time_limit > 0:
            raise ValidationError(f'time_limit must be positive, got {self.time_limit}.')
        if self.rel_gap < 0:
            raise ValidationError(f'rel_gap must be non-negative, got {self.rel_gap}.')
        if self.threads < 1:
            raise ValidationError(f'threads must be positive, got {self.threads}.')

    @classmethod
    def from_settings(cls, **overrides) -> 'SolveControls':
        values = {
            'time_limit': settings.OTS_TIME_LIMIT,
            'rel_gap': settings.OTS_REL_GAP,
            'threads': settings.OTS_THREADS,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass(frozen=True)
class SolveOutcome:
    """Result of one solve.

    ``dual_bound`` is the best proven bound in the model's own sense: a lower
    bound for minimization, an upper bound for maximization. It is infinite
    when nothing was proven and None for infeasible models.
    """
    status: SolveStatus
    primal: Optional[Dict[str, float]] = None
    objective: Optional[float] = None
    dual_bound: Optional[float] = None
    runtime: float = 0.0

    @property
    def has_primal(self) -> bool:
        return self.status.has_primal and self.primal is not None

    def value(self, name: str) -> float:
        return self.primal[name]
