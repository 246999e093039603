import enum
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

from django.conf import settings

from core.exceptions import ValidationError
from ots.formulation.bounds import Bounds, CostCap
from ots.milp.model import Emphasis, SolveControls


class Mode(str, enum.Enum):
    TBT = 'tbt'
    SBT = 'sbt'


class Propagation(str, enum.Enum):
    SEQUENTIAL = 'seq'
    BATCH = 'batch'


class Action(str, enum.Enum):
    TIGHTENED = 'tightened'
    NO_IMPROVEMENT = 'no-improvement'
    INFEASIBLE = 'infeasible'
    SKIPPED_FIXED = 'skipped-fixed'
    NO_BOUND = 'no-bound'


@dataclass(frozen=True)
class TightenConfig:
    """Settings of one tightening run.

    Build instances with ``tbt`` or ``sbt``; both read their defaults from the
    ``OTS_*`` settings.

    Attributes:
        mode (Mode): Topological (``tbt``) or solver-limited (``sbt``) bounding.
        k (int): Closeness level of ``tbt``.
        t_ms (float): Per-problem budget of ``sbt`` in milliseconds.
        per_problem_time_limit (float): Seconds per bounding problem.
        heuristic_budget (float): Seconds for the cost-cap heuristic.
        propagation (Propagation): ``seq`` or ``batch``.
        improvement_epsilon (float): Smallest accepted bound improvement (MW).
        passes (int): Loops over all lines.
        jobs (int): Worker threads of batch propagation.
        threads (int): Solver threads per problem.
        rel_gap (float): Relative gap of the heuristic solve.
    """
    mode: Mode
    k: int = 0
    t_ms: Optional[float] = None
    per_problem_time_limit: float = 5.0
    heuristic_budget: float = 10.0
    propagation: Propagation = Propagation.SEQUENTIAL
    improvement_epsilon: float = 1e-6
    passes: int = 1
    jobs: int = 1
    threads: int = 1
    rel_gap: float = 1e-4

    def __post_init__(self):
        if self.k < 0:
            raise ValidationError(f'k must be non-negative, got {self.k}.')
        if self.mode is Mode.SBT and not (self.t_ms and self.t_ms > 0):
            raise ValidationError(f'sbt needs a positive t_ms, got {self.t_ms}.')
        if self.per_problem_time_limit <= 0 or self.heuristic_budget <= 0:
            raise ValidationError('time limits must be positive.')
        if self.passes < 1 or self.jobs < 1:
            raise ValidationError('passes and jobs must be positive.')
        if self.improvement_epsilon < 0:
            raise ValidationError('improvement_epsilon must be non-negative.')

    @classmethod
    def _defaults(cls) -> dict:
        return {
            'heuristic_budget': settings.OTS_HEURISTIC_BUDGET,
            'improvement_epsilon': settings.OTS_IMPROVEMENT_EPSILON,
            'jobs': settings.OTS_JOBS,
            'threads': settings.OTS_THREADS,
            'rel_gap': settings.OTS_REL_GAP,
        }

    @classmethod
    def tbt(cls, k: int, **overrides) -> 'TightenConfig':
        values = cls._defaults()
        values['per_problem_time_limit'] = settings.OTS_TBT_PROBLEM_LIMIT
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(mode=Mode.TBT, k=k, **values)

    @classmethod
    def sbt(cls, t_ms: float, **overrides) -> 'TightenConfig':
        values = cls._defaults()
        values.update({key: value for key, value in overrides.items() if value is not None})
        values['per_problem_time_limit'] = t_ms / 1000.0
        return cls(mode=Mode.SBT, t_ms=t_ms, **values)

    @property
    def label(self) -> str:
        if self.mode is Mode.TBT:
            return f'TBT-{self.k}'
        return f'SBT-{self.t_ms:g}'

    def problem_controls(self) -> SolveControls:
        return SolveControls(time_limit=self.per_problem_time_limit, rel_gap=0.0, threads=self.threads)

    def heuristic_controls(self) -> SolveControls:
        return SolveControls(time_limit=self.heuristic_budget, rel_gap=self.rel_gap, threads=self.threads,
                             emphasis=Emphasis.FEASIBILITY)

    def with_propagation(self, propagation: Propagation) -> 'TightenConfig':
        return replace(self, propagation=propagation)


@dataclass(frozen=True)
class SubproblemLog:
    line: int
    target: str
    sense: str
    status: Optional[str]
    objective: Optional[float]
    dual_bound: Optional[float]
    runtime: float
    action: Action


@dataclass
class TightenReport:
    """Outcome of a tightening run.

    Attributes:
        network (str): Network name.
        instance (int): Instance id.
        approach (str): Configuration label, e.g. ``TBT-2``.
        bounds0 (Bounds): Initial bounds.
        bounds (Bounds): Final bounds.
        cap (CostCap): Cost cap used by every bounding problem.
        fixed_lines (dict): Line id -> status pinned by infeasibility detection.
        t_bound (float): Wall seconds of initial bounds, heuristic and bounding.
        t_heuristic (float): Share of ``t_bound`` spent in the heuristic.
        per_line_log (list): One ``SubproblemLog`` per bounding problem or skip.
    """
    network: str
    instance: int
    approach: str
    bounds0: Bounds
    bounds: Bounds
    cap: CostCap
    fixed_lines: Dict[int, int] = field(default_factory=dict)
    t_bound: float = 0.0
    t_heuristic: float = 0.0
    per_line_log: List[SubproblemLog] = field(default_factory=list)


@dataclass(frozen=True)
class Solution:
    """Final switching solution.

    ``gap`` is in percent; ``x``, ``flows`` and ``dispatch`` are empty when no
    incumbent exists.
    """
    status: str
    cost: Optional[float]
    dual_bound: Optional[float]
    x: Dict[int, int]
    flows: Dict[int, float]
    dispatch: Dict[int, float]
    gap: Optional[float]
    t_opt: float
