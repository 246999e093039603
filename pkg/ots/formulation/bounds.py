from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, Mapping, Optional

from core.exceptions import InconsistentFixing, MissingBounds, UnknownLine, ValidationError
from core.models import Network


BOUND_TOL = 1e-9


@dataclass(frozen=True)
class LineBounds:
    """Flow bounds ``[f_lo, f_hi]`` and big-M bounds ``[m_lo, m_hi]`` of one line (MW)."""
    f_lo: float
    f_hi: float
    m_lo: float
    m_hi: float

    @property
    def f_width(self) -> float:
        return self.f_hi - self.f_lo

    @property
    def m_width(self) -> float:
        return self.m_hi - self.m_lo


@dataclass(frozen=True)
class Bounds:
    """Bound vectors over all lines, keyed by line id.

    Tightened bounds may cross zero: a proven strictly positive minimum flow is
    a valid ``f_lo > 0``. What always holds is ``line.f_min <= f_lo <= f_hi <=
    line.f_max`` and ``m_lo <= m_hi``.
    """
    lines: Mapping[int, LineBounds]

    def __getitem__(self, line_id: int) -> LineBounds:
        try:
            return self.lines[line_id]
        except KeyError:
            raise MissingBounds(f'no bounds for line {line_id}.') from None

    def __iter__(self):
        return iter(sorted(self.lines))

    def __len__(self) -> int:
        return len(self.lines)

    def covers(self, net: Network) -> None:
        missing = set(net.line_ids) - set(self.lines)
        if missing:
            raise MissingBounds(f'bounds miss lines {sorted(missing)}.')
        extra = set(self.lines) - set(net.line_ids)
        if extra:
            raise UnknownLine(f'bounds name unknown lines {sorted(extra)}.')

    def validate(self, net: Network) -> None:
        """Check coverage and the ordering relations of every line.

        Raises:
            MissingBounds: A line of the network has no bounds.
            ValidationError: A bound leaves the thermal limits or is inverted.
        """
        self.covers(net)
        for line in net.lines:
            b = self.lines[line.id]
            if b.f_lo < line.f_min - BOUND_TOL or b.f_hi > line.f_max + BOUND_TOL:
                raise ValidationError(f'line {line.id}: flow bounds [{b.f_lo}, {b.f_hi}] exceed thermal limits.')
            if b.f_lo > b.f_hi + BOUND_TOL:
                raise ValidationError(f'line {line.id}: f_lo {b.f_lo} exceeds f_hi {b.f_hi}.')
            if b.m_lo > b.m_hi + BOUND_TOL:
                raise ValidationError(f'line {line.id}: m_lo {b.m_lo} exceeds m_hi {b.m_hi}.')

    def updated(self, line_id: int, **values) -> 'Bounds':
        lines = dict(self.lines)
        lines[line_id] = replace(self[line_id], **values)
        return Bounds(lines)

    def to_dict(self) -> Dict[int, Dict[str, float]]:
        return {line_id: vars(self.lines[line_id]).copy() for line_id in self}


@dataclass(frozen=True)
class RelaxationSpec:
    """Which line statuses stay binary, and which are pinned.

    Statuses outside ``binary_lines`` are continuous in ``[0, 1]``. A pinned
    status is fixed to its value whether binary or not.
    """
    binary_lines: FrozenSet[int] = frozenset()
    fixed: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'binary_lines', frozenset(self.binary_lines))
        object.__setattr__(self, 'fixed', dict(self.fixed))
        for line_id, value in self.fixed.items():
            if value not in (0, 1):
                raise InconsistentFixing(f'line {line_id}: status fixed to {value}, expected 0 or 1.')

    @classmethod
    def all_binary(cls, net: Network, fixed: Mapping[int, int] = None) -> 'RelaxationSpec':
        return cls(frozenset(net.line_ids), fixed or {})

    @classmethod
    def all_relaxed(cls, fixed: Mapping[int, int] = None) -> 'RelaxationSpec':
        return cls(frozenset(), fixed or {})

    @classmethod
    def around(cls, lines: Iterable[int], fixed: Mapping[int, int] = None) -> 'RelaxationSpec':
        return cls(frozenset(lines), fixed or {})

    def with_fixed(self, line_id: int, value: int) -> 'RelaxationSpec':
        """Copy with one more pinned status.

        Raises:
            InconsistentFixing: The line is already pinned to the other value.
        """
        current = self.fixed.get(line_id)
        if current is not None and current != value:
            raise InconsistentFixing(f'line {line_id}: already fixed to {current}, cannot fix to {value}.')
        fixed = dict(self.fixed)
        fixed[line_id] = value
        return RelaxationSpec(self.binary_lines, fixed)

    def validate(self, net: Network) -> None:
        unknown = (set(self.binary_lines) | set(self.fixed)) - set(net.line_ids)
        if unknown:
            raise UnknownLine(f'relaxation names unknown lines {sorted(unknown)}.')


@dataclass(frozen=True)
class CostCap:
    """Upper bound on the optimal generation cost, or no cap.

    Attributes:
        cap (float): The cap value, None when absent.
        source (str): ``incumbent`` or ``fallback`` for derived caps.
    """
    cap: Optional[float] = None
    source: Optional[str] = None

    @property
    def present(self) -> bool:
        return self.cap is not None


NO_CAP = CostCap()
