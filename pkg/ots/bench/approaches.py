import enum
import re
from dataclasses import dataclass
from typing import List, Optional

from core.exceptions import ValidationError
from ots.tighten.config import TightenConfig


class Kind(str, enum.Enum):
    MIP = 'mip'
    TBT = 'tbt'
    SBT = 'sbt'
    IND = 'ind'


TOKEN = re.compile(r'^(?P<kind>mip|ind|tbt|sbt)(?:-(?P<param>\d+(?:\.\d+)?))?$')


@dataclass(frozen=True)
class Approach:
    """A benchmarked method.

    Attributes:
        name (str): Label used in CSVs, e.g. ``MIP``, ``TBT-2``, ``SBT-25``.
        kind (Kind): Method family.
        k (int): Closeness level of ``tbt``.
        t_ms (float): Per-problem budget of ``sbt``.
    """
    name: str
    kind: Kind
    k: Optional[int] = None
    t_ms: Optional[float] = None

    @classmethod
    def parse(cls, token: str) -> 'Approach':
        """Parse ``mip``, ``ind``, ``tbt-K`` or ``sbt-T``."""
        match = TOKEN.match(token.strip().lower())
        if not match:
            raise ValidationError(f'unknown approach "{token}"; expected mip, ind, tbt-K or sbt-T.')
        kind, param = Kind(match['kind']), match['param']
        if kind in (Kind.MIP, Kind.IND):
            if param is not None:
                raise ValidationError(f'approach "{token}" takes no parameter.')
            return cls(kind.value.upper(), kind)
        if param is None:
            raise ValidationError(f'approach "{token}" needs a parameter.')
        if kind is Kind.TBT:
            if '.' in param:
                raise ValidationError(f'approach "{token}": k must be an integer.')
            return cls(f'TBT-{int(param)}', kind, k=int(param))
        t_ms = float(param)
        if t_ms <= 0:
            raise ValidationError(f'approach "{token}": t must be positive.')
        return cls(f'SBT-{t_ms:g}', kind, t_ms=t_ms)

    @property
    def tightens(self) -> bool:
        return self.kind in (Kind.TBT, Kind.SBT)

    def tighten_config(self, **overrides) -> Optional[TightenConfig]:
        if self.kind is Kind.TBT:
            return TightenConfig.tbt(self.k, **overrides)
        if self.kind is Kind.SBT:
            return TightenConfig.sbt(self.t_ms, **overrides)
        return None


def parse_approaches(text: str) -> List[Approach]:
    """Parse a comma separated approach list; names must be unique."""
    approaches = [Approach.parse(token) for token in text.split(',') if token.strip()]
    if not approaches:
        raise ValidationError('no approaches given.')
    names = [approach.name for approach in approaches]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise ValidationError(f'duplicate approaches {duplicates}.')
    return approaches
