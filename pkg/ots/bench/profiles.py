from typing import Iterable

import pandas as pd

from core.exceptions import ValidationError
from ots.bench.summary import split_instances
from ots.milp.model import SolveStatus


PROFILE_COLUMNS = ['approach', 'time_s', 'solved']


def performance_profile(frame: pd.DataFrame, time_limit: float, instances: Iterable[int] = None) -> pd.DataFrame:
    """Cumulative solved counts over total time, per approach.

    Each curve starts at ``(0, 0)``, steps up by one at the total time of every
    instance solved to optimality and ends at ``(time_limit, n_solved)``.
    Unsolved instances never count.

    Args:
        frame (DataFrame): Results rows.
        time_limit (float): Where every curve ends.
        instances (list): Optional subset of instance ids, e.g. the hard split.

    Returns:
        DataFrame: Columns ``approach, time_s, solved``.
    """
    if frame.empty:
        raise ValidationError('performance profiles need at least one result row.')
    if instances is not None:
        frame = frame[frame['instance'].isin(list(instances))]

    points = []
    for approach, rows in frame.groupby('approach', sort=False):
        solved = rows[rows['status'] == SolveStatus.OPTIMAL.value]['tT_s'].dropna().sort_values()
        points.append((approach, 0.0, 0))
        for count, seconds in enumerate(solved, start=1):
            points.append((approach, float(seconds), count))
        last = float(solved.iloc[-1]) if len(solved) else 0.0
        points.append((approach, max(float(time_limit), last), len(solved)))
    return pd.DataFrame(points, columns=PROFILE_COLUMNS)


def write_profile(profile: pd.DataFrame, path) -> None:
    profile.to_csv(path, index=False, float_format='%.6f')


def profiles_by_split(frame: pd.DataFrame, time_limit: float, fraction: float = None) -> pd.DataFrame:
    """Profiles over all, hard and easy instances, with a leading ``split`` column."""
    parts = [performance_profile(frame, time_limit).assign(split='all')]
    for split, ids in split_instances(frame, fraction).items():
        parts.append(performance_profile(frame, time_limit, ids).assign(split=split))
    return pd.concat(parts, ignore_index=True)[['split'] + PROFILE_COLUMNS]
