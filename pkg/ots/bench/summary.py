"""Results CSV and the per-approach summary tables.

The summaries are computed from values rounded exactly as the CSV writes
them, so summarizing a re-read CSV reproduces the in-memory summary.
"""
import math
from pathlib import Path
from typing import Iterable, List

import pandas as pd
from django.conf import settings

from core.exceptions import ParseError, ValidationError
from ots.bench.runner import BenchmarkRecord
from ots.milp.model import SolveStatus


RESULT_COLUMNS = ['instance', 'approach', 'status', 'cost', 'gap_pct', 'sub_pct', 'dif_pct', 'dF_pct', 'dM_pct',
                  'tB_s', 'tO_s', 'tT_s']
NUMERIC_COLUMNS = RESULT_COLUMNS[3:]
TIME_LIMIT_STATUSES = (SolveStatus.FEASIBLE_AT_LIMIT.value, SolveStatus.NO_SOLUTION_AT_LIMIT.value)
FLOAT_FORMAT = '%.6f'


def _csv_round(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return math.nan
    return float(FLOAT_FORMAT % value)


def records_frame(records: Iterable[BenchmarkRecord]) -> pd.DataFrame:
    frame = pd.DataFrame([record.as_row() for record in records], columns=RESULT_COLUMNS)
    for column in NUMERIC_COLUMNS:
        frame[column] = frame[column].map(_csv_round).astype(float)
    frame['instance'] = frame['instance'].astype(int)
    return frame


def write_results(frame: pd.DataFrame, path) -> None:
    frame.to_csv(path, index=False, columns=RESULT_COLUMNS, float_format=FLOAT_FORMAT, na_rep='')


def read_results(path) -> pd.DataFrame:
    """Read a results CSV.

    Raises:
        ParseError: The file is missing or lacks a results column.
    """
    if not Path(path).exists():
        raise ParseError(f'{path}: file not found.')
    try:
        frame = pd.read_csv(path, dtype={'approach': str, 'status': str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f'{path}: {e}') from e
    missing = [column for column in RESULT_COLUMNS if column not in frame.columns]
    if missing:
        raise ParseError(f'{path}: missing columns {missing}.')
    for column in NUMERIC_COLUMNS:
        frame[column] = pd.to_numeric(frame[column], errors='coerce').astype(float)
    return frame[RESULT_COLUMNS]


def summarize(frame: pd.DataFrame) -> pd.DataFrame:
    """Table of means and maxima per approach, with the time-limit count.

    Columns: ``approach, n, dF_pct, dM_pct, gap_pct_mean, gap_pct_max,
    sub_pct_mean, sub_pct_max, dif_pct_mean, dif_pct_max, tB_s, tO_s, tT_s,
    n_TL``. Undefined row metrics are left out of the means.
    """
    grouped = frame.groupby('approach', sort=False)
    summary = pd.DataFrame({
        'n': grouped.size(),
        'dF_pct': grouped['dF_pct'].mean(),
        'dM_pct': grouped['dM_pct'].mean(),
        'gap_pct_mean': grouped['gap_pct'].mean(),
        'gap_pct_max': grouped['gap_pct'].max(),
        'sub_pct_mean': grouped['sub_pct'].mean(),
        'sub_pct_max': grouped['sub_pct'].max(),
        'dif_pct_mean': grouped['dif_pct'].mean(),
        'dif_pct_max': grouped['dif_pct'].max(),
        'tB_s': grouped['tB_s'].mean(),
        'tO_s': grouped['tO_s'].mean(),
        'tT_s': grouped['tT_s'].mean(),
        'n_TL': grouped['status'].apply(lambda s: int(s.isin(TIME_LIMIT_STATUSES).sum())),
    })
    return summary.reset_index()


def split_instances(frame: pd.DataFrame, fraction: float = None) -> dict:
    """Hard and easy instance ids.

    Instances are ranked by mean total time over the approaches, ties broken by
    id. The top ``fraction`` is hard, the bottom ``fraction`` easy; each split
    holds at least one instance.
    """
    if fraction is None:
        fraction = settings.OTS_SPLIT_FRACTION
    if not 0 < fraction <= 0.5:
        raise ValidationError(f'split fraction must lie in (0, 0.5], got {fraction}.')
    means = frame.groupby('instance')['tT_s'].mean().fillna(math.inf)
    ranked = sorted(means.items(), key=lambda item: (-item[1], item[0]))
    size = max(1, int(math.floor(fraction * len(ranked) + 1e-9)))
    ids = [instance for instance, _ in ranked]
    return {'hard': ids[:size], 'easy': ids[-size:]}


def summarize_splits(frame: pd.DataFrame, fraction: float = None) -> pd.DataFrame:
    """The summary restricted to the hard and to the easy instances, with a ``split`` column."""
    parts: List[pd.DataFrame] = []
    for split, ids in split_instances(frame, fraction).items():
        part = summarize(frame[frame['instance'].isin(ids)])
        part.insert(0, 'split', split)
        parts.append(part)
    return pd.concat(parts, ignore_index=True)


def render(frame: pd.DataFrame, fmt: str = 'table') -> str:
    if fmt == 'csv':
        return frame.to_csv(index=False, float_format=FLOAT_FORMAT).rstrip('\n')
    return frame.to_string(index=False, float_format=lambda v: f'{v:.2f}')


def render_summaries(frame: pd.DataFrame, fraction: float = None, fmt: str = 'table') -> str:
    """The per-approach table and the hard/easy table, separated by a blank line."""
    return f'{render(summarize(frame), fmt)}\n\n{render(summarize_splits(frame, fraction), fmt)}'
