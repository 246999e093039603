from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional

from core.exceptions import OtsError, ValidationError, ZeroWidth
from core.models import Instance, Network
from ots.bench.approaches import Approach, Kind
from ots.bench.metrics import compute_bound_metrics, compute_solution_metrics, refit_cost
from ots.milp.backend import get_backend
from ots.milp.model import SolveControls
from ots.tighten.services.base_service import BaseService
from ots.tighten.services.pipeline import baseline_report, run_tightening, solve_ots


UNSUPPORTED = 'Unsupported'
ERROR = 'Error'


@dataclass
class BenchmarkRecord:
    """One (instance, approach) row of ``results.csv``.

    Percentages and seconds are None where undefined, e.g. ``sub`` and ``dif``
    without an incumbent, or every metric of an unsupported approach.
    """
    instance: int
    approach: str
    status: str
    cost: Optional[float] = None
    gap_pct: Optional[float] = None
    sub_pct: Optional[float] = None
    dif_pct: Optional[float] = None
    dF_pct: Optional[float] = None
    dM_pct: Optional[float] = None
    tB_s: Optional[float] = None
    tO_s: Optional[float] = None
    tT_s: Optional[float] = None

    def as_row(self) -> dict:
        return asdict(self)


class BenchmarkRunner(BaseService):
    """Runs every approach on every instance and computes the row metrics.

    Rows are independent and may run on ``jobs`` worker threads. ``sub`` needs
    the best cost per instance, so it is filled in once all rows are done.
    Output is ordered by instance id, then approach name.

    Attributes:
        controls (SolveControls): Controls of the final switching solves.
        tighten_overrides (dict): ``TightenConfig`` overrides for tightening approaches.
        jobs (int): Worker threads over rows.
    """

    def __init__(self, controls: SolveControls, tighten_overrides: dict = None, jobs: int = 1) -> None:
        super().__init__()
        self.controls = controls
        self.tighten_overrides = tighten_overrides or {}
        self.jobs = jobs
        self.refit_controls = SolveControls(time_limit=controls.time_limit, rel_gap=0.0, threads=controls.threads)

    def run_row(self, net: Network, inst: Instance, approach: Approach) -> BenchmarkRecord:
        """Run one approach on one instance.

        Returns:
            BenchmarkRecord: The row, with ``sub`` still unset.
        """
        if approach.kind is Kind.IND and not get_backend().supports_indicators:
            self.logger.warning('event=unsupported approach=%s backend=%s', approach.name, get_backend().name)
            return BenchmarkRecord(inst.index, approach.name, UNSUPPORTED)

        try:
            if approach.tightens:
                report = run_tightening(net, inst, approach.tighten_config(**self.tighten_overrides))
            else:
                report = baseline_report(net, inst)
            solution = solve_ots(net, inst, report, self.controls)
        except OtsError as e:
            self.logger.error('event=row-failed instance=%d approach=%s error="%s"', inst.index, approach.name, e)
            return BenchmarkRecord(inst.index, approach.name, ERROR)

        record = BenchmarkRecord(
            instance=inst.index,
            approach=approach.name,
            status=solution.status,
            cost=solution.cost,
            gap_pct=solution.gap,
            tB_s=report.t_bound,
            tO_s=solution.t_opt,
            tT_s=report.t_bound + solution.t_opt,
        )
        if approach.tightens:
            try:
                record.dF_pct, record.dM_pct = compute_bound_metrics(report.bounds0, report.bounds)
            except ZeroWidth as e:
                self.logger.warning('event=bound-metrics-undefined instance=%d approach=%s error="%s"',
                               inst.index, approach.name, e)
        else:
            record.dF_pct, record.dM_pct = 0.0, 0.0

        if solution.cost is not None:
            refit = refit_cost(net, inst, solution.x, self.refit_controls)
            _, _, record.dif_pct = compute_solution_metrics(solution.cost, solution.dual_bound, None, refit)
        return record

    def run(self, net: Network, instances: Iterable[Instance], approaches: List[Approach]) -> List[BenchmarkRecord]:
        pairs = [(inst, approach) for inst in instances for approach in approaches]
        if not pairs:
            raise ValidationError('a benchmark needs at least one instance and one approach.')
        self.logger.info('event=bench-start network=%s instances=%d approaches=%s time_limit=%g gap=%g jobs=%d',
                    net.name, len(pairs) // len(approaches), ','.join(a.name for a in approaches),
                    self.controls.time_limit, self.controls.rel_gap, self.jobs)

        with self.phase('bench', network=net.name, rows=len(pairs)):
            if self.jobs > 1:
                with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                    records = list(pool.map(lambda pair: self.run_row(net, *pair), pairs))
            else:
                records = [self.run_row(net, inst, approach) for inst, approach in pairs]

        best = {}
        for record in records:
            if record.cost is not None:
                best[record.instance] = min(record.cost, best.get(record.instance, record.cost))
        for record in records:
            if record.cost is not None:
                _, record.sub_pct, _ = compute_solution_metrics(record.cost, None, best[record.instance], None)

        records.sort(key=lambda r: (r.instance, r.approach))
        return records


def run_benchmark(net: Network, instances: Iterable[Instance], approaches: List[Approach], controls: SolveControls,
                  tighten_overrides: dict = None, jobs: int = 1) -> List[BenchmarkRecord]:
    return BenchmarkRunner(controls, tighten_overrides, jobs).run(net, list(instances), approaches)
