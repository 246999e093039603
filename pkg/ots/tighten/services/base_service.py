import logging
import time
from contextlib import contextmanager

from ots.milp import backend
from ots.milp.model import ModelSpec, SolveControls, SolveOutcome


class BaseService(object):
    """Base service.

    Tightening services extend this class. It owns the solver access and the
    phase timers, so subclasses never name a backend.

    Attributes:
        logger (logging.Logger): Logger named after the concrete service module.
    """

    def __init__(self) -> None:
        self.logger = logging.getLogger(type(self).__module__)

    def solve(self, model: ModelSpec, controls: SolveControls) -> SolveOutcome:
        """Solve a model.

        Args:
            model (ModelSpec): The model.
            controls (SolveControls): Time and gap controls.

        Returns:
            SolveOutcome: The backend outcome.
        """
        return backend.solve(model, controls)

    @contextmanager
    def phase(self, name: str, **context):
        """Time a phase and log its wall time on exit.

        Yields:
            dict: Receives ``elapsed`` (seconds) when the block ends.
        """
        timer = {'elapsed': 0.0}
        started = time.perf_counter()
        try:
            yield timer
        finally:
            timer['elapsed'] = time.perf_counter() - started
            extra = ' '.join(f'{key}={value}' for key, value in context.items())
            self.logger.info('phase=%s elapsed=%.4f %s', name, timer['elapsed'], extra)
