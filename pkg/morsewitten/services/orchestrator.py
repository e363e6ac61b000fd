"""
Experiment orchestration for morse-witten-lab.

Coordinates the pipelines for one or many experiments: each experiment gets
its own result directory, and a list of experiments runs in parallel worker
processes.
"""

import asyncio
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import structlog

from ..config import Settings, get_settings
from ..models.experiment import ExperimentConfig, Report
from ..utils.exceptions import MorseWittenError
from .pipeline import AnalysisResult, ReportCheck, analyze, persistence, recompute_report, verify
from .selftest import SelftestSummary, run_selftest
from .storage import ResultStore

COMMANDS = ("analyze", "verify", "persistence")


@dataclass
class RunOutcome:
    """Result of one experiment run."""

    name: str
    command: str
    exit_code: int
    output_dir: Optional[str] = None
    error: Optional[Dict[str, Any]] = None
    execution_time: float = 0.0

    @property
    def success(self) -> bool:
        return self.exit_code == 0


@dataclass
class BatchResult:
    outcomes: List[RunOutcome] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        """Worst exit code of the batch; 0 when every run passed."""
        return max((o.exit_code for o in self.outcomes), default=0)


class ExperimentOrchestrator:
    """
    Runs experiments and stores their results.

    Output goes to ``<out_root>/<experiment name>``; ``out_root`` is the
    explicit root, else the experiment's OUTPUT_DIR, else the harness
    default.
    """

    def __init__(self, settings: Optional[Settings] = None, out_root: Optional[Union[str, Path]] = None):
        self.settings = settings or get_settings()
        self.out_root = Path(out_root) if out_root is not None else None
        self.logger = structlog.get_logger(self.__class__.__name__)

    def output_dir(self, config: ExperimentConfig) -> Path:
        root = self.out_root or Path(config.output_dir or self.settings.harness.output_dir)
        return root / config.name

    def store(self, config: ExperimentConfig) -> ResultStore:
        return ResultStore(self.output_dir(config), self.settings.harness)

    def analyze(self, config: ExperimentConfig) -> AnalysisResult:
        self.logger.info("analyze_requested", experiment=config.name)
        return analyze(config, self.store(config), self.settings)

    def verify(self, config: ExperimentConfig) -> Report:
        self.logger.info("verify_requested", experiment=config.name, h_list=config.h_list, degrees=config.degrees)
        return verify(config, self.store(config), self.settings)

    def persistence(self, config: ExperimentConfig):
        self.logger.info("persistence_requested", experiment=config.name)
        return persistence(config, self.store(config), self.settings)

    def report(self, directory: Union[str, Path]) -> ReportCheck:
        """Recompute the verdicts of a finished run from its tables."""
        self.logger.info("report_requested", directory=str(directory))
        return recompute_report(ResultStore(directory, self.settings.harness), self.settings)

    def selftest(self, seed: int = 0, inject_fault: bool = False) -> SelftestSummary:
        self.logger.info("selftest_requested", seed=seed, inject_fault=inject_fault)
        return run_selftest(seed=seed, inject_fault=inject_fault, settings=self.settings)

    def run(self, command: str, config: ExperimentConfig) -> RunOutcome:
        """Run one pipeline command and map its result to an exit code."""
        if command not in COMMANDS:
            raise ValueError(f"unknown command {command!r}")
        start = time.perf_counter()
        exit_code, error = 0, None
        try:
            result = getattr(self, command)(config)
            if command == "verify" and not result.passed:
                exit_code = 1
        except MorseWittenError as exc:
            self.logger.error("run_failed", experiment=config.name, command=command, **exc.to_dict())
            exit_code, error = exc.exit_code, exc.to_dict()
        return RunOutcome(
            name=config.name,
            command=command,
            exit_code=exit_code,
            output_dir=str(self.output_dir(config)),
            error=error,
            execution_time=time.perf_counter() - start,
        )

    async def run_many(self, command: str, configs: Sequence[ExperimentConfig]) -> BatchResult:
        """
        Run a command for several experiments in parallel processes.

        Args:
            command: One of :data:`COMMANDS`
            configs: Experiments; their names must be distinct

        Returns:
            Outcomes in the order of ``configs``
        """
        names = [c.name for c in configs]
        if len(set(names)) != len(names):
            raise ValueError(f"experiment names must be distinct: {names}")
        if len(configs) == 1:
            return BatchResult([self.run(command, configs[0])])

        loop = asyncio.get_running_loop()
        root = str(self.out_root) if self.out_root is not None else None
        workers = min(len(configs), self.settings.harness.max_workers)
        self.logger.info("batch_started", command=command, experiments=names, workers=workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tasks = [loop.run_in_executor(pool, _run_one, command, c, self.settings, root) for c in configs]
            outcomes = await asyncio.gather(*tasks)
        batch = BatchResult(list(outcomes))
        self.logger.info("batch_finished", command=command, exit_code=batch.exit_code)
        return batch


def _run_one(command: str, config: ExperimentConfig, settings: Settings, out_root: Optional[str]) -> RunOutcome:
    # Module level so the process pool can pickle it.
    return ExperimentOrchestrator(settings, out_root).run(command, config)
