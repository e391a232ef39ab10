"""Prometheus metrics for training and inference runs."""

import time
from collections.abc import Generator
from contextlib import contextmanager
from pathlib import Path

from prometheus_client import (
    CollectorRegistry,
    Counter,
    Gauge,
    Histogram,
    disable_created_metrics,
    write_to_textfile,
)

from .logging import get_logger

logger = get_logger(__name__)

METRICS_FILE = "metrics.prom"

# Creation timestamps would make identical runs write different files
disable_created_metrics()


class MetricsCollector:
    """Centralized metrics collection and management.

    Each command starts from a fresh registry (see ``reset``).
    """

    def __init__(self) -> None:
        """Initialize the metrics collector."""
        self.reset()

    def reset(self) -> None:
        """Replace the registry and every metric with empty ones."""
        self.start_time = time.time()
        self.registry = CollectorRegistry()

        # Optimisation metrics
        self.optimizer_steps_total = Counter(
            "optimizer_steps_total",
            "Total number of optimizer steps",
            ["phase"],
            registry=self.registry,
        )
        self.optimizer_step_duration_seconds = Histogram(
            "optimizer_step_duration_seconds",
            "Time taken by one forward/backward/update step",
            ["phase"],
            buckets=(0.001, 0.005, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0),
            registry=self.registry,
        )
        self.last_loss = Gauge(
            "last_loss",
            "Most recent epoch loss",
            ["phase", "term"],
            registry=self.registry,
        )
        self.gradient_norm = Histogram(
            "gradient_norm",
            "Global gradient norm before clipping",
            ["phase"],
            buckets=(0.01, 0.1, 0.5, 1.0, 2.5, 5.0, 10.0, 50.0, 100.0),
            registry=self.registry,
        )

        # Inference metrics
        self.shots_decoded_total = Counter(
            "shots_decoded_total",
            "Total number of shots captioned by greedy decoding",
            registry=self.registry,
        )
        self.synopsis_entries = Gauge(
            "synopsis_entries",
            "Entries in the most recent synopsis per video",
            ["video"],
            registry=self.registry,
        )

        # Error metrics
        self.run_errors_total = Counter(
            "run_errors_total",
            "Total errors raised by commands",
            ["error_type", "command"],
            registry=self.registry,
        )

    def record_step(self, phase: str, duration: float, grad_norm: float) -> None:
        """Record one optimizer step."""
        self.optimizer_steps_total.labels(phase=phase).inc()
        self.optimizer_step_duration_seconds.labels(phase=phase).observe(duration)
        self.gradient_norm.labels(phase=phase).observe(grad_norm)

    def record_loss(self, phase: str, term: str, value: float) -> None:
        """Record the latest value of a loss term."""
        self.last_loss.labels(phase=phase, term=term).set(value)

    def record_decoded(self, count: int) -> None:
        """Record decoded shots."""
        self.shots_decoded_total.inc(count)

    def record_synopsis(self, video: str, entries: int) -> None:
        """Record the size of a synopsis."""
        self.synopsis_entries.labels(video=video).set(entries)

    def record_error(self, error_type: str, command: str) -> None:
        """Record command errors."""
        self.run_errors_total.labels(error_type=error_type, command=command).inc()

    @contextmanager
    def timed_step(self, phase: str) -> Generator[dict[str, float], None, None]:
        """Time a step; the caller stores the gradient norm in the yielded dict."""
        start_time = time.perf_counter()
        info: dict[str, float] = {"grad_norm": 0.0}
        try:
            yield info
        finally:
            self.record_step(phase, time.perf_counter() - start_time, info["grad_norm"])

    def export(self, directory: Path) -> Path:
        """Write the registry in Prometheus text format into ``directory``."""
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / METRICS_FILE
        write_to_textfile(str(path), self.registry)
        logger.debug("Metrics exported", path=str(path))
        return path


# Global metrics collector instance
metrics_collector = MetricsCollector()


def get_metrics_collector() -> MetricsCollector:
    """Get the global metrics collector instance."""
    return metrics_collector
