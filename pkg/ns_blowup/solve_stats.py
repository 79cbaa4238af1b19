"""Statistics collected while solving the integral equation."""

import time
import logging
from dataclasses import dataclass, field
from typing import Dict, List

logger = logging.getLogger('ns_blowup.solve_stats')


@dataclass
class PicardStats:
    """Statistics for tracking Picard windows and failures."""

    # Window metrics
    windows_solved: int = 0
    windows_failed: int = 0
    nodes_solved: int = 0

    # Iteration metrics
    total_sweeps: int = 0
    max_sweeps: int = 0
    max_update: float = 0.0

    # Horizon metrics
    horizon_evaluations: int = 0
    smallest_window: float = float('inf')

    # Timing
    start_time: float = field(default_factory=time.time)
    total_solve_time: float = 0.0

    # Failure tracking
    failures_by_reason: Dict[str, int] = field(default_factory=dict)
    failed_window_starts: List[float] = field(default_factory=list)

    def record_window(self, steps: int, length: float, sweeps: int, update: float, solve_time: float = 0.0):
        """Record a converged window."""
        self.windows_solved += 1
        self.nodes_solved += steps
        self.total_sweeps += sweeps
        self.max_sweeps = max(self.max_sweeps, sweeps)
        self.max_update = max(self.max_update, update)
        self.smallest_window = min(self.smallest_window, length)
        self.total_solve_time += solve_time

    def record_failure(self, window_start: float, reason: str):
        """Record a window that did not converge."""
        self.windows_failed += 1
        self.failed_window_starts.append(window_start)
        if reason not in self.failures_by_reason:
            self.failures_by_reason[reason] = 0
        self.failures_by_reason[reason] += 1

    def record_horizon_search(self):
        self.horizon_evaluations += 1

    def get_average_sweeps(self) -> float:
        """Average Picard sweeps per converged window."""
        if self.windows_solved == 0:
            return 0.0
        return self.total_sweeps / self.windows_solved

    def get_elapsed_time(self) -> float:
        """Get elapsed time since start."""
        return time.time() - self.start_time

    def get_summary(self) -> str:
        """Get a formatted summary of statistics."""
        smallest = self.smallest_window if self.windows_solved else 0.0
        summary = [
            "\n" + "=" * 60,
            "Picard Solve Summary",
            "=" * 60,
            f"Windows solved: {self.windows_solved}",
            f"Windows failed: {self.windows_failed}",
            f"Time nodes advanced: {self.nodes_solved}",
            f"Smallest window: {smallest:.6g}",
            "",
            f"Total sweeps: {self.total_sweeps}",
            f"Average sweeps per window: {self.get_average_sweeps():.2f}",
            f"Max sweeps in a window: {self.max_sweeps}",
            f"Max final update: {self.max_update:.3e}",
            f"Horizon searches: {self.horizon_evaluations}",
            "",
            f"Solve time: {self.total_solve_time:.2f}s",
            f"Total time: {self.get_elapsed_time():.1f}s",
        ]

        if self.failures_by_reason:
            summary.append("")
            summary.append("Failures by reason:")
            for reason, count in sorted(self.failures_by_reason.items(), key=lambda x: x[1], reverse=True):
                summary.append(f"  {reason}: {count}")
            starts = ", ".join(f"{t:.6g}" for t in self.failed_window_starts[:10])
            summary.append(f"Failed window starts: {starts}")

        summary.append("=" * 60)
        return "\n".join(summary)

    def log_summary(self):
        """Log the statistics summary."""
        logger.info(self.get_summary())
