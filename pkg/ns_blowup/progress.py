"""Progress tracking and display for Picard solves."""

import time

from rich.console import Console
from rich.progress import (
    BarColumn,
    Progress,
    SpinnerColumn,
    TaskProgressColumn,
    TextColumn,
    TimeRemainingColumn,
)
from rich.table import Table


class SolveProgress:
    """Track and display solve progress with rich."""

    def __init__(self, final_time, console=None):
        """Initialize progress tracker.

        Args:
            final_time: Time the solve has to reach
            console: Optional rich Console (stderr by default)
        """
        self.console = console or Console(stderr=True)
        self.final_time = final_time
        self.progress = Progress(
            SpinnerColumn(),
            TextColumn("[bold blue]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            TimeRemainingColumn(),
            console=self.console,
        )
        self.task_id = None
        self.windows = 0
        self.start_time = None

    def start(self, description="Solving"):
        """Start progress display."""
        self.start_time = time.time()
        self.progress.start()
        self.task_id = self.progress.add_task(description, total=self.final_time)

    def stop(self):
        """Stop progress display."""
        self.progress.stop()

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.stop()
        return False

    def on_window(self, t_reached, t_final):
        """Callback for picard_solve after every accepted window."""
        self.windows += 1
        if self.task_id is not None:
            self.progress.update(
                self.task_id,
                completed=min(t_reached, t_final),
                description=f"t = {t_reached:.4g} / {t_final:.4g} | windows: {self.windows}",
            )

    def display_summary(self, stats, traj, title="Simulation Summary"):
        """Display final summary statistics.

        Args:
            stats: PicardStats of the solve
            traj: Resulting Trajectory
            title: Table title
        """
        elapsed = time.time() - self.start_time if self.start_time else stats.get_elapsed_time()
        style = "green" if traj.status.value == 'completed' else "red"
        table = Table(title=title, show_header=False, border_style=style)
        table.add_column("Metric", style="cyan")
        table.add_column("Value", style="yellow")

        table.add_row("Status", f"[{style}]{traj.status.value}[/{style}]")
        table.add_row("Time Reached", f"{traj.final_time:.6g}")
        table.add_row("Nodes", str(len(traj)))
        table.add_row("Windows Solved", str(stats.windows_solved))
        table.add_row("Picard Sweeps", f"{stats.total_sweeps} (max {stats.max_sweeps} per window)")
        table.add_row("Max Final Update", f"{stats.max_update:.3e}")
        if stats.failures_by_reason:
            reasons = ", ".join(f"{k}: {v}" for k, v in stats.failures_by_reason.items())
            table.add_row("Failures", reasons)
        table.add_row("Total Time", f"{elapsed:.1f} seconds")

        self.console.print()
        self.console.print(table)
        self.console.print()
