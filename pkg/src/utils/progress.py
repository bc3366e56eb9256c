import time
from dataclasses import dataclass, field

from rich.console import Console
from rich.live import Live
from rich.style import Style
from rich.table import Table
from rich.text import Text

# Standard output is reserved for machine-readable results
console = Console(stderr=True)

DONE = "Done"
ERROR = "Error"


@dataclass
class TaskState:
    tag: str | None = None
    status: str = ""
    done: int = 0
    total: int = 0
    unit: str = "chunks"
    started: float = field(default_factory=time.monotonic)

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.started


class ExperimentProgress:
    """Live table of running experiments: chunks completed and wall time per task."""

    def __init__(self):
        self.tasks: dict[str, TaskState] = {}
        self.table = Table(show_header=False, box=None, padding=(0, 1))
        self.live = Live(self.table, console=console, refresh_per_second=4)
        self.started = False
        self.enabled = True

    def start(self):
        if self.enabled and not self.started:
            self.live.start()
            self.started = True

    def stop(self):
        if self.started:
            self.live.stop()
            self.started = False

    def _task(self, task_name: str, tag: str | None) -> TaskState:
        task = self.tasks.setdefault(task_name, TaskState())
        if tag:
            task.tag = tag
        return task

    def begin(self, task_name: str, tag: str | None, total: int, unit: str = "chunks"):
        """Register (or restart) a task that will complete `total` units of work."""
        self.tasks[task_name] = TaskState(tag=tag, status="Simulating", total=total, unit=unit)
        self._refresh()

    def advance(self, task_name: str, done: int):
        task = self._task(task_name, None)
        task.done = done
        self._refresh()

    def update_status(self, task_name: str, tag: str | None = None, status: str = ""):
        task = self._task(task_name, tag)
        if status:
            task.status = status
        self._refresh()

    def _refresh(self):
        if not self.started:
            return
        self.table.columns.clear()
        self.table.add_column(width=100)

        for task_name, task in sorted(self.tasks.items()):
            if task.status == DONE:
                style, symbol = Style(color="green", bold=True), "✓"
            elif task.status.startswith(ERROR):
                style, symbol = Style(color="red", bold=True), "✗"
            else:
                style, symbol = Style(color="yellow"), "⋯"

            line = Text()
            line.append(f"{symbol} ", style=style)
            line.append(f"{task_name.replace('_', ' ').title():<20}", style=Style(bold=True))
            if task.tag:
                line.append(f"[{task.tag}] ", style=Style(color="cyan"))
            line.append(task.status, style=style)
            if task.total:
                line.append(f" {task.done}/{task.total} {task.unit}", style=style)
            line.append(f" {task.elapsed:.1f}s", style=Style(dim=True))
            self.table.add_row(line)


# Create a global instance
progress = ExperimentProgress()
