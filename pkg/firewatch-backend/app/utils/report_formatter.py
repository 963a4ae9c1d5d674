"""
Console Report Formatter
Rich tables for episode, Monte-Carlo and scenario summaries, with a plain
text fallback when rich is not installed.
"""
import io
import logging
from typing import List, Optional

import numpy as np

from app.models.harness import EpisodeTrace, MonteCarloReport
from app.models.scenario import Scenario

logger = logging.getLogger(__name__)

try:
    from rich import box
    from rich.console import Console
    from rich.panel import Panel
    from rich.table import Table
    from rich.text import Text
    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False
    logger.warning("Rich library not available - install with: pip install rich")


class ReportFormatter:
    """Renders summaries to the terminal and returns the rendered text."""

    def __init__(self, quiet: bool = False, width: int = 100):
        self.quiet = quiet
        if RICH_AVAILABLE:
            self.console = Console(record=True, width=width, file=io.StringIO() if quiet else None)
        else:
            self.console = None

    def _header(self, title: str) -> None:
        self.console.print(Panel(Text(title, style="bold magenta", justify="center"),
                                 box=box.DOUBLE, border_style="bright_blue"))

    def _emit(self, lines: List[str]) -> str:
        text = "\n".join(lines) + "\n"
        if not self.quiet:
            print(text, end="")
        return text

    def format_episode(self, trace: EpisodeTrace) -> str:
        if self.console is None:
            return self._emit(self._episode_fallback(trace))

        self.console.export_text(clear=True)
        self._header(f"🔥 EPISODE  {trace.controller}  seed={trace.seed}")
        table = Table(show_header=True, header_style="bold cyan", box=box.SIMPLE)
        for column in ("Step", "RMSE [m]", "ESS", "Detections", "RWD", "Agent (x, y)", "Control"):
            table.add_column(column, justify="right")
        for r in trace.records:
            control = "-" if r.control is None else f"{r.control['speed']:g} m/s @ {r.control['heading']:g}°"
            flags = " ⚠" if r.warnings or r.diverged else ""
            table.add_row(
                str(r.step), f"{r.rmse:.2f}{flags}", f"{r.ess:.1f}", str(r.n_measurements),
                f"{r.rwd:.4f}", f"({r.agent_position[0]:.0f}, {r.agent_position[1]:.0f})", control,
            )
        self.console.print(table)
        self.console.print(f"[dim]scenario {trace.scenario_hash[:16]}…[/dim]")
        return self.console.export_text()

    def format_monte_carlo(self, report: MonteCarloReport) -> str:
        if self.console is None:
            return self._emit(self._monte_carlo_fallback(report))

        self.console.export_text(clear=True)
        self._header(f"🎲 MONTE-CARLO  {report.trials} trials")
        table = Table(show_header=True, header_style="bold cyan", box=box.SIMPLE)
        table.add_column("Controller", style="bright_yellow")
        for column in ("mean log10 RMSE", "first step", "last step", "std (last)"):
            table.add_column(column, justify="right")
        ranked = sorted(report.controllers, key=lambda name: float(report.mean(name).mean()))
        for name in ranked:
            mean, std = report.mean(name), report.std(name)
            table.add_row(name, f"{mean.mean():.4f}", f"{mean[0]:.4f}", f"{mean[-1]:.4f}", f"{std[-1]:.4f}")
        self.console.print(table)
        return self.console.export_text()

    def format_scenario(self, scenario: Scenario, digest: str) -> str:
        n = scenario.grid.cells_per_axis
        rows = [
            ("Grid", f"{scenario.grid.side_length:g} m, {n}x{n} cells"),
            ("Front", f"N={scenario.n_vertices}, ignition {scenario.ignition.center}"),
            ("Sensor", f"R_a={scenario.sensor.range:.2f} m, σ_z={scenario.sensor.noise_std:g} m, "
                       f"λ={scenario.sensor.intensity:g}"),
            ("Actions", f"{len(scenario.action_set)} controls, heading convention {scenario.heading_convention}"),
            ("Simulation", f"{scenario.sim_steps} steps of {scenario.dt:g} s, N_s={scenario.filter.n_particles}"),
            ("Risk", f"mean {float(np.mean(scenario.risk.values)):.3f}, max {float(np.max(scenario.risk.values)):.3f}"),
            ("Hash", digest),
        ]
        if self.console is None:
            return self._emit(["Scenario OK"] + [f"  {k:<11} {v}" for k, v in rows])

        self.console.export_text(clear=True)
        self._header("✅ SCENARIO OK")
        table = Table(show_header=False, box=box.SIMPLE)
        table.add_column("Field", style="bright_yellow", width=12)
        table.add_column("Value", style="white")
        for key, value in rows:
            table.add_row(key, value)
        self.console.print(table)
        return self.console.export_text()

    def _episode_fallback(self, trace: EpisodeTrace) -> List[str]:
        lines = [f"EPISODE {trace.controller} seed={trace.seed}",
                 f"{'step':>5} {'rmse':>10} {'ess':>8} {'det':>5} {'rwd':>8}"]
        for r in trace.records:
            lines.append(f"{r.step:>5} {r.rmse:>10.2f} {r.ess:>8.1f} {r.n_measurements:>5} {r.rwd:>8.4f}")
        return lines

    def _monte_carlo_fallback(self, report: MonteCarloReport) -> List[str]:
        lines = [f"MONTE-CARLO {report.trials} trials", f"{'controller':<16} {'mean log10 rmse':>16}"]
        for name in report.controllers:
            lines.append(f"{name:<16} {float(report.mean(name).mean()):>16.4f}")
        return lines


# Global formatter instance
_formatter: Optional[ReportFormatter] = None


def get_formatter() -> ReportFormatter:
    """Get singleton formatter instance"""
    global _formatter
    if _formatter is None:
        _formatter = ReportFormatter()
    return _formatter
