"""
Demo: myopic vs. non-myopic monitoring on the reference scenario
Runs a short episode for each controller at reduced particle counts and
prints the per-step tables side by side.
"""
import logging
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent))

from app.models.harness import ControllerSpec
from app.routes.simulation import apply_overrides
from app.services.environment_service import load_scenario
from app.services.episode_service import run_episode
from app.utils.report_formatter import get_formatter
from app.utils.trace_writer import write_fronts_json

SCENARIO = Path(__file__).parent / "scenarios" / "reference_scenario.json"
CONTROLLERS = ["static", "myopic", "lcb:2"]


def main():
    logging.basicConfig(level=logging.WARNING, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    print("\n" + "=" * 70)
    print("🔥 FireWatch demo: adaptive monitoring of a spreading front")
    print("=" * 70)

    scenario = apply_overrides(load_scenario(SCENARIO), n_particles=400, rollout_particles=60, steps=8)

    traces = []
    for name in CONTROLLERS:
        print(f"\n▶ Running {name} ...")
        trace = run_episode(scenario, ControllerSpec.parse(name), seed=scenario.rng_seed)
        traces.append(trace)
        get_formatter().format_episode(trace)

    output_path = write_fronts_json(traces, Path(__file__).parent / "output" / "demo_fronts.json")

    print("\n" + "=" * 70)
    for trace in traces:
        print(f"  {trace.controller:<10} mean RMSE {trace.rmse_series.mean():8.2f} m")
    print("=" * 70)
    print(f"\n📂 Fronts for plotting: {output_path}")


if __name__ == "__main__":
    main()
