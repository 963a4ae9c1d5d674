import os
from dotenv import load_dotenv

# Load environment variables
BASE_DIR = os.path.abspath(os.path.dirname(os.path.dirname(__file__)))
env_path = os.path.join(BASE_DIR, '.env')
if os.path.exists(env_path):
    load_dotenv(env_path)
else:
    parent_env = os.path.join(BASE_DIR, '..', '.env')
    if os.path.exists(parent_env):
        load_dotenv(parent_env)

class Config:
    LOG_LEVEL = os.getenv('FIREWATCH_LOG_LEVEL', 'INFO').upper()

    # Scenario used when the CLI is invoked without --scenario
    DEFAULT_SCENARIO = os.getenv(
        'FIREWATCH_SCENARIO',
        os.path.join(BASE_DIR, 'scenarios', 'reference_scenario.json')
    )
    OUTPUT_DIR = os.getenv('FIREWATCH_OUTPUT_DIR', os.path.join(BASE_DIR, 'output'))

    # JSON-lines planner diagnostics; disabled when unset
    PLANNER_DEBUG_PATH = os.getenv('FIREWATCH_PLANNER_DEBUG') or None

    MC_WORKERS = int(os.getenv('FIREWATCH_MC_WORKERS', '1'))

    # Filter / planner defaults, overridden by scenario files
    ROLLOUT_PARTICLES = int(os.getenv('FIREWATCH_ROLLOUT_PARTICLES', '200'))
    INIT_STD = float(os.getenv('FIREWATCH_INIT_STD', '20.0'))  # meters
    RESAMPLE_THRESHOLD = float(os.getenv('FIREWATCH_RESAMPLE_THRESHOLD', '0.5'))
    ROUGHENING_STD = float(os.getenv('FIREWATCH_ROUGHENING_STD', '1.0'))  # meters
    # per_vertex resamples each front vertex from its own share of the set likelihood
    RESAMPLING = os.getenv('FIREWATCH_RESAMPLING', 'per_vertex')
    # n_max = BUDGET_FACTOR * |Pi_T| when a scenario leaves the budget unset
    BUDGET_FACTOR = int(os.getenv('FIREWATCH_BUDGET_FACTOR', '4'))
