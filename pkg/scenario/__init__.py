from scenario.builder import (
    Numerics,
    Scenario,
    build_scenario,
    check_schema,
    load_scenario,
    scenario_from_text,
)
from scenario.loader import ScenarioDocument, load_scenario_file, parse_scenario
