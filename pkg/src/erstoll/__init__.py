"""Two-class traffic equilibrium and toll analysis for a two-link
electric road system.

The deterministic user-equilibrium solver, pattern taxonomy, toll bands,
and a best-response simulator live in submodules:

* model - domain types (links, preferences, SoC pools, tolls, scenarios)
* equilibrium - analytic solver plus a brute-force oracle
* analysis - pattern labels, TTT/TCV/revenue, toll bands
* dynamics - day-to-day best-response simulation over discrete agents
* harness - config files, sweeps, presets, CSV output
* cli - the `erstoll` command
"""

from .analysis import (
    Metrics,
    PatternLabel,
    TollBand,
    band_containing,
    classify,
    is_conventional_so,
    is_ers_optimum,
    metrics,
    min_total_travel_time,
    toll_bands,
)
from .equilibrium import (
    ConvergenceError,
    EquilibriumResult,
    RegimeTag,
    brute_force_equilibrium,
    solve,
    threshold_soc,
    verify_equilibrium,
)
from .harness import (
    ConfigError,
    ResultRow,
    SweepSpec,
    apply_overrides,
    fig2_data,
    load_scenario,
    run_sweep,
    save_scenario,
    table1_scenario,
    table2_rows,
)
from .model import (
    INDIFFERENCE_EPS,
    DiscreteAgents,
    FixedToll,
    FreeToll,
    LinkParams,
    Network,
    Preferences,
    Scenario,
    SocDistribution,
    TollSystem,
    UniformContinuum,
    VehicleClass,
    bpr_time,
    charging_utility,
    utility,
)

__version__ = "0.1.0"

__all__ = [
    "INDIFFERENCE_EPS",
    "ConfigError",
    "ConvergenceError",
    "DiscreteAgents",
    "EquilibriumResult",
    "FixedToll",
    "FreeToll",
    "LinkParams",
    "Metrics",
    "Network",
    "PatternLabel",
    "Preferences",
    "RegimeTag",
    "ResultRow",
    "Scenario",
    "SocDistribution",
    "SweepSpec",
    "TollBand",
    "TollSystem",
    "UniformContinuum",
    "VehicleClass",
    "apply_overrides",
    "band_containing",
    "bpr_time",
    "brute_force_equilibrium",
    "charging_utility",
    "classify",
    "fig2_data",
    "is_conventional_so",
    "is_ers_optimum",
    "load_scenario",
    "metrics",
    "min_total_travel_time",
    "run_sweep",
    "save_scenario",
    "solve",
    "table1_scenario",
    "table2_rows",
    "threshold_soc",
    "toll_bands",
    "utility",
    "verify_equilibrium",
]
