from .generate import (KERNELS, SCENARIOS, SPARSITIES, Layout, ScenarioSpec, SimulatedPanel,
                       gen_covariates, gen_locations, gp_paths, simulate_panel)
from .catalog import BANDS, THRESHOLDS, calibrate_thresholds, threshold_for
from .study import (DEFAULT_METHODS, run_global_replication, run_global_study, run_replication, run_study,
                    summarize, summarize_global)
from .reproduce import TABLES, Check, Reproduction, reproduce
