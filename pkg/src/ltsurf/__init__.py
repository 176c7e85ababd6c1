"""ltsurf: simulate jump-diffusion semimartingales against a moving surface,
estimate local time three independent ways, and verify change-of-variables
formulas term by term on each simulated path."""

from .calculus import (LEBESGUE, MeasureSpec, continuous_qv_measure,
                       ito_integral, jump_sum, local_time_time_integral,
                       measure_integral, stieltjes_integral)
from .errors import (ConfigError, IncompatibleScenarioError, LtsurfError,
                     NumericalAbort)
from .formulas import (Branch, FormulaReport, GeneratorSpec,
                       PiecewiseSurfaceFunction, coupled_eps,
                       coupled_mollifier_n, smooth_psf, verify_general,
                       verify_jump_ltc, verify_ltc_diffusion,
                       verify_smooth_fit, verify_surfaces_strong,
                       verify_tanaka)
from .harness import (EnsembleSummary, ScenarioConfig, compare_estimators,
                      convergence_study, emit_bundles, envelope_table,
                      run_scenario)
from .localtime import (DEFAULT_MOLLIFIER, LocalTimeSeries, MollifierSpec,
                        local_time_mollifier, local_time_occupation,
                        local_time_tanaka_residual, occupation_formula_check)
from .paths import (JumpLaw, JumpTrain, PathBundle, SdeSpec, TimeGrid,
                    build_grid, simulate_brownian, simulate_compound_poisson,
                    simulate_jump_diffusion, two_point)
from .scenarios import (REGISTRY, SURFACES, build_parts, evaluate_variant,
                        list_scenarios)
from .surfaces import (Surface, constant_surface, envelope_path,
                       moreau_envelope, pathwise_variation)

__version__ = "0.1.0"
