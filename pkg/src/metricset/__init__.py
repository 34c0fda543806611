"""Exact rational evaluation of metric set formulas and finite model factory."""

from .core import FinMetric, hausdorff, metric_defect, pointset_dist, rat, rat_str
from .errors import (CapExceeded, CaptureError, DegenerateFormula,
                     EmptyStructure, IllTyped, InsufficientDepth, InvalidGauge,
                     MetricsetError, NoWitness, ParseError, UnboundVariable,
                     UnsupportedFormula)
from .formulas import (epsilon_phi, count_e, discretize, expand_luk_macros,
                       free_vars, parse, print_formula, schema, v_of)
from .semantics import (LeStructure, MetricSetStructure, completion,
                        d_e_matrix, eval_dis, eval_e, eval_luk, eval_sq,
                        induced_le, load_structure, save_structure)
from .translate import (AxiomReport, axiom_excision, axiom_h_ext,
                        certify_mcnaughton, eval_max_anf, excision_defect,
                        expand_affine_clamps, luk_axiom_excision,
                        luk_axiom_ext, mcnaughton, prenex_max_anf,
                        to_e, to_luk_condition, to_sq)
from .trees import (Gauge, QuotientModel, TreeUniverse, e_s,
                    enumerate_universe, pseudo_finite_gauge, quine_atoms_check,
                    quotient_model, rho_s, v_sigma)
from .verify import (WitnessResult, chain_report, discreteness_spectrum,
                     exc_search, find_extension, format_chain_report,
                     pair_distance_oracle, russell_gap, wiener_pair)

__version__ = "0.1.0"
