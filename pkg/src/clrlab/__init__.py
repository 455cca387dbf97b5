"""Numerical verification of CLR and Cwikel-type eigenvalue bounds on finite measure spaces."""

from .constants import clr_example_constants, constants_table, ksd_bounds
from .linalg import HermitianOperator, apply_fn, eigh, sandwich, singular_values, trace_positive_part
from .measure import FiniteMeasureSpace, WeightedFunction, lp_norm, weak_lp_norm
from .report import Sampler, SuiteResult, TrialReport, emit_report
from .schatten import SingularSpectrum, equiv_quasinorm, weak_schatten_norm
from .suites import SUITES, run_suite
from .torus import TorusGrid, dft, make_grid, multiplier

__version__ = "0.1.0"
