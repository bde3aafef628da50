"""Moebius-twisted exponential sums, Vaughan's identity and the
irrationality-exponent bounds, as executable computations."""
import os as _os

import numba as _numba

if "NUMBA_THREADING_LAYER" not in _os.environ:
    # skip probing an outdated TBB (noisy warning), keep the fallbacks
    _numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

from .arith import (CoeffQuery, MobiusTable, SpfTable, Tables, build_tables,
                    divisor_count, gamma_coeff, tau_coeff)
from .diophantine import (GOLDEN, Convergent, ExplicitCF, FixedPointAlpha,
                          PrescribedExponent, QSelection, QuadraticSurd,
                          alpha_fixed_point, cf_terms, check_qgrowth, convergents,
                          estimate_eta, format_alpha, parse_alpha, select_q)
from .errors import (CapacityError, ExpsumError, InsufficientTermsError,
                     InvariantError, PrecisionError, SelectionError)
from .expsum import (ComplexSum, VaughanDecomposition, linear_sum, mobius_sum,
                     phase, type1_sum, type2_sum, vaughan_decompose)

__version__ = "0.1.0"
