"""Pseudospectral simulation and numerical-verification lab for the
dispersive generalized Benjamin-Ono-Zakharov-Kuznetsov equation

    u_t - Dx^(alpha+1) u_x + u_xyy + u u_x = 0,   0 <= alpha <= 1,

on a large periodic box standing in for the plane.  The package provides
the multiplier calculus, the weighted cutoff family, a dealiased
integrating-factor solver, the diagnostic functionals the regularity and
smoothing statements are about, and a commutator laboratory for the
operator-norm and inequality harnesses.
"""

__version__ = "0.1.0"

from .grid import (  # noqa: F401
    Field,
    FieldError,
    Grid,
    GridError,
    field_norms,
    load_field,
    make_grid,
    save_field,
    to_physical,
    to_spectral,
)
from .fourier import (  # noqa: F401
    BumpProfile,
    MultiplierError,
    MultiplierSymbol,
    apply_multiplier,
    bessel,
    bessel_inverse,
    bessel_x,
    bessel_y,
    default_bump,
    hilbert_x,
    linear_propagate,
    lp_project_x,
    parse_symbol,
    riesz,
    riesz_x,
    riesz_y,
)
from .cutoffs import (  # noqa: F401
    CutoffError,
    CutoffFamily,
    check_properties,
    eval_shifted,
    make_family,
    weight_field,
)
from .diagnostics import (  # noqa: F401
    DiagnosticRecord,
    DiagnosticSeries,
    DiagnosticsError,
    channel_smoothing_increment,
    conserved_quantities,
    decay_fit,
    half_space_norm,
    kato_quantities,
    windowed_norm,
)
from .evolve import (  # noqa: F401
    BlowUpError,
    SimState,
    SolverConfig,
    SolverError,
    nonlinear_term,
    simulate,
    step,
    suggest_dt,
)
from .datum import DatumRecipe, DatumError, make_datum  # noqa: F401
from .config import ConfigError, ExperimentConfig, load_config, parse_config, s_alpha  # noqa: F401
