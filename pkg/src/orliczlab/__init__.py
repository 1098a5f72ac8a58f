"""orliczlab: a numerical laboratory for gauge-driven mapping bounds.

Library layout:

* :mod:`orliczlab.gauges`         -- monotone gauges and generalized inverses
* :mod:`orliczlab.conditions`     -- convergence classification of the growth conditions
* :mod:`orliczlab.extremal`       -- the extremal radial profile and its bounds
* :mod:`orliczlab.counterexample` -- the lattice shear construction at finite depth
* :mod:`orliczlab.oscillation`    -- mean-oscillation functionals and point tests
* :mod:`orliczlab.modulus`        -- ring moduli, closed forms and the grid oracle
* :mod:`orliczlab.distortion`     -- model maps and pointwise distortion bounds
* :mod:`orliczlab.service`        -- FastAPI wrapper
* :mod:`orliczlab.cli`            -- thin command-line client
"""

from .conditions import (
    ConvergenceVerdict,
    a_star,
    boundary_criterion,
    calderon_condition,
    condition_equivalence_report,
    inverse_tail_condition,
    lehto_integral,
    lemma61_bound_check,
)
from .constants import ConstantsConfig, DEFAULT_CONSTANTS
from .counterexample import (
    CounterexampleModel,
    build_counterexample,
    check_diameter,
    check_oscillation,
    energy_budget,
    eval_construction,
    hausdorff_lower,
)
from .distortion import (
    ChordalGap,
    ModelMap,
    chordal_distance,
    distortion_bound,
    fmo_bound,
    holder_check,
    identity_map,
    kf_numeric,
    radial_stretch,
    shear_map,
)
from .extremal import (
    ExtremalProfile,
    build_profile,
    cube_diameter_bound,
    hausdorff_area_bound,
    radial_energy,
    verify_calderon_pair,
)
from .gauges import (
    GeneralizedInverse,
    OrliczFunction,
    clamp_below_one,
    eval_inverse,
    parse_gauge,
    power_compose,
    shift_normalize,
)
from .modulus import (
    AdmissibleDensity,
    ModulusResult,
    RingDomain,
    grid_modulus_2d,
    hesse_ziemer_check,
    ring_upper_bound,
    spheres_lower_bound,
    surface_norm,
)
from .oscillation import (
    OscillationField,
    build_example1,
    build_example2,
    fmo_at_point,
    mean_oscillation,
    parse_field,
)
from .reports import VerificationReport
from .weights import RadialWeight, parse_weight

__version__ = "0.1.0"
