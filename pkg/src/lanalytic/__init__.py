"""Planar second-order elliptic operators with constant complex coefficients.

Classification and canonical reduction (:mod:`.opcore`), exact polynomial
algebra in ``(z, zbar)`` (:mod:`.polyzbar`), boundary geometry (:mod:`.geom`),
Dirichlet fitting by L-analytic polynomials (:mod:`.approx`), bump-functional
decay probes (:mod:`.probe`) and lacunary-series diagnostics (:mod:`.lacunary`).
"""
from .errors import *  # noqa: F401,F403
from .opcore import (
    IDENTITY,
    NSE,
    SE,
    CanonicalForm,
    CharacteristicRoots,
    EllipticOperator,
    Ellipticity,
    RealLinearMap,
    canonical_operator,
    char_roots,
    classify,
    map_apply,
    map_compose,
    map_inverse,
    map_jacobian,
    reduce,
    rotate_parameter,
)
from .polyzbar import (
    ONE,
    Z,
    ZBAR,
    BiPoly,
    LBasis,
    apply_operator,
    d,
    d_tau,
    dbar,
    evaluate,
    evaluate_grid,
    lanalytic_basis,
    pullback,
    pullback_basis,
    substitute_linear,
)
from .geom import (
    BoundaryCurve,
    ConformalMapFamily,
    SchwarzArc,
    boundary_quadrature,
    curve_from_map,
    make_disk,
    make_holder_map,
    make_poly_map,
    nearest_boundary_point,
    s_tau,
    schwarz,
    transform_curve,
)
from .approx import (
    FitResult,
    SweepReport,
    boundary_data,
    convergence_sweep,
    fit_dirichlet,
    max_principle_probe,
)
from .probe import (
    BumpFunctional,
    DecayReport,
    SolutionPair,
    TrigPoly,
    decay_experiment,
    derivative_check,
    eval_Mn,
    green_identity_check,
    make_bump,
    schwarz_consistency,
    trig_poly_bound,
)
from .lacunary import (
    LacunarySpec,
    check_conditions,
    h2_norm_psi_prime,
    l1_psi_second_lower_bound,
)

__version__ = "0.1.0"
