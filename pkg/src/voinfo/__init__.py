"""Value of information for finite and smooth decision problems."""

from .errors import *  # noqa: F401,F403
from .geometry import (
    ActionSet,
    BeliefPolytope,
    SmoothBody,
    exposed_face,
    hull_reduce,
    in_hull,
    project_onto_polytope,
    quadratic_scoring_body,
    revealed_beliefs,
    support_function,
)
from .model import (
    DecisionProblem,
    InformationStructure,
    garble,
    load_problem,
    to_action_set,
    validate_information_structure,
)
from .analysis import (
    BoundCertificate,
    RegimeReport,
    classify_prior,
    confidence_set,
    indifference_kernel,
    indifference_seminorm,
    is_valuable,
    numeric_hessian,
    optimal_actions,
    theorem1_bounds,
    theorem2_bounds,
    theorem3_bounds,
    value_function,
    voi,
)

__version__ = "0.1.0"
