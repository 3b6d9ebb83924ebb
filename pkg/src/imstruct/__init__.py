"""Possibilistic inference on which covariates enter a Gaussian linear model."""

from .bayes import NIGHyper, credible_set, false_confidence_probability, log_marginal_likelihood, model_posterior
from .data import LoadedData, load_csv
from .elicit import shifted_prior, solve_gamma, upper_mean, upper_mean_curve
from .errors import DataError, DomainError, RankDeficiencyError, StaleTableError
from .linreg import (
    Dataset,
    ModelStructure,
    SubsetProjector,
    fit_subset,
    joint_contour_mc,
    log_relative_likelihood,
    profile_contour_fixed,
)
from .possibility import (
    Contour,
    MassFunction,
    extend,
    geometric_contour,
    grid_contour,
    most_diffuse,
    possibility_of,
    prob_to_poss,
    upper_expectation_monotone,
)
from .simulate import (
    CoverageConfig,
    CoverageReport,
    coverage_experiment,
    draw_prior_compatible_instance,
    false_confidence_experiment,
    validity_experiment,
)
from .structure import (
    PriorSpec,
    ReferenceTable,
    StructureContour,
    build_reference_table,
    cached_reference_table,
    confidence_set,
    enumerate_structures,
    map_structure,
    marginal_complexity_contour,
    penalized_profile_likelihood,
    structure_contour,
)

__version__ = "0.1.0"
