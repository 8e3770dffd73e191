"""rankdiv: rank-statistic f-divergence estimation between sampled
distributions, sliced extensions to R^d, and rank-proximal particle transport.
"""

from .backend import active_backend, use_backend
from .divergence import (
    DivergenceEstimate,
    TheoryBounds,
    continuous_f_divergence,
    discrete_f_divergence,
    rank_divergence,
    rank_divergence_exact,
    theory_bounds,
    tv_isl_identity_check,
)
from .entropy import EntropyKind, EntropySpec, derivative, eval_f, lipschitz_bound
from .sliced import (
    DirectionSet,
    SampleSet,
    axis_corrected_divergence,
    project,
    sample_directions,
    sliced_rank_divergence,
)
from .transport import (
    CoRptConfig,
    ParticleState,
    TransportConfig,
    co_rpt_step,
    rank_energy,
    rank_energy_gradient,
    rank_prox,
    rpt_step,
    run_transport,
    toy_target_samples,
)
from .univariate import (
    Provenance,
    RankHistogram,
    Samples1D,
    bernstein_basis,
    bernstein_basis_derivative,
    empirical_cdf,
    empirical_quantile,
    rank_count,
    rank_pmf_counted,
    rank_pmf_exact,
    rank_pmf_smoothed,
    smoothed_cdf,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "active_backend",
    "use_backend",
    "EntropyKind",
    "EntropySpec",
    "eval_f",
    "derivative",
    "lipschitz_bound",
    "Samples1D",
    "RankHistogram",
    "Provenance",
    "bernstein_basis",
    "bernstein_basis_derivative",
    "empirical_cdf",
    "smoothed_cdf",
    "empirical_quantile",
    "rank_count",
    "rank_pmf_counted",
    "rank_pmf_smoothed",
    "rank_pmf_exact",
    "DivergenceEstimate",
    "TheoryBounds",
    "discrete_f_divergence",
    "rank_divergence",
    "rank_divergence_exact",
    "continuous_f_divergence",
    "tv_isl_identity_check",
    "theory_bounds",
    "SampleSet",
    "DirectionSet",
    "sample_directions",
    "project",
    "sliced_rank_divergence",
    "axis_corrected_divergence",
    "TransportConfig",
    "CoRptConfig",
    "ParticleState",
    "rank_energy",
    "rank_energy_gradient",
    "rank_prox",
    "rpt_step",
    "co_rpt_step",
    "run_transport",
    "toy_target_samples",
]
