"""Partial-identification bounds for multi-valued probabilities of causation.

Compute closed-form lower/upper bounds for conjunctive counterfactual
queries from experimental and observational distributions, verify them
against an exact response-type LP oracle at small dimension, and generate
ground-truth instances for soundness and tightness experiments.
"""

from ._simplex import BACKEND as kernel_backend
from .bounds import (
    BoundReport,
    Interval,
    baseline_for_query,
    bound_query,
    bounds_for_canonical,
    frechet_baseline,
    pn_bounds,
    pns_k_bounds,
    prep_bounds,
    psub_bounds,
)
from .dist import (
    Dataset,
    Dims,
    dataset_from_counts,
    dataset_from_json,
    load_dataset,
    save_dataset,
    squarify,
    treatment_marginal,
    validate_dataset,
)
from .lp import LpProblem, build_lp, format_lp_text, oracle_bounds, solve
from .query import (
    Atom,
    CanonicalQuery,
    Family,
    Query,
    canonicalize,
    parse_query,
    render_query,
)
from .scm import (
    LatentScm,
    ScmJoint,
    derive_dataset,
    mix_seed,
    random_dataset_rejection,
    random_joint,
    random_latent,
    true_probability,
)

__version__ = "0.1.0"
