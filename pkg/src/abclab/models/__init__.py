from abclab.models.base import ConcatSummary, ModelSpec, concat_summary
from abclab.models.counts import bernoulli_model, fixed_coin_model, geometric_model, poisson_model
from abclab.models.cross import cross_model_summarizer, cross_model_summary
from abclab.models.grf import GrfSpec, chain_spec, grf_model, lattice_edges
from abclab.models.ma import MaSpec, ma_model
from abclab.models.normal import normal_model, normal_pair

__all__ = [
    "ConcatSummary",
    "GrfSpec",
    "MaSpec",
    "ModelSpec",
    "bernoulli_model",
    "chain_spec",
    "concat_summary",
    "cross_model_summarizer",
    "cross_model_summary",
    "fixed_coin_model",
    "geometric_model",
    "grf_model",
    "lattice_edges",
    "ma_model",
    "normal_model",
    "normal_pair",
    "poisson_model",
]
