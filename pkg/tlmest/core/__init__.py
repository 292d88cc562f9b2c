"""Domain types shared by every solver."""

from .dataset import Dataset, check_compatible, concat_datasets
from .family import LossFamily
from .loss import WeightedObjective, glm_gradient, glm_hessian_vec, glm_loss
from .parameter import Parameter, as_parameter
from .regularizer import Regularizer, RegularizerKind, regularizer_dual_norm, regularizer_norm

__all__ = [
    "Dataset",
    "LossFamily",
    "Parameter",
    "Regularizer",
    "RegularizerKind",
    "WeightedObjective",
    "as_parameter",
    "check_compatible",
    "concat_datasets",
    "glm_gradient",
    "glm_hessian_vec",
    "glm_loss",
    "regularizer_dual_norm",
    "regularizer_norm",
]
