"""Declarative description of one simulated study."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Tuple

from tlmest.common.errors import ConfigError
from tlmest.common.schema import check_keys
from tlmest.core import LossFamily


class Design(str, Enum):
    # X ~ N(0, I)
    HOMO = "homo"
    # Sigma_k = 2 Lambda_k^T Lambda_k / (3p) with Lambda_k of 1.5p rows
    HETERO = "hetero"
    # Sigma_0 = I, sources alternate I + cZ and I - cZ for one GOE draw Z
    GOE = "goe"


class CoeffFamily(str, Enum):
    L0 = "l0"
    L1 = "l1"
    H_SWEEP = "h_sweep"
    LOW_RANK = "low_rank"


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Args:
        name: scenario id written into result records
        design: covariate law
        coeff_family: coefficient recipe
        p: vector dimension
        d1, d2: matrix dimensions for the low-rank recipe
        rank: rank r of the target matrix
        sparsity: nonzeros of the target vector; 0.04p (0.03p for h_sweep) when omitted
        target_size: n_0
        source_sizes: n_k of each source, k = 1..K
        informative_count: the first |A| sources are informative
        contrast_level: h of the h_sweep recipe
        goe_c: perturbation size c of the GOE design
        family: squared (identity link) or logit
        seed: master seed of the study
    """

    name: str = "custom"
    design: Design = Design.HOMO
    coeff_family: CoeffFamily = CoeffFamily.L0
    p: int = 500
    d1: int = 20
    d2: int = 20
    rank: int = 3
    sparsity: Optional[int] = None
    target_size: int = 250
    source_sizes: Tuple[int, ...] = (500, 500, 500, 500, 500)
    informative_count: Optional[int] = None
    contrast_level: float = 1.0
    goe_c: float = 0.2
    family: LossFamily = LossFamily.SQUARED_IDENTITY
    seed: int = 0

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "design", Design(self.design))
            object.__setattr__(self, "coeff_family", CoeffFamily(self.coeff_family))
        except ValueError as e:
            raise ConfigError(f"scenario: {e}") from e
        object.__setattr__(self, "family", LossFamily.parse(self.family))
        object.__setattr__(self, "source_sizes", tuple(int(n) for n in self.source_sizes))
        sources = len(self.source_sizes)
        if sources < 1:
            raise ConfigError("scenario needs at least one source")
        if self.informative_count is None:
            object.__setattr__(self, "informative_count", sources)
        if not 0 <= self.informative_count <= sources:
            raise ConfigError(
                f"informative_count {self.informative_count} outside [0, {sources}]"
            )
        sizes = [self.p, self.d1, self.d2, self.rank, self.target_size, *self.source_sizes]
        if min(sizes) < 1:
            raise ConfigError("all scenario sizes must be >= 1")
        if self.sparsity is not None and not 1 <= self.sparsity <= self.p:
            raise ConfigError(f"sparsity {self.sparsity} outside [1, p={self.p}]")
        if self.is_matrix and 2 * self.rank > min(self.d1, self.d2):
            raise ConfigError("low-rank recipe needs 2 * rank <= min(d1, d2)")
        if self.contrast_level < 0 or self.goe_c < 0:
            raise ConfigError("contrast_level and goe_c must be >= 0")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))
        if self.family is LossFamily.LOGISTIC_LOGIT and not self.is_matrix:
            raise ConfigError("the logit family is only generated for the low-rank recipe")

    @property
    def is_matrix(self) -> bool:
        return self.coeff_family is CoeffFamily.LOW_RANK

    @property
    def sources(self) -> int:
        return len(self.source_sizes)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return (self.target_size, *self.source_sizes)

    @property
    def support(self) -> int:
        if self.sparsity is not None:
            return self.sparsity
        share = 0.03 if self.coeff_family is CoeffFamily.H_SWEEP else 0.04
        return max(1, int(round(share * self.p)))

    def with_overrides(self, **changes: Any) -> "ScenarioConfig":
        values = self.to_dict()
        values.update(changes)
        return ScenarioConfig.from_dict(values)

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values["design"] = self.design.value
        values["coeff_family"] = self.coeff_family.value
        values["family"] = self.family.value
        values["source_sizes"] = list(self.source_sizes)
        return values

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScenarioConfig":
        check_keys(cls, data, "scenario")
        try:
            return cls(**dict(data))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"scenario: {e}") from e
