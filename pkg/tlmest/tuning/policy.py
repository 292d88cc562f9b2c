"""Named rules for the pooled penalty level lambda_P."""

from __future__ import annotations

from enum import Enum

from tlmest.common.errors import ConfigError

POLICY_VERSION = "1"


class LambdaPolicy(str, Enum):
    # lambda_P chosen by cross validation on the pool
    CV = "cv"
    # cross-validated lambda_P plus a quarter of the vanilla level
    STRONGER = "stronger"
    # half of the cross-validated target-only level
    HALF_VANILLA = "half-vanilla"

    @classmethod
    def parse(cls, value) -> "LambdaPolicy":
        try:
            return cls(str(value).strip().lower())
        except ValueError as e:
            raise ConfigError(f"unknown lambda policy {value!r}") from e


def apply_policy(policy: LambdaPolicy, lambda_pool_cv: float, lambda_vanilla: float) -> float:
    policy = LambdaPolicy.parse(policy)
    if policy is LambdaPolicy.CV:
        return float(lambda_pool_cv)
    if policy is LambdaPolicy.STRONGER:
        return float(lambda_pool_cv + 0.25 * lambda_vanilla)
    return float(0.5 * lambda_vanilla)


def policy_label(policy: LambdaPolicy) -> str:
    return f"{LambdaPolicy.parse(policy).value}@v{POLICY_VERSION}"
