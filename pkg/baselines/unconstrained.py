"""
Unconstrained comparator: the joint MAP fit with an all-ones design.
"""

import dataclasses
from typing import Optional

from estimator.joint_map import fit_joint_map
from estimator.settings import FitConfig
from model.types import Dataset, DesignMatrix, FactorScores, FitResult, Loadings


def fit_unconstrained(
    y: Dataset,
    K: int,
    cfg: Optional[FitConfig] = None,
    init: Optional[tuple[FactorScores, Loadings]] = None,
) -> FitResult:
    cfg = (cfg or FitConfig()).model_copy(update={"K": K, "method": "joint-map"})
    result = fit_joint_map(y, DesignMatrix.ones(y.J, K), cfg, init=init)
    return dataclasses.replace(result, method="unconstrained")
