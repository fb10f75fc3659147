"""
Fit configuration shared by both estimation paths and the baselines.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from gp.inference import PriorSpec, XPrior
from model.errors import DimensionMismatch
from model.types import Dataset, DesignMatrix
from optim.base import OptimOptions


class ThetaInit(BaseModel):
    """Explicit starting hyperparameters; omitted values use the data-driven defaults."""

    model_config = ConfigDict(frozen=True)

    w: Optional[float] = Field(default=None, gt=0)
    tau: Optional[float] = Field(default=None, gt=0)
    sigma2: Optional[float] = Field(default=None, gt=0)


class FitConfig(BaseModel):
    """
    Settings for one NSLFA fit.

    K defaults to the width of the design matrix and must match it when given.
    """

    model_config = ConfigDict(frozen=True)

    method: Literal["joint-map", "iterative"] = "joint-map"
    K: Optional[int] = Field(default=None, ge=1)
    x_prior: XPrior = XPrior.NORMAL
    optimizer: Literal["scg", "gd"] = "scg"
    center: bool = Field(default=True, description="Fit the GP to column-centered data and add the means back to the links")
    optim: OptimOptions = Field(default_factory=OptimOptions)
    outer_max: int = Field(default=50, ge=0, description="Iterative outer loops")
    outer_tol: float = Field(default=1e-6, gt=0, description="Relative marginal log-likelihood change")
    step2_max_iters: int = Field(default=100, ge=1)
    step2_restarts: int = Field(default=4, ge=0, description="Random perturbations besides the current point")
    step2_perturbation: float = Field(default=0.5, gt=0)
    theta_init: ThetaInit = Field(default_factory=ThetaInit)
    seed: int = 0

    @property
    def prior(self) -> PriorSpec:
        return PriorSpec(x_prior=self.x_prior)

    def check_against(self, y: Dataset, q: DesignMatrix) -> None:
        """Raise DimensionMismatch when data, design and K disagree."""
        if y.J != q.J:
            raise DimensionMismatch(f"data has J={y.J} columns but the design has {q.J} rows")
        if self.K is not None and self.K != q.K:
            raise DimensionMismatch(f"K={self.K} but the design has {q.K} columns")
        if q.K > q.J:
            raise DimensionMismatch(f"K={q.K} exceeds J={q.J}")
