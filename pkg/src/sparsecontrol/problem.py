"""Problem definition: tracking objective weights, control budget, grids,
diffusion, reaction term, initial datum and target."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import (AT_NODES, DiffusionTensor, SpaceGrid, SpaceTimeField,
                   TimeGrid)
from .nonlinearity import (NonlinearitySpec, auto_truncation_level,
                           with_truncation)


@dataclass(eq=False)
class ProblemSpec:
    """Everything defining one control problem instance.

    kappa is the quadratic control-cost weight (strictly positive), gamma the
    per-time-slice l1 budget.  Treat instances as immutable; the assembled
    elliptic operator is cached on first use.
    """

    kappa: float
    gamma: float
    grid: SpaceGrid
    tgrid: TimeGrid
    diffusion: DiffusionTensor
    nonlinearity: NonlinearitySpec
    y0: np.ndarray
    yd: SpaceTimeField

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.diffusion.n_dim != self.grid.n_dim:
            raise ValueError("diffusion tensor dimension does not match the grid")
        self.y0 = np.asarray(self.y0, dtype=float)
        if self.y0.shape != (self.grid.n_nodes,):
            raise ValueError(f"y0 has shape {self.y0.shape}, "
                             f"expected ({self.grid.n_nodes},)")
        if not np.all(np.isfinite(self.y0)):
            raise ValueError("y0 must be finite")
        if self.yd.slice_semantics != AT_NODES:
            raise ValueError("target yd must be an at-nodes field")
        if self.yd.grid != self.grid or self.yd.tgrid != self.tgrid:
            raise ValueError("target yd lives on different grids")

    @cached_property
    def operator(self):
        from .pde import EllipticOperator

        return EllipticOperator(self.grid, self.diffusion)

    @cached_property
    def truncation_level(self) -> float:
        """Clamp level for the reaction term: explicit if configured, else a
        generous multiple of the a-priori solution bound."""
        if self.nonlinearity.truncation is not None:
            return self.nonlinearity.truncation.level
        y0_max = float(np.max(np.abs(self.y0), initial=0.0))
        yd_max = float(np.max(np.abs(self.yd.values), initial=0.0))
        return auto_truncation_level(y0_max, yd_max, self.gamma, self.kappa)

    @cached_property
    def clamped_nonlinearity(self) -> NonlinearitySpec:
        """The reaction spec with the resolved truncation level attached."""
        return with_truncation(self.nonlinearity, self.truncation_level)
