"""State containers shared by the initializer, stepper, and corrector."""

from __future__ import annotations

import dataclasses

import numpy as np


@dataclasses.dataclass
class CellState:
    """All inertial states of the reduced cell model at one instant.

    Per electrode: particle-average concentrations and surface offsets at
    the 4 collocation points, the total electrolyte amount, and the
    accumulated closed-loop concentration shift.  Plus one temperature.
    """

    cs_bulk_neg: np.ndarray  # mol/m^3, shape (4,)
    cs_bulk_pos: np.ndarray
    w_neg: np.ndarray  # mol/m^3 surface offsets, shape (4,)
    w_pos: np.ndarray
    qe_neg: float  # mol of electrolyte lithium per electrode
    qe_pos: float
    temperature: float  # K
    dcs_neg: float = 0.0  # mol/m^3, closed-loop correction states
    dcs_pos: float = 0.0

    def copy(self):
        return CellState(
            cs_bulk_neg=self.cs_bulk_neg.copy(),
            cs_bulk_pos=self.cs_bulk_pos.copy(),
            w_neg=self.w_neg.copy(),
            w_pos=self.w_pos.copy(),
            qe_neg=self.qe_neg,
            qe_pos=self.qe_pos,
            temperature=self.temperature,
            dcs_neg=self.dcs_neg,
            dcs_pos=self.dcs_pos,
        )

    def cs_bulk(self, side):
        return self.cs_bulk_neg if side == "neg" else self.cs_bulk_pos

    def w(self, side):
        return self.w_neg if side == "neg" else self.w_pos
