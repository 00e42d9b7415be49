"""Linear stability of stationary states.

The Jacobian J_ij = d zdot_i / d z_j is taken over the full real split
(Re z_1, Im z_1, ..., Re z_4N, Im z_4N) of the raw parameter vector —
no gauge reduction — by central finite differences of the equations of
motion.  Eigenvalues occur in +-lambda pairs; a state is stable when
all eigenvalues are purely imaginary up to the classification
threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .system import SystemConfig
from .tdvp_core import VariationalState, eom_raw, raw_coords

FD_STEP_REL = 1e-6


@dataclass
class StabilityReport:
    eigenvalues: np.ndarray  # complex, length 8N
    unstable_pairs: int
    classification: str  # "stable" or "unstable(n)"

    @property
    def stable(self) -> bool:
        return self.unstable_pairs == 0

    def to_json(self) -> dict:
        return {
            "eigenvalues": [[lam.real, lam.imag]
                            for lam in self.eigenvalues],
            "unstable_pairs": self.unstable_pairs,
            "classification": self.classification,
        }


def stability_jacobian(state: VariationalState,
                       config: SystemConfig) -> np.ndarray:
    """8N x 8N real Jacobian of the real-split equations of motion.

    Requires a converged, physically real stationary state (no k
    components); central differences with relative step 1e-6.
    """
    n = state.n
    base = raw_coords(state)
    dim = base.size
    typical = np.abs(base).mean()
    jac = np.empty((dim, dim))
    for col in range(dim):
        h = FD_STEP_REL * (abs(base[col]) + max(typical, 1.0))
        up = base.copy()
        up[col] += h
        down = base.copy()
        down[col] -= h
        diff = (eom_raw(up, n, config) - eom_raw(down, n, config)) / (2 * h)
        jac[:, col] = diff.real
    return jac


def classify(eigenvalues: np.ndarray,
             threshold: float | None = None) -> tuple[int, str]:
    """Count +-lambda pairs with |Re lambda| above the threshold.

    The default threshold scales with the spectral radius (1e-6 x) since
    'purely imaginary' is only meaningful relative to the magnitude of
    the spectrum.
    """
    eigenvalues = np.asarray(eigenvalues)
    radius = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    if threshold is None:
        threshold = 1e-6 * radius
    n_pos = int(np.sum(eigenvalues.real > threshold))
    n_neg = int(np.sum(eigenvalues.real < -threshold))
    pairs = min(n_pos, n_neg)
    label = "stable" if pairs == 0 else f"unstable({pairs})"
    return pairs, label


def analyze(state: VariationalState, config: SystemConfig,
            threshold: float | None = None) -> StabilityReport:
    """StabilityReport of a converged real stationary state."""
    jac = stability_jacobian(state, config)
    eigenvalues = np.linalg.eigvals(jac)
    order = np.argsort(eigenvalues.imag + 1e-12 * eigenvalues.real)
    eigenvalues = eigenvalues[order]
    pairs, label = classify(eigenvalues, threshold)
    return StabilityReport(eigenvalues, pairs, label)
