"""Shared domain containers: trap/interaction configuration and the
Gaussian parameter set.

All scaled units are dimensionless.  Continuation-imaginary parts of the
trap asymmetry ``s`` and the scattering length ``a`` live on the k axis
and are stored as ordinary python complex numbers (real part = physical
value, imaginary part = k component).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .bicomplex import BCArray, Bicomplex


def _as_kcomplex(value) -> complex:
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(re, im)
    return complex(value)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 100

    def to_json(self) -> dict:
        return {"tol": self.tol, "max_iter": self.max_iter}


@dataclass(frozen=True)
class SystemConfig:
    """Trap geometry and interaction strengths.

    gamma_bar: average trap frequency (> 0).
    lam: ratio of the z trap frequency to the in-plane one (> 0).
    s: trap asymmetry; s != 0 breaks the axial symmetry.
    a: s-wave scattering length.
    n_gauss: number of coupled Gaussians in the ansatz.
    dipole: include the dipole-dipole interaction (disabled only in
        test configurations).
    """

    gamma_bar: float
    lam: float
    s: complex = 0.0 + 0.0j
    a: complex = 0.0 + 0.0j
    n_gauss: int = 1
    dipole: bool = True
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.gamma_bar <= 0 or self.lam <= 0:
            raise ValueError("gamma_bar and lambda must be positive")
        object.__setattr__(self, "s", _as_kcomplex(self.s))
        object.__setattr__(self, "a", _as_kcomplex(self.a))

    def trap_strengths(self) -> tuple[complex, complex, complex]:
        """Squared trap frequencies (gx^2, gy^2, gz^2), k-complex.

        gx = gamma_bar (1+s)^{1/2} lambda^{-1/3},
        gy = gamma_bar (1+s)^{-1/2} lambda^{-1/3},
        gz = gamma_bar lambda^{2/3}.
        """
        g2 = self.gamma_bar**2
        lam23 = self.lam ** (2.0 / 3.0)
        gx2 = g2 * (1.0 + self.s) / lam23
        gy2 = g2 / (1.0 + self.s) / lam23
        gz2 = g2 * lam23**2
        return gx2, gy2, gz2

    def with_params(self, *, s=None, a=None) -> "SystemConfig":
        cfg = self
        if s is not None:
            cfg = replace(cfg, s=_as_kcomplex(s))
        if a is not None:
            cfg = replace(cfg, a=_as_kcomplex(a))
        return cfg

    # -- serialization -------------------------------------------------
    def to_json(self) -> dict:
        return {
            "gamma_bar": self.gamma_bar,
            "lambda": self.lam,
            "s": [self.s.real, self.s.imag],
            "a": [self.a.real, self.a.imag],
            "N": self.n_gauss,
            "dipole": self.dipole,
            "solver": self.solver.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SystemConfig":
        solver = SolverOptions(**data.get("solver", {}))
        return cls(
            gamma_bar=float(data["gamma_bar"]),
            lam=float(data["lambda"]),
            s=_as_kcomplex(data.get("s", 0.0)),
            a=_as_kcomplex(data.get("a", 0.0)),
            n_gauss=int(data.get("N", 1)),
            dipole=bool(data.get("dipole", True)),
            solver=solver,
        )


@dataclass
class GaussianParams:
    """Width and phase/amplitude parameters of the N-Gaussian ansatz.

    Each field is a length-N BCArray; the wave function is
    sum_k exp(-(A_x^k x^2 + A_y^k y^2 + A_z^k z^2 + gamma^k)).
    """

    ax: BCArray
    ay: BCArray
    az: BCArray
    gam: BCArray

    @property
    def n(self) -> int:
        return len(self.ax)

    def copy(self) -> "GaussianParams":
        return GaussianParams(self.ax.copy(), self.ay.copy(),
                              self.az.copy(), self.gam.copy())

    def widths(self, sigma: str) -> BCArray:
        return {"x": self.ax, "y": self.ay, "z": self.az}[sigma]

    def to_scalars(self) -> dict[str, list[Bicomplex]]:
        return {
            "A_x": self.ax.to_scalars(),
            "A_y": self.ay.to_scalars(),
            "A_z": self.az.to_scalars(),
            "gamma": self.gam.to_scalars(),
        }

    def to_json(self) -> dict:
        out = {}
        for key, scalars in self.to_scalars().items():
            out[key] = [s.to_list() for s in scalars]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GaussianParams":
        def arr(key):
            return BCArray.from_scalars(
                [Bicomplex.from_list(v) for v in data[key]])
        return cls(arr("A_x"), arr("A_y"), arr("A_z"), arr("gamma"))

    @classmethod
    def from_complex(cls, ax, ay, az, gam) -> "GaussianParams":
        """Build from ordinary complex arrays (no continuation parts)."""
        return cls(BCArray.from_complex_i(np.atleast_1d(ax)),
                   BCArray.from_complex_i(np.atleast_1d(ay)),
                   BCArray.from_complex_i(np.atleast_1d(az)),
                   BCArray.from_complex_i(np.atleast_1d(gam)))
