"""Closed-form Gaussian matrix elements and assembly of the linear
system M v = r that drives the equations of motion.

Conventions
-----------
Pair quantities carry a bra index l and a ket index k and are stored in
(N, N) tables indexed ``[l, k]``:

    a_sigma[l, k] = A_sigma^k + conj_i(A_sigma^l),
    gamma[l, k]   = gamma^k + conj_i(gamma^l),

so tables[l, k] = <g^l| O |g^k>.  Interaction elements additionally sum
over a second Gaussian pair (j bra, i ket) coming from |psi|^2; the
combined widths are a_sigma^{klij} = a_sigma^{kl} + a_sigma^{ij}.

The dipolar elements reduce to the Carlson integral R_D through

    kappa_x^2 = a_x^{klij} a_z^{ij} a_z^{kl}
                / (a_x^{ij} a_x^{kl} a_z^{klij}),

and analogously for kappa_y.  The x^2/y^2/z^2-weighted dipolar elements
need the partials of kappa with respect to the ket widths A_sigma^k at
frozen |psi|^2; by the chain rule these are

    d kappa_x / d A_x^k = (kappa_x/2) (1/a_x^{klij} - 1/a_x^{kl}),
    d kappa_x / d A_z^k = (kappa_x/2) (1/a_z^{kl} - 1/a_z^{klij}),
    d kappa_x / d A_y^k = 0,

and the x<->y analogues.  The weighted elements are then

    <g^l| f^2 V_d |g^k> = (4 pi^{5/2}/3) sum_{ij} T^{klij} * bracket_f,
    T = exp(-gamma^{klij}) / sqrt(a_x a_y a_z)^{klij},
    bracket_f = (kx ky R_D - 1) / (2 a_f^{klij})
                - (ky R_D + 2 kx^2 ky R_x) dkx/dA_f^k
                - (kx R_D + 2 kx ky^2 R_y) dky/dA_f^k,

with R_D, R_x, R_y evaluated at (kx^2, ky^2, 1).  Both partial terms
enter with the same sign; this is fixed by the x<->y symmetry of the
elements and by the isotropic sum rule <(x^2+y^2+z^2) V_d> = 0 for a
spherical cloud, and is confirmed against the quadrature oracle in the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bicomplex import BCArray, Bicomplex
from .errors import DomainError, ZeroDivisor
from .special_functions import carlson_rd_with_partials
from .system import GaussianParams, SystemConfig

PI32 = np.pi ** 1.5
PI52 = np.pi ** 2.5
DIPOLE_PREF = 4.0 * PI52 / 3.0

# moment of a 1D Gaussian: <x^{2p}> / <1> = MOMENT_COEF[p] / a^p
_MOMENT_COEF = (1.0, 0.5, 0.75)

# block order of M and r: operators {1, x^2, y^2, z^2} as exponent triples
BLOCK_OPS = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))
_F_NAMES = {"1": (0, 0, 0), "x2": (1, 0, 0), "y2": (0, 1, 0),
            "z2": (0, 0, 1)}
_MOMENT_NAMES = {
    "x2": (1, 0, 0), "y2": (0, 1, 0), "z2": (0, 0, 1),
    "x4": (2, 0, 0), "y4": (0, 2, 0), "z4": (0, 0, 2),
    "x2y2": (1, 1, 0), "x2z2": (1, 0, 1), "y2z2": (0, 1, 1),
}

_WIDTH_FLOOR = 1e-200


@dataclass(frozen=True)
class GaussianPair:
    """Combined bra-ket widths and phase of a single Gaussian pair."""

    a_x: Bicomplex
    a_y: Bicomplex
    a_z: Bicomplex
    gamma_kl: Bicomplex


@dataclass(frozen=True)
class KappaPair:
    """Anisotropy arguments of the dipolar Carlson integral."""

    kappa_x: Bicomplex
    kappa_y: Bicomplex


class PairTables:
    """Per-pair quantities shared by every matrix element."""

    def __init__(self, params: GaussianParams):
        self.n = params.n
        conj = lambda arr: arr.conj_i()  # noqa: E731
        self.a2 = {}
        for sig in "xyz":
            w = params.widths(sig)
            table = w[None, :] + conj(w)[:, None]
            if np.any(table.abs_max() < _WIDTH_FLOOR):
                raise ZeroDivisor(
                    f"vanishing combined width a_{sig}; Gaussian basis "
                    "degenerate")
            self.a2[sig] = table
        g = params.gam
        self.g2 = g[None, :] + conj(g)[:, None]
        self.sqrt_a2 = {sig: self.a2[sig].sqrt() for sig in "xyz"}
        self.inv_a2 = {sig: 1.0 / self.a2[sig] for sig in "xyz"}
        self.overlap = (PI32 * (-self.g2).exp()
                        / (self.sqrt_a2["x"] * self.sqrt_a2["y"]
                           * self.sqrt_a2["z"]))

    def moment(self, exps: tuple[int, int, int]) -> BCArray:
        """<g^l| x^{2px} y^{2py} z^{2pz} |g^k> table, exponents <= 2."""
        out = self.overlap
        for sig, p in zip("xyz", exps):
            for _ in range(p):
                out = out * self.inv_a2[sig]
            if p:
                out = out * _MOMENT_COEF[p]
        return out


class QuadTables:
    """Combined (kl, ij) quantities for the interaction elements."""

    def __init__(self, pairs: PairTables):
        self.pairs = pairs
        self.a4 = {}
        self.inv_a4 = {}
        for sig in "xyz":
            t = pairs.a2[sig]
            a4 = t[:, :, None, None] + t[None, None, :, :]
            self.a4[sig] = a4
            self.inv_a4[sig] = 1.0 / a4
        g2 = pairs.g2
        g4 = g2[:, :, None, None] + g2[None, None, :, :]
        sqrt4 = [self.a4[sig].sqrt() for sig in "xyz"]
        # T^{klij} = exp(-gamma^{klij}) / sqrt(ax ay az)^{klij}
        self.weight = (-g4).exp() / (sqrt4[0] * sqrt4[1] * sqrt4[2])

    def contact_tables(self, scattering: complex) -> dict[str, BCArray]:
        """8 a pi^{5/2} sums; f-weighted elements pick up 1/(2 a_f)."""
        a_bc = BCArray.from_complex_k(scattering)
        base = self.weight * (8.0 * PI52) * a_bc
        out = {"1": base.sum(axis=(2, 3))}
        for sig in "xyz":
            out[sig] = (base * (0.5 * self.inv_a4[sig])).sum(axis=(2, 3))
        return out

    def dipole_tables(self) -> dict[str, BCArray]:
        pairs = self.pairs
        sq_a2 = pairs.sqrt_a2
        sq_a4 = {sig: self.a4[sig].sqrt() for sig in "xyz"}

        def kl(arr):
            return arr[:, :, None, None]

        def ij(arr):
            return arr[None, None, :, :]

        kappa = {}
        for sig in "xy":
            kappa[sig] = (sq_a4[sig] * ij(sq_a2["z"]) * kl(sq_a2["z"])
                          / (ij(sq_a2[sig]) * kl(sq_a2[sig]) * sq_a4["z"]))
        kx, ky = kappa["x"], kappa["y"]
        kx2, ky2 = kx * kx, ky * ky
        one = kx2 * 0.0 + 1.0
        self._check_rd_domain(kx2, ky2)
        rd, rx, ry = carlson_rd_with_partials(kx2, ky2, one)

        core = kx * ky * rd - 1.0
        base = self.weight * DIPOLE_PREF
        out = {"1": (base * core).sum(axis=(2, 3))}

        # partials of kappa w.r.t. the ket widths A_sigma^k
        dkx = {
            "x": 0.5 * kx * (self.inv_a4["x"] - kl(pairs.inv_a2["x"])),
            "z": 0.5 * kx * (kl(pairs.inv_a2["z"]) - self.inv_a4["z"]),
        }
        dky = {
            "y": 0.5 * ky * (self.inv_a4["y"] - kl(pairs.inv_a2["y"])),
            "z": 0.5 * ky * (kl(pairs.inv_a2["z"]) - self.inv_a4["z"]),
        }
        coef_x = ky * rd + 2.0 * kx2 * ky * rx
        coef_y = kx * rd + 2.0 * kx * ky2 * ry
        for sig in "xyz":
            bracket = core * (0.5 * self.inv_a4[sig])
            if sig in dkx:
                bracket = bracket - coef_x * dkx[sig]
            if sig in dky:
                bracket = bracket - coef_y * dky[sig]
            out[sig] = (base * bracket).sum(axis=(2, 3))
        return out

    def _check_rd_domain(self, kx2: BCArray, ky2: BCArray):
        for name, arr in (("kappa_x^2", kx2), ("kappa_y^2", ky2)):
            for comp in (arr.p, arr.m):
                bad = (comp.real < 0) & (np.abs(comp.imag)
                                         < 1e-12 * np.abs(comp.real))
                if np.any(bad):
                    l, k, j, i = np.argwhere(bad)[0]
                    raise DomainError(
                        f"{name} on the negative real axis at pair "
                        f"quadruple (k={k}, l={l}, i={i}, j={j})")


# -- scalar (single-pair) API -----------------------------------------

def overlap(pair: GaussianPair) -> Bicomplex:
    """<g^l | g^k> = pi^{3/2} e^{-gamma^{kl}} / sqrt(ax ay az)."""
    sx = pair.a_x.sqrt()
    sy = pair.a_y.sqrt()
    sz = pair.a_z.sqrt()
    return (-pair.gamma_kl).exp() * PI32 * (sx * sy * sz).inverse()


def moment(pair: GaussianPair, which: str) -> Bicomplex:
    """Polynomial moment <g^l | which | g^k>, which in

    {x2, y2, z2, x4, y4, z4, x2y2, x2z2, y2z2}.
    """
    try:
        exps = _MOMENT_NAMES[which]
    except KeyError:
        raise ValueError(f"unknown moment {which!r}") from None
    out = overlap(pair)
    for a_sig, p in zip((pair.a_x, pair.a_y, pair.a_z), exps):
        for _ in range(p):
            out = out * a_sig.inverse()
        if p:
            out = out * _MOMENT_COEF[p]
    return out


def contact_element(l: int, k: int, f: str, params: GaussianParams,
                    a) -> Bicomplex:
    """<g^l | f^2 V_c | g^k> with V_c = 8 pi a |psi|^2."""
    tables = QuadTables(PairTables(params))
    scattering = a if isinstance(a, complex) else complex(a)
    key = {"1": "1", "x2": "x", "y2": "y", "z2": "z"}[f]
    return tables.contact_tables(scattering)[key][l, k].scalar()


def dipole_element(l: int, k: int, f: str,
                   params: GaussianParams) -> Bicomplex:
    """<g^l | f^2 V_d | g^k> for the dipole-dipole interaction."""
    tables = QuadTables(PairTables(params))
    key = {"1": "1", "x2": "x", "y2": "y", "z2": "z"}[f]
    return tables.dipole_tables()[key][l, k].scalar()


def kappa_pair(params: GaussianParams, l: int, k: int, i: int,
               j: int) -> KappaPair:
    """kappa_{x,y}^{klij} for one index quadruple."""
    pairs = PairTables(params)
    out = []
    for sig in "xy":
        a4 = pairs.a2[sig][j, i] + pairs.a2[sig][l, k]
        az4 = pairs.a2["z"][j, i] + pairs.a2["z"][l, k]
        val = (a4.sqrt() * pairs.a2["z"][j, i].sqrt()
               * pairs.a2["z"][l, k].sqrt()
               / (pairs.a2[sig][j, i].sqrt() * pairs.a2[sig][l, k].sqrt()
                  * az4.sqrt()))
        out.append(val.scalar())
    return KappaPair(*out)


def kappa_partials(params: GaussianParams, l: int, k: int, i: int,
                   j: int, sigma_f: str) -> tuple[Bicomplex, Bicomplex]:
    """(d kappa_x / d A_f^k, d kappa_y / d A_f^k) at frozen |psi|^2."""
    pairs = PairTables(params)
    kp = kappa_pair(params, l, k, i, j)

    def d_of(sig_kappa, kval):
        a2 = pairs.a2[sig_kappa][l, k].scalar()
        a4 = (pairs.a2[sig_kappa][j, i] + pairs.a2[sig_kappa][l, k]).scalar()
        az2 = pairs.a2["z"][l, k].scalar()
        az4 = (pairs.a2["z"][j, i] + pairs.a2["z"][l, k]).scalar()
        if sigma_f == sig_kappa:
            return kval * 0.5 * (a4.inverse() - a2.inverse())
        if sigma_f == "z":
            return kval * 0.5 * (az2.inverse() - az4.inverse())
        return Bicomplex(0.0)

    return d_of("x", kp.kappa_x), d_of("y", kp.kappa_y)


# -- system assembly ----------------------------------------------------

def assemble_system(params: GaussianParams,
                    config: SystemConfig) -> tuple[BCArray, BCArray]:
    """Build the 4N x 4N matrix M and right-hand side r.

    Blocks follow the order {1, x^2, y^2, z^2} for both the test
    functions (rows) and the expansion operators (columns); block
    (f, f') holds the moments <g^l| f^2 f'^2 |g^k> at [l, k].  The
    right-hand side sums trap, contact and dipolar contributions of
    f^2 (V_t + V_c + V_d).
    """
    n = params.n
    pairs = PairTables(params)
    mat = BCArray.zeros((4 * n, 4 * n))
    for bf, ef in enumerate(BLOCK_OPS):
        for bg, eg in enumerate(BLOCK_OPS):
            exps = tuple(p + q for p, q in zip(ef, eg))
            mat[bf * n:(bf + 1) * n, bg * n:(bg + 1) * n] = \
                pairs.moment(exps)

    gx2, gy2, gz2 = config.trap_strengths()
    trap_ops = (("x", gx2), ("y", gy2), ("z", gz2))
    quads = QuadTables(pairs)
    contact = quads.contact_tables(config.a)
    dip = quads.dipole_tables() if config.dipole else None

    rhs = BCArray.zeros((4 * n,))
    for bf, ef in enumerate(BLOCK_OPS):
        fkey = "1xyz"[bf]
        total = BCArray.zeros((n, n))
        for sig, strength in trap_ops:
            exps = tuple(p + q for p, q in zip(ef, _F_NAMES[sig + "2"]))
            total = total + pairs.moment(exps) * BCArray.from_complex_k(
                strength)
        total = total + contact[fkey]
        if dip is not None:
            total = total + dip[fkey]
        rhs[bf * n:(bf + 1) * n] = total.sum(axis=1)
    return mat, rhs


def dump_system(mat: BCArray, rhs: BCArray) -> dict:
    """JSON-ready dump of (M, r) with the 4-array bicomplex encoding."""
    mat_sc = mat.to_scalars()
    n = mat.shape[0]
    return {
        "block_order": ["1", "x2", "y2", "z2"],
        "M": [[mat_sc[row * n + col].to_list() for col in range(n)]
              for row in range(n)],
        "r": [v.to_list() for v in rhs.to_scalars()],
    }
