"""Equations of motion, fixed-point residual, Newton root search and
observables of the coupled-Gaussian ansatz.

The time derivatives of the variational parameters follow from solving
M v = r (see :mod:`dipolarbec.gaussian_integrals`):

    d/dt gamma^k   = 2i (A_x^k + A_y^k + A_z^k) + i v_0^k,
    d/dt A_sigma^k = -4i (A_sigma^k)^2 + i v_sigma^k.

Stationary states satisfy d/dt A_sigma^k = 0 and
d/dt gamma^k = i mu for all k; mu is the chemical potential.  The gamma
sector is gauge reduced: only gtilde^k = gamma^k - gamma^1 (k >= 2) are
unknowns, while gamma^1 is pinned by <psi|psi> = 1 together with a real
positive amplitude of the first Gaussian.  The resulting root problem
has 8N-2 real coordinates, each of which becomes k-complex under
analytic continuation; the Newton iteration therefore runs in ordinary
complex arithmetic over those coordinates.

Residual components are normalized by per-equation scales (the trap
energy scale for the gamma rows, 1 + 4|A|^2 for the width rows) so that
the convergence tolerance is meaningful across trap strengths; scales
are frozen at the initial guess of each solve, which leaves the Newton
direction untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bicomplex import BCArray, Bicomplex, bc_concat, bc_solve
from .errors import DipolarBecError, NoConvergence, SingularSystem
from .gaussian_integrals import PairTables, QuadTables, assemble_system
from .system import GaussianParams, SystemConfig

FD_STEP_REL = 1e-7
DAMPING_HALVINGS = 20


@dataclass
class Observables:
    """Scalar diagnostics of a state; Re/Im refer to the (1, k) parts."""

    e_mf: Bicomplex
    w: Bicomplex
    norm: Bicomplex

    @property
    def e_complex(self) -> complex:
        return complex(self.e_mf.c1, self.e_mf.ck)

    @property
    def w_complex(self) -> complex:
        return complex(self.w.c1, self.w.ck)

    def to_json(self) -> dict:
        return {"E_mf": self.e_mf.to_list(), "w": self.w.to_list(),
                "norm": self.norm.to_list()}


@dataclass
class VariationalState:
    """Gaussian parameters of a (candidate) stationary state."""

    params: GaussianParams
    mu: Bicomplex | None = None

    @property
    def n(self) -> int:
        return self.params.n

    def copy(self) -> "VariationalState":
        return VariationalState(self.params.copy(), self.mu)

    @property
    def mu_complex(self) -> complex:
        if self.mu is None:
            return complex(np.nan, np.nan)
        return complex(self.mu.c1, self.mu.ck)

    def to_json(self, config: SystemConfig | None = None,
                observables: Observables | None = None,
                stability: dict | None = None) -> dict:
        out = {"N": self.n, **self.params.to_json()}
        out["mu"] = self.mu.to_list() if self.mu is not None else None
        if config is not None:
            out["config"] = config.to_json()
        if observables is not None:
            out["observables"] = observables.to_json()
        if stability is not None:
            out["stability"] = stability
        return out

    @classmethod
    def from_json(cls, data: dict) -> "VariationalState":
        params = GaussianParams.from_json(data)
        mu = Bicomplex.from_list(data["mu"]) if data.get("mu") else None
        return cls(params, mu)


@dataclass
class NewtonInfo:
    iterations: int = 0
    residual_norm: float = np.inf
    jacobian: np.ndarray | None = None
    jacobian_builds: int = 0
    residual_evals: int = 0


# -- gauge handling ------------------------------------------------------

def normalized_gamma1(gtil: BCArray, ax: BCArray, ay: BCArray,
                      az: BCArray) -> complex:
    """gamma^1 (k-complex) enforcing <psi|psi> = 1 and a real positive
    first amplitude, given gtilde (with gtilde^1 = 0) and the widths."""
    overlap_sum = PairTables(
        GaussianParams(ax, ay, az, gtil)).overlap.sum(axis=(0, 1))
    # the pair sum is i-real by conjugation symmetry; project exactly
    s_k = complex(overlap_sum.re_i())
    if not np.isfinite(s_k) or abs(s_k) < 1e-300 or s_k.real <= 0:
        raise SingularSystem("normalization sum collapsed; amplitudes "
                             "or widths degenerate")
    return 0.5 * np.log(s_k)


def coords_layout(n: int) -> int:
    """Number of k-complex solver coordinates."""
    return 8 * n - 2


def coords_to_params(coords: np.ndarray, n: int) -> GaussianParams:
    """Rebuild normalized Gaussian parameters from solver coordinates.

    Layout: [Re gtil^2..N, Im gtil^2..N,
             Re A_x^1..N, Im A_x^1..N, Re A_y..., Im A_y...,
             Re A_z..., Im A_z...], each entry k-complex.
    """
    coords = np.asarray(coords, dtype=np.complex128)
    m = n - 1
    zero = np.zeros(1, dtype=np.complex128)
    gtil = BCArray.from_re_im_i(np.concatenate([zero, coords[:m]]),
                                np.concatenate([zero, coords[m:2 * m]]))
    arrs = []
    for block in range(3):
        base = 2 * m + block * 2 * n
        arrs.append(BCArray.from_re_im_i(coords[base:base + n],
                                         coords[base + n:base + 2 * n]))
    ax, ay, az = arrs
    g1 = normalized_gamma1(gtil, ax, ay, az)
    gam = gtil + BCArray.from_complex_k(g1)
    return GaussianParams(ax, ay, az, gam)


def params_to_coords(params: GaussianParams) -> np.ndarray:
    n = params.n
    gtil = params.gam - params.gam[0:1]
    parts = [gtil.re_i()[1:], gtil.im_i()[1:]]
    for arr in (params.ax, params.ay, params.az):
        parts.extend([arr.re_i(), arr.im_i()])
    return np.concatenate(parts)


# -- equations of motion -------------------------------------------------

def equations_of_motion(params: GaussianParams,
                        config: SystemConfig) -> BCArray:
    """Time derivatives (gammadot^1..N, Adot_x^1..N, Adot_y, Adot_z).

    Raises SingularSystem when the Gaussian basis is degenerate enough
    to break the M v = r solve.
    """
    n = params.n
    mat, rhs = assemble_system(params, config)
    v = bc_solve(mat, rhs)
    v0, vx, vy, vz = (v[i * n:(i + 1) * n] for i in range(4))
    sum_a = params.ax + params.ay + params.az
    gdot = _times_i(2.0 * sum_a + v0)
    adots = [_times_i(-4.0 * w * w + vv)
             for w, vv in ((params.ax, vx), (params.ay, vy),
                           (params.az, vz))]
    return bc_concat([gdot] + adots)


def _times_i(arr: BCArray) -> BCArray:
    return BCArray(1j * arr.p, 1j * arr.m)


def chemical_potential(eom: BCArray, n: int) -> Bicomplex:
    """mu read off from gammadot^1 = i mu."""
    gdot1 = eom[0:1]
    return BCArray(-1j * gdot1.p, -1j * gdot1.m)[0].scalar()


@dataclass
class ResidualScales:
    gamma: float
    widths: np.ndarray  # (3, N) positive reals

    @classmethod
    def from_params(cls, params: GaussianParams) -> "ResidualScales":
        mags = []
        for arr in (params.ax, params.ay, params.az):
            mags.append(np.abs(arr.re_i()) + np.abs(arr.im_i()))
        mags = np.array(mags)
        gamma_scale = 1.0 + 2.0 * float(mags[:, 0].sum())
        return cls(gamma_scale, 1.0 + 4.0 * mags**2)


def residual_from_coords(coords: np.ndarray, n: int, config: SystemConfig,
                         scales: ResidualScales) -> np.ndarray:
    params = coords_to_params(coords, n)
    eom = equations_of_motion(params, config)
    gdot = eom[0:n]
    gtil_dot = gdot[1:] - gdot[0:1]
    parts = [gtil_dot.re_i() / scales.gamma,
             gtil_dot.im_i() / scales.gamma]
    for block in range(3):
        adot = eom[(block + 1) * n:(block + 2) * n]
        parts.append(adot.re_i() / scales.widths[block])
        parts.append(adot.im_i() / scales.widths[block])
    return np.concatenate(parts)


def residual(state: VariationalState, config: SystemConfig) -> np.ndarray:
    """Scaled fixed-point residual, k-complex, length 8N-2.

    Components are the i-splits of gtildedot^k (k >= 2) and
    Adot_sigma^k, divided by the per-equation scales described in the
    module docstring.  A state whose gamma^1 violates the normalization
    gauge is first projected onto the gauge slice.
    """
    coords = params_to_coords(state.params)
    scales = ResidualScales.from_params(state.params)
    return residual_from_coords(coords, state.n, config, scales)


# -- Newton root search ---------------------------------------------------

def _fd_jacobian(coords, n, config, scales, info):
    dim = coords.size
    jac = np.empty((dim, dim), dtype=np.complex128)
    typ = np.abs(coords).mean() if dim else 1.0
    m = n - 1
    typical = np.full(dim, max(typ, 1.0))
    typical[:2 * m] = 1.0  # gtilde coordinates are O(1)
    for jcol in range(dim):
        h = FD_STEP_REL * (abs(coords[jcol]) + typical[jcol])
        up = coords.copy()
        up[jcol] += h
        down = coords.copy()
        down[jcol] -= h
        f_up = residual_from_coords(up, n, config, scales)
        f_down = residual_from_coords(down, n, config, scales)
        jac[:, jcol] = (f_up - f_down) / (2.0 * h)
        info.residual_evals += 2
    info.jacobian_builds += 1
    return jac


def newton_solve(guess: VariationalState, config: SystemConfig,
                 tol: float | None = None, max_iter: int | None = None,
                 jacobian: np.ndarray | None = None,
                 return_info: bool = False):
    """Damped Newton-Raphson search for a stationary state.

    The Jacobian of the residual is built by central finite differences
    (relative step 1e-7).  Steps are halved (up to 20 times) whenever
    the residual max-norm would grow; after a heavily damped step a
    stale Jacobian is rebuilt before giving up on the iteration.  An
    externally supplied ``jacobian`` (e.g. from the previous point of a
    warm-started continuation) is used until it stops contracting.

    Raises:
        NoConvergence: iteration cap exceeded.
        SingularSystem: singular M v = r solve or singular Jacobian.
    """
    tol = config.solver.tol if tol is None else tol
    max_iter = config.solver.max_iter if max_iter is None else max_iter
    n = guess.n
    scales = ResidualScales.from_params(guess.params)
    coords = params_to_coords(guess.params)
    info = NewtonInfo(jacobian=jacobian)

    f_cur = residual_from_coords(coords, n, config, scales)
    info.residual_evals += 1
    fresh = jacobian is not None  # treat handed-in jacobian as usable
    iters_since_build = 0
    for iteration in range(max_iter):
        f_norm = float(np.max(np.abs(f_cur))) if f_cur.size else 0.0
        info.residual_norm = f_norm
        info.iterations = iteration
        if f_norm < tol:
            break
        # a reused (chord) Jacobian converges only linearly; refresh it
        # after a few iterations instead of crawling to the cap
        if info.jacobian is None or iters_since_build >= 4:
            info.jacobian = _fd_jacobian(coords, n, config, scales, info)
            fresh = True
            iters_since_build = 0
        try:
            step = np.linalg.solve(info.jacobian, -f_cur)
        except np.linalg.LinAlgError as err:
            raise SingularSystem(
                f"singular Newton Jacobian: {err}") from err

        damp = 1.0
        accepted = False
        for _ in range(DAMPING_HALVINGS + 1):
            trial = coords + damp * step
            try:
                f_trial = residual_from_coords(trial, n, config, scales)
                info.residual_evals += 1
                if not np.all(np.isfinite(f_trial)):
                    f_trial = None
            except (DipolarBecError, FloatingPointError):
                f_trial = None
            if f_trial is not None and (
                    float(np.max(np.abs(f_trial))) < f_norm
                    or f_norm < 1e3 * tol):
                coords = trial
                f_cur = f_trial
                accepted = True
                break
            damp *= 0.5
        iters_since_build += 1
        if not accepted or damp < 1.0 / 16.0:
            if fresh and not accepted:
                raise NoConvergence(
                    "Newton step rejected with a fresh Jacobian "
                    f"(residual {f_norm:.3e})", last_value=coords)
            # stale direction; force a rebuild next round
            info.jacobian = None
            fresh = False
    else:
        raise NoConvergence(
            f"Newton did not reach tol={tol:g} in {max_iter} iterations "
            f"(residual {info.residual_norm:.3e})", last_value=coords)

    params = coords_to_params(coords, n)
    eom = equations_of_motion(params, config)
    state = VariationalState(params, chemical_potential(eom, n))
    if return_info:
        return state, info
    return state


# -- imaginary-time relaxation ---------------------------------------------

def hamiltonian_projection(params: GaussianParams, config: SystemConfig):
    """(M, h, n) with h_f^l = sum_k <g^l| f^2 H |g^k> and
    n_f^l = sum_k <g^l| f^2 |g^k>, H = -Laplacian + V."""
    n_g = params.n
    mat, pot = assemble_system(params, config)
    pairs = PairTables(params)
    width_arrs = (params.ax, params.ay, params.az)
    kin = []
    for ef in ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)):
        mom_f = pairs.moment(ef)
        total = BCArray.zeros((n_g, n_g))
        for block, arr in enumerate(width_arrs):
            exps = tuple(p + (1 if q == block else 0)
                         for q, p in enumerate(ef))
            a_ket = arr[None, :]
            total = total + 2.0 * a_ket * mom_f \
                - 4.0 * a_ket * a_ket * pairs.moment(exps)
        kin.append(total.sum(axis=1))
    h_vec = bc_concat(kin) + pot
    n_vec = bc_concat([pairs.moment(ef).sum(axis=1)
                       for ef in ((0, 0, 0), (1, 0, 0), (0, 1, 0),
                                  (0, 0, 1))])
    return mat, h_vec, n_vec


def relax_to_minimum(state: VariationalState, config: SystemConfig,
                     max_steps: int = 1500, dtau: float = None,
                     e_tol: float = 1e-13) -> VariationalState:
    """Norm-preserving imaginary-time flow toward an energy minimum.

    Steepest descent of <H> in the metric of the variational manifold:
    dz/dtau = M^{-1}(h - mu n) with mu the Rayleigh quotient, which is
    the projection of -(H - mu) psi onto the tangent space.  The metric
    solve is Tikhonov-damped (M + eps diag M) because near-coincident
    Gaussians make the Gram matrix almost singular; the damped direction
    is still a descent direction, so the flow creeps through degenerate
    regions instead of stalling.  The state is re-gauged (normalized)
    after every accepted step and the step size adapts to keep the
    energy monotone.  Physical (continuation-free) states only; unstable
    stationary states cannot be reached this way.
    """
    n = state.n
    coords = params_to_coords(state.params)
    params = coords_to_params(coords, n)
    if dtau is None:
        scale = float(np.abs(params.az.re_i()).max())
        dtau = 0.02 / max(scale, 1.0)

    def rayleigh(h_vec):
        # <psi|H|psi> is the f = 1 block of h summed over l
        return complex(h_vec[0:n].sum(axis=None).re_i())

    def descent(mat, rhs, eps):
        # physical lane: the + idempotent component carries the full
        # complex Gram matrix; the - lane is its conjugate mirror
        gram = mat.p.copy()
        gram[np.diag_indices_from(gram)] += eps * np.abs(np.diag(gram))
        v_p = np.linalg.solve(gram, rhs.p)
        return BCArray(v_p, np.conj(v_p))

    mat, h_vec, n_vec = hamiltonian_projection(params, config)
    mu = rayleigh(h_vec)
    e_cur = mu.real
    eps = 1e-10
    for _ in range(max_steps):
        rhs = h_vec - n_vec * BCArray.from_complex_k(mu)
        moved = False
        for _ in range(30):
            try:
                v = descent(mat, rhs, eps)
                trial = coords + dtau * _eom_to_coords_direction(v, n)
                params_t = coords_to_params(trial, n)
                mat_t, h_t, n_t = hamiltonian_projection(params_t, config)
                e_t = rayleigh(h_t).real
            except (DipolarBecError, FloatingPointError,
                    np.linalg.LinAlgError):
                e_t = np.nan
            if np.isfinite(e_t) and e_t < e_cur:
                coords, params = trial, params_t
                mat, h_vec, n_vec = mat_t, h_t, n_t
                mu = rayleigh(h_vec)
                moved = True
                break
            # alternate between shrinking the step and damping the metric
            dtau *= 0.5
            eps = min(eps * 10.0, 1.0)
        if not moved:
            break
        if abs(e_t - e_cur) < e_tol * (abs(e_cur) + 1.0):
            e_cur = e_t
            break
        e_cur = e_t
        dtau *= 1.3
        eps = max(eps * 0.2, 1e-10)
    return VariationalState(coords_to_params(coords, n))


def _eom_to_coords_direction(v: BCArray, n: int) -> np.ndarray:
    """Map a (gammadot, Adot) tangent vector to solver coordinates."""
    gdot = v[0:n]
    gtil_dot = gdot[1:] - gdot[0:1]
    parts = [gtil_dot.re_i(), gtil_dot.im_i()]
    for block in range(3):
        adot = v[(block + 1) * n:(block + 2) * n]
        parts.extend([adot.re_i(), adot.im_i()])
    return np.concatenate(parts)


# -- observables -----------------------------------------------------------

def observables(state: VariationalState,
                config: SystemConfig) -> Observables:
    """Mean-field energy, w = <x^2 - y^2>, and the norm.

    E_mf = <-Laplacian + V_t + (V_c + V_d)/2>; the kinetic part uses the
    analytic Laplacian of the Gaussian ansatz.
    """
    params = state.params
    pairs = PairTables(params)
    ov = pairs.overlap
    norm = ov.sum(axis=(0, 1))

    mom = {sig: pairs.moment(exps) for sig, exps in
           (("x", (1, 0, 0)), ("y", (0, 1, 0)), ("z", (0, 0, 1)))}
    w_val = (mom["x"] - mom["y"]).sum(axis=(0, 1))

    kinetic = BCArray.zeros(())
    for sig, arr in (("x", params.ax), ("y", params.ay), ("z", params.az)):
        a_ket = arr[None, :]
        kinetic = kinetic + (2.0 * a_ket * ov
                             - 4.0 * a_ket * a_ket * mom[sig]).sum(
                                 axis=(0, 1))

    gx2, gy2, gz2 = config.trap_strengths()
    trap = BCArray.zeros(())
    for sig, strength in (("x", gx2), ("y", gy2), ("z", gz2)):
        trap = trap + mom[sig].sum(axis=(0, 1)) * BCArray.from_complex_k(
            strength)

    quads = QuadTables(pairs)
    inter = quads.contact_tables(config.a)["1"].sum(axis=(0, 1))
    if config.dipole:
        inter = inter + quads.dipole_tables()["1"].sum(axis=(0, 1))

    e_mf = kinetic + trap + 0.5 * inter
    return Observables(e_mf.scalar(), w_val.scalar(), norm.scalar())


def splittings(group: list[Observables]) -> list[tuple[complex, complex]]:
    """Mean-subtracted (Delta E_mf, Delta w) per state, k-complex."""
    if len(group) not in (2, 3):
        raise ValueError("splittings are defined for 2 or 3 states")
    es = np.array([obs.e_complex for obs in group])
    ws = np.array([obs.w_complex for obs in group])
    de = es - es.mean()
    dw = ws - ws.mean()
    return [(complex(a), complex(b)) for a, b in zip(de, dw)]


# -- initial guesses --------------------------------------------------------

def initial_guess(config: SystemConfig,
                  width_scale: float = 1.0) -> VariationalState:
    """Cold-start state for the Newton search.

    N = 1: the harmonic-oscillator widths A_sigma = gamma_sigma / 2,
    optionally scaled.  N > 1: a geometric ladder of widths (ratio 1.5)
    centered on the oscillator widths with amplitudes decaying by a
    factor 3 per Gaussian.
    """
    n = config.n_gauss
    gx2, gy2, gz2 = config.trap_strengths()
    base = np.array([np.sqrt(abs(g2)) / 2.0 * width_scale
                     for g2 in (gx2, gy2, gz2)])
    ladder = 1.5 ** (np.arange(n) - (n - 1) / 2.0)
    widths = [base[i] * ladder for i in range(3)]
    gtil = np.log(3.0) * np.arange(n, dtype=float)
    zero = np.zeros(n)
    ax = BCArray.from_re_im_i(widths[0], zero)
    ay = BCArray.from_re_im_i(widths[1], zero)
    az = BCArray.from_re_im_i(widths[2], zero)
    gtil_bc = BCArray.from_re_im_i(gtil, zero)
    g1 = normalized_gamma1(gtil_bc, ax, ay, az)
    gam = gtil_bc + BCArray.from_complex_k(g1)
    return VariationalState(GaussianParams(ax, ay, az, gam))


# -- raw (ungauged) coordinate maps for the stability Jacobian -------------

def raw_coords(state: VariationalState) -> np.ndarray:
    """Interleaved real split (Re z_1, Im z_1, ..., Re z_4N, Im z_4N) of
    (gamma^1..N, A_x^1..N, A_y^1..N, A_z^1..N), k-complex entries."""
    params = state.params
    parts = []
    for arr in (params.gam, params.ax, params.ay, params.az):
        re_part, im_part = arr.re_i(), arr.im_i()
        inter = np.empty(2 * len(re_part), dtype=np.complex128)
        inter[0::2] = re_part
        inter[1::2] = im_part
        parts.append(inter)
    return np.concatenate(parts)


def raw_coords_to_params(raw: np.ndarray, n: int) -> GaussianParams:
    raw = np.asarray(raw, dtype=np.complex128)
    arrs = []
    for block in range(4):
        seg = raw[block * 2 * n:(block + 1) * 2 * n]
        arrs.append(BCArray.from_re_im_i(seg[0::2], seg[1::2]))
    gam, ax, ay, az = arrs
    return GaussianParams(ax, ay, az, gam)


def eom_raw(raw: np.ndarray, n: int, config: SystemConfig) -> np.ndarray:
    """Real-split time derivatives at raw coordinates (no gauge fixing)."""
    params = raw_coords_to_params(raw, n)
    eom = equations_of_motion(params, config)
    out = np.empty(8 * n, dtype=np.complex128)
    for block in range(4):
        seg = eom[block * n:(block + 1) * n]
        out[block * 2 * n:(block + 1) * 2 * n:2] = seg.re_i()
        out[block * 2 * n + 1:(block + 1) * 2 * n:2] = seg.im_i()
    return out
