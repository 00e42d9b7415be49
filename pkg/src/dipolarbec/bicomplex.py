"""Commutative bicomplex arithmetic.

A bicomplex number is written on the real basis {1, k, i, j},

    z = c1 + k*ck + i*ci + j*cj,

with the unit table i^2 = k^2 = -1, j^2 = +1, i*j = j*i = k,
j*k = k*j = i, i*k = k*i = -j.  The unit ``i`` carries the quantum phase,
``k`` carries the analytic continuation of otherwise real parameters.

Transcendental functions are evaluated through the idempotent
decomposition: with e_pm = (1 +- j)/2 every z splits into two ordinary
complex numbers

    w_plus  = (c1 + cj) + 1j*(ci + ck),
    w_minus = (c1 - cj) + 1j*(ci - ck),

on which multiplication acts componentwise, so any holomorphic function
lifts componentwise.  z is a zero divisor iff exactly one of w_plus,
w_minus vanishes.

Two representations are provided: the scalar :class:`Bicomplex` (four
real fields, convenient for tests and serialization) and the vectorized
:class:`BCArray` (numpy arrays of the two idempotent components, used by
all numerical kernels).  ``i``-complex values embed diagonally
(w_plus = w_minus = z); ``k``-complex values embed as conjugate pairs
(w_plus = z, w_minus = conj(z)).
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass

import numpy as np

from .errors import SingularSystem, ZeroDivisor

# Only genuine underflow of an idempotent component counts as a zero
# divisor; near-singular pivots must surface through the solvers instead.
ZERO_FLOOR = 1e-300


def _pick_branch(w, ref):
    """Choose between +-w so the result lies nearest to ref (complex)."""
    return np.where(np.abs(w - ref) <= np.abs(-w - ref), w, -w)


@dataclass(frozen=True)
class IdempotentPair:
    """Components of a bicomplex number on the e_pm = (1 +- j)/2 basis."""

    w_plus: complex
    w_minus: complex

    def is_zero_divisor(self, floor: float = ZERO_FLOOR) -> bool:
        zp = abs(self.w_plus) < floor
        zm = abs(self.w_minus) < floor
        return zp != zm


class Bicomplex:
    """Scalar bicomplex number on the {1, k, i, j} real basis."""

    __slots__ = ("c1", "ck", "ci", "cj")

    def __init__(self, c1=0.0, ck=0.0, ci=0.0, cj=0.0):
        self.c1 = float(c1)
        self.ck = float(ck)
        self.ci = float(ci)
        self.cj = float(cj)

    # -- constructors -------------------------------------------------
    @classmethod
    def from_complex_i(cls, z) -> "Bicomplex":
        """Embed an ordinary complex number with imaginary unit i."""
        z = complex(z)
        return cls(z.real, 0.0, z.imag, 0.0)

    @classmethod
    def from_complex_k(cls, z) -> "Bicomplex":
        """Embed a continuation-complex number with imaginary unit k."""
        z = complex(z)
        return cls(z.real, z.imag, 0.0, 0.0)

    @classmethod
    def join(cls, pair: IdempotentPair) -> "Bicomplex":
        wp, wm = complex(pair.w_plus), complex(pair.w_minus)
        return cls(
            0.5 * (wp.real + wm.real),
            0.5 * (wp.imag - wm.imag),
            0.5 * (wp.imag + wm.imag),
            0.5 * (wp.real - wm.real),
        )

    def split(self) -> IdempotentPair:
        return IdempotentPair(
            complex(self.c1 + self.cj, self.ci + self.ck),
            complex(self.c1 - self.cj, self.ci - self.ck),
        )

    # -- ring operations on the real basis ----------------------------
    def __add__(self, other):
        other = _as_bicomplex(other)
        if other is NotImplemented:
            return NotImplemented
        return Bicomplex(self.c1 + other.c1, self.ck + other.ck,
                         self.ci + other.ci, self.cj + other.cj)

    __radd__ = __add__

    def __neg__(self):
        return Bicomplex(-self.c1, -self.ck, -self.ci, -self.cj)

    def __sub__(self, other):
        other = _as_bicomplex(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _as_bicomplex(other) + (-self)

    def __mul__(self, other):
        other = _as_bicomplex(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self, other
        return Bicomplex(
            a.c1 * b.c1 - a.ck * b.ck - a.ci * b.ci + a.cj * b.cj,
            a.c1 * b.ck + a.ck * b.c1 + a.ci * b.cj + a.cj * b.ci,
            a.c1 * b.ci + a.ci * b.c1 + a.ck * b.cj + a.cj * b.ck,
            a.c1 * b.cj + a.cj * b.c1 - a.ck * b.ci - a.ci * b.ck,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_bicomplex(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _as_bicomplex(other) * self.inverse()

    def __eq__(self, other):
        other = _as_bicomplex(other)
        if other is NotImplemented:
            return NotImplemented
        return (self.c1 == other.c1 and self.ck == other.ck
                and self.ci == other.ci and self.cj == other.cj)

    def __hash__(self):
        return hash((self.c1, self.ck, self.ci, self.cj))

    def __repr__(self):
        return (f"Bicomplex({self.c1!r}, {self.ck!r}, "
                f"{self.ci!r}, {self.cj!r})")

    # -- functions through the idempotent decomposition ----------------
    def inverse(self, floor: float = ZERO_FLOOR) -> "Bicomplex":
        """Multiplicative inverse; raises ZeroDivisor below the floor."""
        pair = self.split()
        if abs(pair.w_plus) < floor or abs(pair.w_minus) < floor:
            raise ZeroDivisor(f"cannot invert {self!r}")
        return Bicomplex.join(
            IdempotentPair(1.0 / pair.w_plus, 1.0 / pair.w_minus))

    def sqrt(self, ref: "Bicomplex | None" = None) -> "Bicomplex":
        """Componentwise principal square root.

        With ``ref`` given, the sign of each idempotent component is
        chosen so the result lies nearest to ref (continuity mode for
        parameter loops that cross the principal branch cut).
        """
        pair = self.split()
        # +0.0 normalizes a negative-zero imaginary part so that exact
        # negative reals land on the principal branch.
        wp = np.sqrt(pair.w_plus + 0.0)
        wm = np.sqrt(pair.w_minus + 0.0)
        if ref is not None:
            rp = ref.split()
            wp = complex(_pick_branch(wp, rp.w_plus))
            wm = complex(_pick_branch(wm, rp.w_minus))
        return Bicomplex.join(IdempotentPair(complex(wp), complex(wm)))

    def exp(self) -> "Bicomplex":
        pair = self.split()
        return Bicomplex.join(
            IdempotentPair(np.exp(pair.w_plus), np.exp(pair.w_minus)))

    def log(self) -> "Bicomplex":
        pair = self.split()
        return Bicomplex.join(
            IdempotentPair(complex(np.log(pair.w_plus + 0.0)),
                           complex(np.log(pair.w_minus + 0.0))))

    def conj_i(self) -> "Bicomplex":
        """Conjugation of the quantum phase: i -> -i, k unchanged.

        Flips the i and j coefficients only; this is the conjugation used
        to build psi* under analytic continuation.
        """
        return Bicomplex(self.c1, self.ck, -self.ci, -self.cj)

    # -- magnitudes, predicates, serialization -------------------------
    def abs_max(self) -> float:
        """Largest absolute real component (the pivoting magnitude)."""
        return max(abs(self.c1), abs(self.ck), abs(self.ci), abs(self.cj))

    def norm(self) -> float:
        """Euclidean norm of the four real components."""
        return float(np.sqrt(self.c1**2 + self.ck**2
                             + self.ci**2 + self.cj**2))

    def is_zero_divisor(self, floor: float = ZERO_FLOOR) -> bool:
        return self.split().is_zero_divisor(floor)

    def to_list(self) -> list[float]:
        """[c1, c_k, c_i, c_j] — the JSON wire format."""
        return [self.c1, self.ck, self.ci, self.cj]

    @classmethod
    def from_list(cls, values) -> "Bicomplex":
        c1, ck, ci, cj = values
        return cls(c1, ck, ci, cj)


def _as_bicomplex(value):
    if isinstance(value, Bicomplex):
        return value
    if isinstance(value, numbers.Real):
        return Bicomplex(float(value))
    if isinstance(value, numbers.Complex):
        # bare complex scalars carry the physical unit i
        return Bicomplex.from_complex_i(value)
    return NotImplemented


ONE = Bicomplex(1.0)
UNIT_K = Bicomplex(0.0, 1.0)
UNIT_I = Bicomplex(0.0, 0.0, 1.0)
UNIT_J = Bicomplex(0.0, 0.0, 0.0, 1.0)


class BCArray:
    """Array of bicomplex values stored as idempotent component pairs.

    ``p`` and ``m`` are equal-shape complex128 ndarrays holding w_plus
    and w_minus.  All ring operations are componentwise; plain scalars
    and ndarrays mix in as i-complex values (diagonal embedding).
    """

    __slots__ = ("p", "m")

    def __init__(self, p, m):
        self.p = np.asarray(p, dtype=np.complex128)
        self.m = np.asarray(m, dtype=np.complex128)

    # -- constructors -------------------------------------------------
    @classmethod
    def from_complex_i(cls, z) -> "BCArray":
        z = np.asarray(z, dtype=np.complex128)
        return cls(z, z.copy())

    @classmethod
    def from_complex_k(cls, z) -> "BCArray":
        z = np.asarray(z, dtype=np.complex128)
        return cls(z, np.conj(z))

    @classmethod
    def from_re_im_i(cls, re_part, im_part) -> "BCArray":
        """Assemble z = re + i*im from two k-complex arrays."""
        re_part = np.asarray(re_part, dtype=np.complex128)
        im_part = np.asarray(im_part, dtype=np.complex128)
        return cls(re_part + 1j * im_part,
                   np.conj(re_part) + 1j * np.conj(im_part))

    @classmethod
    def from_scalars(cls, values) -> "BCArray":
        pairs = [v.split() for v in values]
        return cls(np.array([q.w_plus for q in pairs]),
                   np.array([q.w_minus for q in pairs]))

    @classmethod
    def zeros(cls, shape) -> "BCArray":
        return cls(np.zeros(shape, dtype=np.complex128),
                   np.zeros(shape, dtype=np.complex128))

    @classmethod
    def full(cls, shape, value: Bicomplex) -> "BCArray":
        q = value.split()
        return cls(np.full(shape, q.w_plus, dtype=np.complex128),
                   np.full(shape, q.w_minus, dtype=np.complex128))

    # -- views and extraction ------------------------------------------
    @property
    def shape(self):
        return self.p.shape

    def __len__(self):
        return len(self.p)

    def __getitem__(self, idx) -> "BCArray":
        return BCArray(self.p[idx], self.m[idx])

    def __setitem__(self, idx, value: "BCArray"):
        self.p[idx] = value.p
        self.m[idx] = value.m

    def copy(self) -> "BCArray":
        return BCArray(self.p.copy(), self.m.copy())

    def reshape(self, *shape) -> "BCArray":
        return BCArray(self.p.reshape(*shape), self.m.reshape(*shape))

    def re_i(self) -> np.ndarray:
        """k-complex 'real part' under the i-split, as complex128."""
        return 0.5 * (self.p + np.conj(self.m))

    def im_i(self) -> np.ndarray:
        """k-complex 'imaginary part' under the i-split."""
        return -0.5j * (self.p - np.conj(self.m))

    def scalar(self) -> Bicomplex:
        if self.p.shape != ():
            raise ValueError("scalar() requires a 0-d BCArray")
        return Bicomplex.join(
            IdempotentPair(complex(self.p), complex(self.m)))

    def to_scalars(self) -> list[Bicomplex]:
        flat_p, flat_m = self.p.ravel(), self.m.ravel()
        return [Bicomplex.join(IdempotentPair(complex(a), complex(b)))
                for a, b in zip(flat_p, flat_m)]

    def components(self):
        """(c1, ck, ci, cj) real arrays."""
        c1 = 0.5 * (self.p.real + self.m.real)
        cj = 0.5 * (self.p.real - self.m.real)
        ci = 0.5 * (self.p.imag + self.m.imag)
        ck = 0.5 * (self.p.imag - self.m.imag)
        return c1, ck, ci, cj

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        o = _as_bcarray(other)
        return BCArray(self.p + o.p, self.m + o.m)

    __radd__ = __add__

    def __neg__(self):
        return BCArray(-self.p, -self.m)

    def __sub__(self, other):
        o = _as_bcarray(other)
        return BCArray(self.p - o.p, self.m - o.m)

    def __rsub__(self, other):
        o = _as_bcarray(other)
        return BCArray(o.p - self.p, o.m - self.m)

    def __mul__(self, other):
        o = _as_bcarray(other)
        return BCArray(self.p * o.p, self.m * o.m)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_bcarray(other)
        return BCArray(self.p / o.p, self.m / o.m)

    def __rtruediv__(self, other):
        o = _as_bcarray(other)
        return BCArray(o.p / self.p, o.m / self.m)

    def sqrt(self, ref: "BCArray | None" = None) -> "BCArray":
        wp = np.sqrt(self.p + 0.0)
        wm = np.sqrt(self.m + 0.0)
        if ref is not None:
            wp = _pick_branch(wp, ref.p)
            wm = _pick_branch(wm, ref.m)
        return BCArray(wp, wm)

    def exp(self) -> "BCArray":
        return BCArray(np.exp(self.p), np.exp(self.m))

    def log(self) -> "BCArray":
        return BCArray(np.log(self.p + 0.0), np.log(self.m + 0.0))

    def conj_i(self) -> "BCArray":
        return BCArray(np.conj(self.m), np.conj(self.p))

    def inverse(self, floor: float = ZERO_FLOOR) -> "BCArray":
        if np.any(np.abs(self.p) < floor) or np.any(np.abs(self.m) < floor):
            raise ZeroDivisor("zero divisor in componentwise inverse")
        return BCArray(1.0 / self.p, 1.0 / self.m)

    def abs_max(self) -> np.ndarray:
        """Pivoting magnitude, elementwise: max over idempotent moduli.

        Equals the largest real-basis component within a factor sqrt(2).
        """
        return np.maximum(np.abs(self.p), np.abs(self.m))

    def sum(self, axis=None) -> "BCArray":
        return BCArray(self.p.sum(axis=axis), self.m.sum(axis=axis))

    def __repr__(self):
        return f"BCArray(shape={self.p.shape})"


def _as_bcarray(value):
    if isinstance(value, BCArray):
        return value
    if isinstance(value, Bicomplex):
        q = value.split()
        return BCArray(np.asarray(q.w_plus), np.asarray(q.w_minus))
    # numbers and ndarrays embed as i-complex
    return BCArray.from_complex_i(value)


def bc_concat(parts) -> BCArray:
    """Concatenate 1-d BCArrays."""
    return BCArray(np.concatenate([b.p for b in parts]),
                   np.concatenate([b.m for b in parts]))


def bc_solve(mat: BCArray, rhs: BCArray,
             floor: float = ZERO_FLOOR) -> BCArray:
    """Solve mat @ x = rhs directly in bicomplex arithmetic.

    Gaussian elimination with partial pivoting; the pivot magnitude is
    the maximum idempotent-component modulus.  Raises SingularSystem
    when the best available pivot has an idempotent component at the
    underflow floor (a zero-divisor pivot cannot be divided by).

    Args:
        mat: (n, n) BCArray.
        rhs: (n,) or (n, nrhs) BCArray.

    Returns:
        BCArray with the shape of rhs.
    """
    n = mat.shape[0]
    if mat.shape != (n, n):
        raise ValueError("matrix must be square")
    a_p = mat.p.copy()
    a_m = mat.m.copy()
    one_d = rhs.p.ndim == 1
    b_p = rhs.p.reshape(n, -1).copy()
    b_m = rhs.m.reshape(n, -1).copy()

    for col in range(n):
        mag = np.maximum(np.abs(a_p[col:, col]), np.abs(a_m[col:, col]))
        piv = col + int(np.argmax(mag))
        if (abs(a_p[piv, col]) < floor) or (abs(a_m[piv, col]) < floor):
            raise SingularSystem(
                f"zero-divisor pivot in column {col} (magnitude "
                f"{float(mag.max()):.3e})")
        if piv != col:
            a_p[[col, piv]] = a_p[[piv, col]]
            a_m[[col, piv]] = a_m[[piv, col]]
            b_p[[col, piv]] = b_p[[piv, col]]
            b_m[[col, piv]] = b_m[[piv, col]]
        inv_p = 1.0 / a_p[col, col]
        inv_m = 1.0 / a_m[col, col]
        f_p = a_p[col + 1:, col] * inv_p
        f_m = a_m[col + 1:, col] * inv_m
        a_p[col + 1:, col:] -= f_p[:, None] * a_p[col, col:]
        a_m[col + 1:, col:] -= f_m[:, None] * a_m[col, col:]
        b_p[col + 1:] -= f_p[:, None] * b_p[col]
        b_m[col + 1:] -= f_m[:, None] * b_m[col]

    x_p = np.zeros_like(b_p)
    x_m = np.zeros_like(b_m)
    for row in range(n - 1, -1, -1):
        acc_p = b_p[row] - a_p[row, row + 1:] @ x_p[row + 1:]
        acc_m = b_m[row] - a_m[row, row + 1:] @ x_m[row + 1:]
        x_p[row] = acc_p / a_p[row, row]
        x_m[row] = acc_m / a_m[row, row]

    if one_d:
        return BCArray(x_p[:, 0], x_m[:, 0])
    return BCArray(x_p, x_m)


def bc_solve_split(mat: BCArray, rhs: BCArray) -> BCArray:
    """Reference solver: two independent complex systems via LAPACK.

    Used to cross-check :func:`bc_solve`; pivoting is chosen per
    idempotent component instead of jointly.
    """
    one_d = rhs.p.ndim == 1
    n = mat.shape[0]
    bp = rhs.p.reshape(n, -1)
    bm = rhs.m.reshape(n, -1)
    try:
        xp = np.linalg.solve(mat.p, bp)
        xm = np.linalg.solve(mat.m, bm)
    except np.linalg.LinAlgError as err:
        raise SingularSystem(str(err)) from err
    if one_d:
        return BCArray(xp[:, 0], xm[:, 0])
    return BCArray(xp, xm)
