"""Carlson symmetric elliptic integral R_D and its first partials.

R_D(x, y, z) = (3/2) * int_0^inf dt / sqrt((x+t)(y+t)(z+t)^3)

evaluated by the duplication theorem,

    R_D(x, y, z) = R_D((x+lam)/4, (y+lam)/4, (z+lam)/4) / 4
                   + 3 / (sqrt(z) (z + lam)),
    lam = sqrt(x)sqrt(y) + sqrt(x)sqrt(z) + sqrt(y)sqrt(z),

iterated until the arguments are nearly equal, then closed with the
fifth-order symmetric series.  The partial derivatives are obtained by
propagating exact tangents through the same recursion, i.e. the
duplication scheme applied to the differentiated integrand; no finite
differences are involved.

One code path serves real, complex and bicomplex arguments: the kernel
only uses ring operations plus a componentwise square root, which both
numpy arrays and :class:`~dipolarbec.bicomplex.BCArray` provide.
"""

from __future__ import annotations

import numbers

import numpy as np

from .bicomplex import BCArray, Bicomplex
from .errors import DomainError, NoConvergence

DEFAULT_RTOL = 1e-14
DEFAULT_MAX_ITER = 200


def _sqrt(v):
    if isinstance(v, BCArray):
        return v.sqrt()
    return np.sqrt(v)


def _mag(v):
    """Elementwise magnitude used for convergence control."""
    if isinstance(v, BCArray):
        return v.abs_max()
    return np.abs(v)


def _lift(*args):
    """Promote mixed arguments to a common representation.

    Returns (values, kind) with kind one of 'real', 'complex', 'bc',
    'bcarray'.  Anything bicomplex promotes every argument to BCArray.
    """
    if any(isinstance(a, (Bicomplex, BCArray)) for a in args):
        kind = "bcarray" if any(isinstance(a, BCArray) for a in args) else "bc"
        out = []
        for a in args:
            if isinstance(a, BCArray):
                out.append(a)
            elif isinstance(a, Bicomplex):
                q = a.split()
                out.append(BCArray(np.asarray(q.w_plus),
                                   np.asarray(q.w_minus)))
            else:
                out.append(BCArray.from_complex_i(a))
        return out, kind
    is_complex = any(
        (isinstance(a, numbers.Complex) and not isinstance(a, numbers.Real))
        or (isinstance(a, np.ndarray) and np.iscomplexobj(a))
        for a in args)
    vals = [np.asarray(a, dtype=np.complex128) for a in args]
    return vals, ("complex" if is_complex else "real")


def _unlift(value, kind):
    if kind == "bcarray":
        return value
    if kind == "bc":
        return value.scalar()
    v = np.asarray(value)
    if kind == "real":
        return float(v.real) if v.shape == () else v.real
    return complex(v) if v.shape == () else v


def _check_real_domain(x, y, z):
    xr, yr, zr = float(x.real), float(y.real), float(z.real)
    if xr < 0 or yr < 0:
        raise DomainError("R_D requires x, y >= 0 for real arguments")
    if zr <= 0:
        raise DomainError("R_D requires z > 0 for real arguments")
    if xr == 0 and yr == 0:
        raise DomainError("R_D diverges when two of the arguments vanish")


def _series_and_tangent(big_x, big_y, d_x=None, d_y=None):
    """Fifth-order symmetric series S(X, Y) with Z = -(X+Y)/3.

    Returns (S, dS list) where dS follows the tangent directions of the
    optional (d_x, d_y) lists.
    """
    big_z = -(big_x + big_y) / 3.0
    e2 = big_x * big_y - 6.0 * big_z * big_z
    e3 = (3.0 * big_x * big_y - 8.0 * big_z * big_z) * big_z
    e4 = 3.0 * (big_x * big_y - big_z * big_z) * big_z * big_z
    e5 = big_x * big_y * big_z * big_z * big_z
    series = (1.0 - 3.0 / 14.0 * e2 + e3 / 6.0 + 9.0 / 88.0 * e2 * e2
              - 3.0 / 22.0 * e4 - 9.0 / 52.0 * e2 * e3 + 3.0 / 26.0 * e5)
    if d_x is None:
        return series, None
    d_series = []
    for dx, dy in zip(d_x, d_y):
        dz = -(dx + dy) / 3.0
        dxy = dx * big_y + big_x * dy
        de2 = dxy - 12.0 * big_z * dz
        de3 = (3.0 * dxy - 16.0 * big_z * dz) * big_z \
            + (3.0 * big_x * big_y - 8.0 * big_z * big_z) * dz
        de4 = 3.0 * ((dxy - 2.0 * big_z * dz) * big_z * big_z
                     + (big_x * big_y - big_z * big_z) * 2.0 * big_z * dz)
        de5 = dxy * big_z * big_z * big_z \
            + 3.0 * big_x * big_y * big_z * big_z * dz
        d_series.append(-3.0 / 14.0 * de2 + de3 / 6.0
                        + 9.0 / 44.0 * e2 * de2 - 3.0 / 22.0 * de4
                        - 9.0 / 52.0 * (de2 * e3 + e2 * de3)
                        + 3.0 / 26.0 * de5)
    return series, d_series


def _rd_core(x, y, z, rtol, max_iter, want_partials):
    """Duplication loop shared by the value and tangent evaluations."""
    zero = (x + y + z) * 0.0
    one = zero + 1.0
    a0 = (x + y + 3.0 * z) / 5.0
    q = float(np.max(np.maximum(np.maximum(_mag(a0 - x), _mag(a0 - y)),
                                _mag(a0 - z)))) * (0.25 * rtol) ** (-1.0 / 6.0)

    xn, yn, zn, an = x + zero, y + zero, z + zero, a0
    acc = zero
    fac = 1.0
    if want_partials:
        gx = [one, zero]
        gy = [zero, one]
        gz = [zero, zero]
        ga = [one / 5.0, one / 5.0]
        gacc = [zero, zero]

    converged = False
    for _ in range(max_iter + 1):
        if fac * q < float(np.min(_mag(an))):
            converged = True
            break
        sx, sy, sz = _sqrt(xn), _sqrt(yn), _sqrt(zn)
        lam = sx * sy + sx * sz + sy * sz
        term = fac / (sz * (zn + lam))
        acc = acc + term
        if want_partials:
            for d in range(2):
                dsx = gx[d] / (2.0 * sx)
                dsy = gy[d] / (2.0 * sy)
                dsz = gz[d] / (2.0 * sz)
                dlam = dsx * (sy + sz) + dsy * (sx + sz) + dsz * (sx + sy)
                gacc[d] = gacc[d] - term * (dsz / sz
                                            + (gz[d] + dlam) / (zn + lam))
                gx[d] = (gx[d] + dlam) / 4.0
                gy[d] = (gy[d] + dlam) / 4.0
                gz[d] = (gz[d] + dlam) / 4.0
                ga[d] = (ga[d] + dlam) / 4.0
        xn = (xn + lam) / 4.0
        yn = (yn + lam) / 4.0
        zn = (zn + lam) / 4.0
        an = (an + lam) / 4.0
        fac /= 4.0

    if not converged:
        raise NoConvergence(
            f"Carlson R_D duplication did not converge in {max_iter} "
            "iterations")

    # A_n - x_n = (A_0 - x) 4^{-n} exactly, so the series arguments are
    # measured against the original x, y.
    inv_a = 1.0 / an
    big_x = (a0 - x) * (fac * inv_a)
    big_y = (a0 - y) * (fac * inv_a)
    pref = fac * inv_a * _sqrt(inv_a)

    if not want_partials:
        series, _ = _series_and_tangent(big_x, big_y)
        return pref * series + 3.0 * acc, None

    ex = [one, zero]
    ey = [zero, one]
    d_big_x = [(one / 5.0 - ex[d]) * (fac * inv_a)
               - big_x * (ga[d] * inv_a) for d in range(2)]
    d_big_y = [(one / 5.0 - ey[d]) * (fac * inv_a)
               - big_y * (ga[d] * inv_a) for d in range(2)]
    series, d_series = _series_and_tangent(big_x, big_y, d_big_x, d_big_y)
    value = pref * series + 3.0 * acc
    d_pref = [-1.5 * pref * (ga[d] * inv_a) for d in range(2)]
    partials = [d_pref[d] * series + pref * d_series[d] + 3.0 * gacc[d]
                for d in range(2)]
    return value, partials


def carlson_rd(x, y, z, rtol: float = DEFAULT_RTOL,
               max_iter: int = DEFAULT_MAX_ITER):
    """Carlson R_D(x, y, z).

    Real arguments require x, y >= 0, z > 0 with at most one of x, y
    zero.  Complex and bicomplex arguments are evaluated on the
    principal square-root branch; idempotent components must stay off
    the negative real axis.

    Raises:
        DomainError: invalid real arguments.
        NoConvergence: duplication iteration cap exceeded.
    """
    (xv, yv, zv), kind = _lift(x, y, z)
    if kind == "real":
        _check_real_domain(xv, yv, zv)
    value, _ = _rd_core(xv, yv, zv, rtol, max_iter, want_partials=False)
    return _unlift(value, kind)


def carlson_rd_with_partials(x, y, z, rtol: float = DEFAULT_RTOL,
                             max_iter: int = DEFAULT_MAX_ITER):
    """(R_D, dR_D/dx, dR_D/dy) in one duplication pass."""
    (xv, yv, zv), kind = _lift(x, y, z)
    if kind == "real":
        _check_real_domain(xv, yv, zv)
    value, partials = _rd_core(xv, yv, zv, rtol, max_iter,
                               want_partials=True)
    return (_unlift(value, kind), _unlift(partials[0], kind),
            _unlift(partials[1], kind))


def carlson_rd_dx(x, y, z, rtol: float = DEFAULT_RTOL,
                  max_iter: int = DEFAULT_MAX_ITER):
    """dR_D/dx, exact tangent of the duplication evaluation."""
    return carlson_rd_with_partials(x, y, z, rtol, max_iter)[1]


def carlson_rd_dy(x, y, z, rtol: float = DEFAULT_RTOL,
                  max_iter: int = DEFAULT_MAX_ITER):
    """dR_D/dy, exact tangent of the duplication evaluation."""
    return carlson_rd_with_partials(x, y, z, rtol, max_iter)[2]
