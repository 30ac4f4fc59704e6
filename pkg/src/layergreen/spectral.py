"""Spectral reconstruction of the layered potential.

Fourier transforming in the horizontal variables turns the point-source
problem into a two-point ODE in ``x3`` for every radial frequency ``nu``.
Its closed-form solution, :func:`profile_w`, is inverted back to physical
space with a ``J0``-weighted radial integral.  Nothing here calls the
closed-form evaluator in :mod:`layergreen.medium`, so the two routes can be
checked against each other.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NonConvergenceError, SingularFrequencyError
from .medium import Side, contrast
from .quadrature import QuadratureSpec, oscillatory_tail_integral

__all__ = [
    "ProfileQuery", "QuadratureSpec", "ProfileODEReport", "bessel_j0", "profile_w",
    "profile_dw", "verify_profile_ode", "laplace_hankel_check", "hankel_invert",
    "hankel_invert_terms",
]

# Below this argument the Maclaurin series loses less than ~1e-13 to
# cancellation; above it the Hankel expansion is accurate to ~1e-12.
_SERIES_LIMIT = 12.0


def _j0_series(t):
    q = -0.25 * t * t
    term = np.ones_like(t)
    total = np.ones_like(t)
    k = 1
    while True:
        term = term * q / (k * k)
        total = total + term
        # terms decrease monotonically once k > t/2
        if k > 0.5 * np.max(t, initial=0.0) and np.max(np.abs(term), initial=0.0) < 1e-17:
            break
        k += 1
    return total


def _j0_asymptotic(t):
    p = np.ones_like(t)
    q = np.zeros_like(t)
    coef = np.ones_like(t)
    smallest = np.full_like(t, np.inf)
    active = np.ones(t.shape, dtype=bool)
    for k in range(1, 80):
        coef = coef * (2 * k - 1) ** 2 / (8.0 * k * t)
        mag = np.abs(coef)
        # stop at the smallest term of the divergent series
        active &= mag < smallest
        smallest = np.where(active, mag, smallest)
        if not active.any():
            break
        m, odd = divmod(k, 2)
        if odd:
            q = q + np.where(active, -((-1.0) ** m) * coef, 0.0)
        else:
            p = p + np.where(active, ((-1.0) ** m) * coef, 0.0)
    phase = t - 0.25 * np.pi
    return np.sqrt(2.0 / (np.pi * t)) * (p * np.cos(phase) - q * np.sin(phase))


def bessel_j0(t):
    """Bessel function of the first kind of order zero for ``t >= 0``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise ValueError("bessel_j0 is defined here for nonnegative arguments only")
    out = np.empty_like(t)
    small = t <= _SERIES_LIMIT
    if small.any():
        out[small] = _j0_series(t[small])
    if (~small).any():
        out[~small] = _j0_asymptotic(t[~small])
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ProfileQuery:
    """Radial frequency and the two heights of one transformed evaluation."""

    nu: float
    x3: float
    y3: float

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if self.y3 == 0:
            raise ValueError("the transformed profile needs a source off the interface")


def _source_terms(medium, y3):
    side = Side.of(y3)
    if side is Side.ON_INTERFACE:
        raise ValueError("the transformed profile needs a source off the interface")
    return medium.coefficient(side), side.value * contrast(medium)


def profile_w(medium, nu, x3, y3):
    """Horizontal Fourier transform of the potential at frequency ``nu``.

    ``exp(-nu |x3 - y3|) / (2 nu a) +- b exp(-nu (|x3| + |y3|)) / (2 nu a)`` with
    ``a`` and the sign of ``b`` taken from the source side.  Accepts arrays.
    """
    nu = np.asarray(nu, dtype=float)
    if np.any(nu <= 0):
        raise SingularFrequencyError("profile_w has a 1/nu pole at nu = 0")
    a, b = _source_terms(medium, y3)
    x3 = np.asarray(x3, dtype=float)
    direct = np.exp(-nu * np.abs(x3 - y3))
    image = b * np.exp(-nu * (np.abs(x3) + abs(y3)))
    out = (direct + image) / (2.0 * nu * a)
    return float(out) if out.ndim == 0 else out


def profile_dw(medium, nu, x3, y3, side=None):
    """Analytic ``d profile_w / d x3``.

    At ``x3 = 0`` or ``x3 = y3`` the derivative jumps; ``side`` picks the limit
    from above (``Side.PLUS``) or below (``Side.MINUS``).
    """
    a, b = _source_terms(medium, y3)
    nu = float(nu)
    x3 = float(x3)
    if side is None and x3 in (0.0, y3):
        raise ValueError("derivative is one-sided at x3 = %r; pass side" % x3)
    s_direct = side.value if x3 == y3 else np.sign(x3 - y3)
    s_image = side.value if x3 == 0.0 else np.sign(x3)
    direct = -s_direct * np.exp(-nu * abs(x3 - y3))
    image = -s_image * b * np.exp(-nu * (abs(x3) + abs(y3)))
    return float(direct + image) / (2.0 * a)


@dataclass
class ProfileODEReport:
    """Residuals of the transformed two-point problem; ``passed`` uses ``tol``."""

    nu: float
    y3: float
    residuals: dict = field(default_factory=dict)
    tol: float = 1e-6

    @property
    def passed(self):
        return all(v <= self.tol for v in self.residuals.values())

    def as_dict(self):
        return {"nu": self.nu, "y3": self.y3, "tol": self.tol,
                "residuals": dict(self.residuals), "passed": self.passed}


def verify_profile_ode(medium, nu, y3, tol=1e-6):
    """Check the closed-form profile against the ODE it is supposed to solve.

    Everything is measured with finite differences of :func:`profile_w`:

    ``ode``
        ``|w'' - nu^2 w| / (nu^2 |w|)`` at points away from ``0`` and ``y3``.
    ``continuity``
        relative jump of ``w`` across ``x3 = 0``.
    ``flux``
        relative mismatch of ``a_plus w'(0+)`` and ``a_minus w'(0-)``.
    ``flux_analytic``
        the same with the analytic one-sided derivatives.
    ``source_jump``
        ``|a_side [w'](y3) + 1|``, the unit source strength.
    ``decay``
        ``w`` at ``|x3| = |y3| + 50/nu`` relative to ``w(y3)``.

    Failures are reported through the residuals, never raised.
    """
    if nu <= 0 or y3 == 0:
        raise ValueError("need nu > 0 and y3 != 0")
    a_p, a_m = medium.a_plus, medium.a_minus
    a_src = a_p if y3 > 0 else a_m

    def w(z):
        return profile_w(medium, nu, z, y3)

    length = min(abs(y3), 1.0 / nu)
    # truncation ~ (h nu)^2 / 12 against round-off ~ 4 eps / (h nu)^2; the
    # stencil must also stay clear of the kinks, which are >= |y3|/2 away
    h = min(3e-4 / nu, 0.1 * abs(y3))
    res = {}

    samples = np.array([-2.0, -0.5, 0.5, 1.5, 3.0]) * y3
    second = (w(samples + h) - 2.0 * w(samples) + w(samples - h)) / h ** 2
    res["ode"] = float(np.max(np.abs(second - nu ** 2 * w(samples))
                              / (nu ** 2 * np.abs(w(samples)))))

    delta = 1e-12 * length
    w0 = w(0.0)
    res["continuity"] = float(abs(w(delta) - w(-delta)) / abs(w0))

    hf = 1e-4 * length
    up = (-3.0 * w(0.0) + 4.0 * w(hf) - w(2 * hf)) / (2 * hf)
    down = (3.0 * w(0.0) - 4.0 * w(-hf) + w(-2 * hf)) / (2 * hf)
    flux_scale = max(abs(a_p * up), abs(a_m * down))
    res["flux"] = float(abs(a_p * up - a_m * down) / flux_scale)
    up_exact = profile_dw(medium, nu, 0.0, y3, Side.PLUS)
    down_exact = profile_dw(medium, nu, 0.0, y3, Side.MINUS)
    res["flux_analytic"] = float(abs(a_p * up_exact - a_m * down_exact)
                                 / max(abs(a_p * up_exact), abs(a_m * down_exact)))

    above = (-3.0 * w(y3) + 4.0 * w(y3 + hf) - w(y3 + 2 * hf)) / (2 * hf)
    below = (3.0 * w(y3) - 4.0 * w(y3 - hf) + w(y3 - 2 * hf)) / (2 * hf)
    res["source_jump"] = float(abs(a_src * (above - below) + 1.0))

    far = abs(y3) + 50.0 / nu
    res["decay"] = float(max(w(far), w(-far)) / w(y3))
    return ProfileODEReport(nu=float(nu), y3=float(y3), residuals=res, tol=tol)


def _radial_integral(integrand, rho, decay, amplitude, spec):
    """``int_0^inf integrand(nu) dnu`` for an integrand bounded by
    ``amplitude * exp(-decay * nu)`` and oscillating like ``J0(nu rho)``."""
    cutoff = spec.nu_max
    if cutoff is None:
        cutoff = 40.0 / decay if decay > 0 else np.inf

    def tail(n):
        if decay <= 0:
            return np.inf
        return amplitude * np.exp(-decay * n) / decay

    if rho == 0.0:
        if not np.isfinite(cutoff):
            raise ValueError("integrand does not decay: need rho > 0 or a positive decay rate")
        return oscillatory_tail_integral(integrand, np.inf, cutoff, spec, tail_bound=tail)
    period = np.pi / rho
    # McMahon estimate of the first zero of J0, then half-period spacing
    first = 0.75 * np.pi / rho
    return oscillatory_tail_integral(integrand, period, cutoff, spec,
                                     first_break=first, tail_bound=tail)


def laplace_hankel_check(rho, t, quad=None):
    """Numerical ``int_0^inf exp(-nu t) J0(nu rho) dnu`` next to ``1/sqrt(rho^2 + t^2)``.

    Returns ``(numeric, closed_form)``.  Raises :class:`NonConvergenceError`
    carrying the achieved error when the estimate exceeds the tolerance.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    quad = quad or QuadratureSpec()

    def integrand(nu):
        return np.exp(-nu * t) * bessel_j0(nu * rho)

    value, err = _radial_integral(integrand, float(rho), float(t), 1.0, quad)
    exact = 1.0 / np.hypot(rho, t)
    if err > max(quad.abs_tol, quad.rel_tol * abs(value)):
        raise NonConvergenceError("Laplace-Hankel quadrature did not converge",
                                  value=value, error=err)
    return value, exact


def _geometry(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (3,) or y.shape != (3,):
        raise ValueError("x and y must be 3-vectors")
    if y[2] == 0.0:
        raise ValueError("hankel inversion needs a source off the interface")
    if abs(x[2]) + abs(y[2]) <= 0.0:
        raise ValueError("need |x3| + |y3| > 0 for a decaying integrand")
    rho = float(np.hypot(x[0] - y[0], x[1] - y[1]))
    return rho, float(x[2]), float(y[2])


def _invert(integrand, rho, decay, amplitude, quad):
    value, err = _radial_integral(integrand, rho, decay, amplitude, quad)
    value /= 2.0 * np.pi
    err /= 2.0 * np.pi
    if not np.isfinite(err) or err > max(quad.abs_tol, quad.rel_tol * abs(value)):
        raise NonConvergenceError("Hankel inversion did not reach the requested tolerance",
                                  value=value, error=err)
    return value, err


def hankel_invert(medium, x, y, quad=None, return_error=False):
    """Potential at ``x`` of a unit source at ``y`` by radial inversion of :func:`profile_w`.

    Computes ``(1/2 pi) int_0^inf nu w(nu, x3, y3) J0(nu rho) dnu``.  The
    integrand is finite at ``nu = 0`` because ``nu w`` is; Gauss nodes never
    touch the origin.
    """
    quad = quad or QuadratureSpec()
    rho, x3, y3 = _geometry(x, y)
    a, b = _source_terms(medium, y3)

    def integrand(nu):
        return nu * profile_w(medium, nu, x3, y3) * bessel_j0(nu * rho)

    decay = abs(x3 - y3)
    if decay == 0.0 and rho == 0.0:
        raise ValueError("x coincides with the source")
    value, err = _invert(integrand, rho, decay, (1.0 + abs(b)) / (2.0 * a), quad)
    return (value, err) if return_error else value


def hankel_invert_terms(medium, x, y, quad=None):
    """Invert the direct and image parts of the profile separately.

    Returns ``(direct, image)``; their sum is :func:`hankel_invert`.
    """
    quad = quad or QuadratureSpec()
    rho, x3, y3 = _geometry(x, y)
    a, b = _source_terms(medium, y3)
    d_direct = abs(x3 - y3)
    d_image = abs(x3) + abs(y3)

    def direct(nu):
        return np.exp(-nu * d_direct) / (2.0 * a) * bessel_j0(nu * rho)

    def image(nu):
        return b * np.exp(-nu * d_image) / (2.0 * a) * bessel_j0(nu * rho)

    if d_direct == 0.0 and rho == 0.0:
        raise ValueError("x coincides with the source")
    v_direct, _ = _invert(direct, rho, d_direct, 1.0 / (2.0 * a), quad)
    v_image, _ = _invert(image, rho, d_image, abs(b) / (2.0 * a), quad)
    return v_direct, v_image
