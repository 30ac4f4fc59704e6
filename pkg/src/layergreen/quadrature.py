"""Panel quadrature for smooth and slowly decaying oscillatory integrands."""

from dataclasses import dataclass

import numpy as np

from .exceptions import NonConvergenceError


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the semi-infinite radial integrals.

    ``nu_max`` of ``None`` lets the caller pick a truncation from the decay
    rate of its integrand.
    """

    nu_max: float = None
    abs_tol: float = 1e-13
    rel_tol: float = 1e-10
    max_subdivisions: int = 4000
    order: int = 20
    max_panels: int = 400
    extrapolation_panels: int = 40

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.nu_max is not None and not (0 < self.nu_max < np.inf):
            raise ValueError("nu_max must be positive and finite")
        if self.max_subdivisions < 1 or self.order < 2:
            raise ValueError("max_subdivisions >= 1 and order >= 2 required")


_RULES = {}


def _rule(order):
    if order not in _RULES:
        _RULES[order] = np.polynomial.legendre.leggauss(order)
    return _RULES[order]


def _gauss(f, lo, hi, order):
    nodes, weights = _rule(order)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
    return half * (vals @ weights)


def integrate_panels(f, edges, abs_tol=1e-13, rel_tol=1e-10, order=20,
                     max_subdivisions=4000):
    """Integrate ``f`` over each panel ``[edges[i], edges[i+1]]``.

    Every panel is compared against its two halves and bisected until the
    difference meets its share of the tolerance.  The relative tolerance is
    measured against the summed magnitude of the panels, which stays
    meaningful when an oscillatory integral cancels.  ``f`` must accept a 1-D
    array.

    Returns
    -------
    sums : ndarray
        Integral over each original panel.
    error : float
        Sum of the accepted local error estimates.
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    owner = np.arange(lo.size)
    sums = np.zeros(lo.size)
    error = 0.0
    total_width = edges[-1] - edges[0]
    scale = None
    splits = 0
    while lo.size:
        mid = 0.5 * (lo + hi)
        coarse = _gauss(f, lo, hi, order)
        left = _gauss(f, lo, mid, order)
        right = _gauss(f, mid, hi, order)
        fine = left + right
        err = np.abs(fine - coarse)
        if scale is None:
            scale = np.abs(fine).sum()
        budget = max(abs_tol, rel_tol * scale) * (hi - lo) / total_width
        ok = err <= budget
        if splits >= max_subdivisions:
            ok[:] = True
        np.add.at(sums, owner[ok], fine[ok])
        error += err[ok].sum()
        bad = ~ok
        splits += int(bad.sum())
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        owner = np.concatenate([owner[bad], owner[bad]])
    if splits >= max_subdivisions and error > max(abs_tol, rel_tol * scale):
        raise NonConvergenceError("panel quadrature hit the subdivision cap",
                                  value=sums, error=error)
    return sums, error


def wynn_epsilon(partial_sums):
    """Limit of a sequence by Wynn's epsilon algorithm.

    Returns the extrapolated value and the difference between the two most
    recent even-column estimates as an error indicator.
    """
    s = np.asarray(partial_sums, dtype=float)
    n = s.size
    if n < 3:
        return float(s[-1]), float(abs(s[-1] - s[0])) if n > 1 else np.inf
    prev = np.zeros(n + 1)
    cur = s.copy()
    estimates = [cur[-1]]
    for k in range(1, n):
        diff = cur[1:] - cur[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = prev[1:cur.size] + 1.0 / diff
        if not np.all(np.isfinite(nxt)):
            break
        prev, cur = cur, nxt
        if k % 2 == 0:
            estimates.append(cur[-1])
        if cur.size < 2:
            break
    if len(estimates) < 2:
        return float(estimates[-1]), float(abs(s[-1] - s[-2]))
    return float(estimates[-1]), float(abs(estimates[-1] - estimates[-2]))


def oscillatory_tail_integral(f, period, cutoff, spec, first_break=None, tail_bound=None):
    """Integral of ``f`` over ``[0, inf)`` for an integrand with half-period ``period``.

    The range is split at ``first_break + k * period``.  If the truncation
    point ``cutoff`` is reached within ``spec.max_panels`` panels the panel
    sums are added directly and ``tail_bound(cutoff)`` is added to the error.
    Otherwise the partial sums over the last panels are extrapolated with the
    epsilon algorithm.

    Returns ``(value, error_estimate)``.
    """
    if first_break is None:
        first_break = period
    if not np.isfinite(period) or first_break >= cutoff:
        sums, err = integrate_panels(f, np.linspace(0.0, cutoff, 9), spec.abs_tol,
                                     spec.rel_tol, spec.order, spec.max_subdivisions)
        tail = tail_bound(cutoff) if tail_bound else 0.0
        return float(sums.sum()), err + tail

    n_direct = (cutoff - first_break) / period + 1
    if n_direct <= spec.max_panels:
        n_direct = int(np.ceil(n_direct))
        breaks = first_break + period * np.arange(n_direct)
        edges = np.concatenate([[0.0], breaks[breaks < cutoff], [cutoff]])
        sums, err = integrate_panels(f, edges, spec.abs_tol, spec.rel_tol, spec.order,
                                     spec.max_subdivisions)
        tail = tail_bound(cutoff) if tail_bound else 0.0
        return float(sums.sum()), err + tail

    n = spec.extrapolation_panels
    edges = np.concatenate([[0.0], first_break + period * np.arange(2 * n)])
    sums, err = integrate_panels(f, edges, spec.abs_tol, spec.rel_tol, spec.order,
                                 spec.max_subdivisions)
    partial = np.cumsum(sums)
    value, extrap_err = wynn_epsilon(partial[n:])
    return value, err + extrap_err
