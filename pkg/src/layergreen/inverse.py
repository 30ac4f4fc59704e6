"""Blow-up of the orthogonality integral as probes approach an interface.

If two coefficient configurations produced the same boundary data, the
integral ``I = int_Omega v grad u1(x, y) . grad u2(x, z) dx`` with
``v = a1 - a2`` would vanish for all admissible probes ``y``, ``z``.  Near a
point ``s`` of an interface that only one configuration has, both gradients
behave like ``|x - y|^-2``, so with ``y = z = s + d N`` the integral grows like
``int |x - y|^-4 dx ~ 1/d``.  This module evaluates ``I(d)`` with the
two-layer closed forms and fits the growth exponent.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import nquad

from .medium import green_gradient


@dataclass(frozen=True)
class ProbeConfig:
    """Integration box ``[lo, hi]`` below the interface and probe heights above ``s``.

    ``v`` is the constant coefficient difference on the box.  When left as
    ``None`` it is taken from the two media on the side of the box, i.e.
    ``medium1.a_minus - medium2.a_minus``.
    """

    lo: tuple = (-0.5, -0.5, -1.0)
    hi: tuple = (0.5, 0.5, 0.0)
    distances: tuple = (0.2, 0.1, 0.05, 0.025)
    v: float = None
    resolution: int = 16
    s: tuple = (0.0, 0.0, 0.0)
    normal: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        lo, hi = np.asarray(self.lo, float), np.asarray(self.hi, float)
        if np.any(hi <= lo):
            raise ValueError("box must have hi > lo on every axis")
        d = list(self.distances)
        if any(b >= a for a, b in zip(d, d[1:])) or min(d) <= 0:
            raise ValueError("distances must be positive and strictly decreasing")
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")

    def probe(self, d):
        n = np.asarray(self.normal, float)
        return np.asarray(self.s, float) + d * n / np.linalg.norm(n)

    def contrast_on_box(self, medium1, medium2):
        if self.v is not None:
            return float(self.v)
        return medium1.a_minus - medium2.a_minus


def _graded_edges(lo, hi, focus, d, resolution):
    """Cell edges on ``[lo, hi]`` whose widths grow like ``max(|t - focus|, d) / resolution``."""
    kappa = 1.0 / resolution
    edges = [focus]
    for direction, end in ((1.0, hi), (-1.0, lo)):
        t = 0.0
        span = abs(end - focus)
        pts = []
        while t < span:
            t = min(t + kappa * max(t, d), span)
            pts.append(focus + direction * t)
        if direction > 0:
            edges = edges + pts
        else:
            edges = pts[::-1] + edges
    edges = np.asarray(edges)
    return edges[(edges >= lo) & (edges <= hi)]


def box_quadrature(lo, hi, y, resolution):
    """Midpoint rule on a tensor mesh graded toward the point of the box nearest ``y``.

    Cell widths are proportional to ``max(distance to that point, dist(y, box))``
    along each axis.  Returns ``(midpoints per axis, widths per axis)``.
    """
    lo, hi, y = (np.asarray(a, float) for a in (lo, hi, y))
    focus = np.clip(y, lo, hi)
    gap = float(np.linalg.norm(y - focus))
    if gap == 0.0:
        raise ValueError("probe point lies inside the integration box")
    mids, widths = [], []
    for i in range(3):
        e = _graded_edges(lo[i], hi[i], focus[i], gap, resolution)
        mids.append(0.5 * (e[1:] + e[:-1]))
        widths.append(np.diff(e))
    return mids, widths


def _integrate(func, lo, hi, y, resolution, chunk=1_000_000):
    (mx, my, mz), (wx, wy, wz) = box_quadrature(lo, hi, y, resolution)
    gx, gy = np.meshgrid(mx, my, indexing="ij")
    wxy = np.outer(wx, wy)
    step = max(1, chunk // gx.size)
    total = 0.0
    for k in range(0, mz.size, step):
        zs = mz[k:k + step]
        pts = np.empty(gx.shape + (zs.size, 3))
        pts[..., 0] = gx[..., None]
        pts[..., 1] = gy[..., None]
        pts[..., 2] = zs
        total += float(np.sum(func(pts) * wxy[..., None] * wz[k:k + step]))
    return total


def orthogonality_integral(medium1, medium2, config, d):
    """``I(d) = int_box v grad u1(x, y) . grad u2(x, y) dx`` with ``y = s + d N``."""
    y = config.probe(d)
    lo, hi = np.asarray(config.lo, float), np.asarray(config.hi, float)
    if np.all(y >= lo) and np.all(y <= hi):
        raise ValueError("probe point lies inside the integration box")
    v = config.contrast_on_box(medium1, medium2)
    if v == 0.0:
        return 0.0

    def integrand(x):
        g1 = green_gradient(medium1, x, y)
        g2 = green_gradient(medium2, x, y)
        return np.sum(g1 * g2, axis=-1)

    return v * _integrate(integrand, lo, hi, y, config.resolution)


def kernel_integral(config, d):
    """``int_box |x - y|^-4 dx`` with the same quadrature as :func:`orthogonality_integral`."""
    y = config.probe(d)

    def integrand(x):
        return np.sum((x - y) ** 2, axis=-1) ** -2

    return _integrate(integrand, config.lo, config.hi, y, config.resolution)


def brute_force_kernel_integral(config, d, rel_tol=1e-6):
    """``int_box |x - y|^-4 dx`` by nested adaptive quadrature (scipy ``nquad``).

    Independent of the graded midpoint rule; used as its oracle.  When the box
    is symmetric about the probe in ``x1`` and ``x2`` only one quadrant is
    integrated.
    """
    y = config.probe(d)
    lo, hi = np.asarray(config.lo, float), np.asarray(config.hi, float)
    ranges, factor = [], 1.0
    for i in range(2):
        if np.isclose(lo[i] + hi[i], 2.0 * y[i]):
            ranges.append([y[i], hi[i]])
            factor *= 2.0
        else:
            ranges.append([lo[i], hi[i]])
    ranges.append([lo[2], hi[2]])

    def f(x1, x2, x3):
        return ((x1 - y[0]) ** 2 + (x2 - y[1]) ** 2 + (x3 - y[2]) ** 2) ** -2

    value, _ = nquad(f, ranges, opts={"epsrel": rel_tol, "epsabs": 0.0, "limit": 200})
    return factor * value


def kernel_self_test(half_width=4.0, distances=(0.2, 0.1, 0.05, 0.025), resolution=16,
                     oracle=True):
    """Exponent of ``int |x - y|^-4`` over ``[-W, W]^2 x [-W, 0]`` below the probe.

    Over the whole half-space the integral is exactly ``pi / d``; a box of
    half-width ``W`` removes a contribution of order ``1/W``, which biases the
    fitted exponent by roughly ``d_max / W``.  Returns a dict with the graded
    quadrature values, the brute-force values (when ``oracle``) and both
    exponents.
    """
    w = float(half_width)
    config = ProbeConfig(lo=(-w, -w, -w), hi=(w, w, 0.0), distances=tuple(distances),
                         resolution=resolution)
    values = [kernel_integral(config, d) for d in config.distances]
    out = {"half_width": w, "distances": list(config.distances), "values": values,
           "exponent": fit_exponent(config.distances, values)[0],
           "half_space": [np.pi / d for d in config.distances]}
    if oracle:
        ref = [brute_force_kernel_integral(config, d) for d in config.distances]
        out["oracle_values"] = ref
        out["oracle_exponent"] = fit_exponent(config.distances, ref)[0]
        out["max_rel_diff"] = float(max(abs(a - b) / b for a, b in zip(values, ref)))
    return out


@dataclass
class BlowupFit:
    distances: list
    values: list
    exponent: float = None
    residual: float = None
    trivial: bool = False
    consistent: bool = True
    note: str = ""

    def as_dict(self):
        return {"distances": list(self.distances), "values": list(self.values),
                "exponent": self.exponent, "residual": self.residual,
                "trivial": self.trivial, "consistent": self.consistent, "note": self.note}


def fit_exponent(distances, values):
    """Least-squares slope of ``log |I|`` against ``log d`` and the RMS residual."""
    x = np.log(np.asarray(distances, float))
    yv = np.log(np.abs(np.asarray(values, float)))
    coef, res, *_ = np.polyfit(x, yv, 1, full=True)
    rms = float(np.sqrt(res[0] / x.size)) if res.size else 0.0
    return float(coef[0]), rms


def blowup_exponent(config, medium1=None, medium2=None, kernel=False):
    """Growth exponent of ``I(d)`` over ``config.distances``.

    With ``kernel=True`` the bare kernel ``|x - y|^-4`` is integrated instead,
    which needs no media.  A zero ``v`` gives a trivial report without an
    exponent.  Values whose sign disagrees with ``v`` (or vanish) mark the run
    as inconsistent.
    """
    d = list(config.distances)
    if len(d) < 3:
        raise ValueError("need at least three distances")
    if kernel:
        vals = [kernel_integral(config, di) for di in d]
        sign = 1.0
    else:
        v = config.contrast_on_box(medium1, medium2)
        if v == 0.0:
            return BlowupFit(d, [0.0] * len(d), trivial=True, note="v = 0: integral vanishes")
        vals = [orthogonality_integral(medium1, medium2, config, di) for di in d]
        sign = np.sign(v)
    if any(np.sign(val) != sign for val in vals):
        return BlowupFit(d, vals, consistent=False,
                         note="integral vanished or changed sign for a one-signed v")
    exponent, rms = fit_exponent(d, vals)
    return BlowupFit(d, vals, exponent=exponent, residual=rms)
