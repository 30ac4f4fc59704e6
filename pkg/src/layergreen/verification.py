"""Invariant checks on the closed-form evaluator, bundled as one suite.

Each check returns a :class:`CheckResult`.  The evaluator under test is
pluggable so that a deliberately broken variant (image strength with the
wrong sign) can be run through the same suite as a mutation test.
"""

from dataclasses import dataclass, field

import numpy as np

from .medium import FOUR_PI, Side, bounds, green_gradient, green_value, interface_trace
from .spectral import laplace_hankel_check, verify_profile_ode

LAPLACE_GRID = tuple((rho, t) for rho in (0.0, 0.5, 1.0, 3.0) for t in (0.5, 1.0, 4.0)) \
    + ((3.0, 4.0), (0.0, 2.0))


@dataclass
class CheckResult:
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)

    def as_dict(self):
        out = {"name": self.name, "passed": bool(self.passed)}
        out.update(self.metrics)
        return out


class Evaluator:
    """Closed-form value and gradient, optionally with the image term sign-flipped."""

    def __init__(self, medium, flip_image=False):
        self.medium = medium
        self.flip_image = flip_image

    def _free(self, x, y):
        a = self.medium.coefficient(Side.of(y[2]))
        d = np.asarray(x, float) - y
        r = np.linalg.norm(d, axis=-1)
        return 1.0 / (FOUR_PI * a * r), -d / (FOUR_PI * a * r[..., None] ** 3)

    def value(self, x, y):
        u = green_value(self.medium, x, y)
        if not self.flip_image or y[2] == 0.0:
            return u
        free, _ = self._free(x, y)
        return 2.0 * free - u

    def gradient(self, x, y, side=None):
        g = green_gradient(self.medium, x, y, side=side)
        if not self.flip_image or y[2] == 0.0:
            return g
        _, free = self._free(x, y)
        return 2.0 * free - g


def _random_points(rng, n, scale=2.0, min_height=0.05):
    pts = rng.uniform(-scale, scale, size=(n, 3))
    small = np.abs(pts[:, 2]) < min_height
    pts[small, 2] = np.copysign(min_height, pts[small, 2] + 1e-300)
    return pts


def check_reciprocity(ev, rng, pairs=1000, tol=1e-13):
    xs, ys = _random_points(rng, pairs), _random_points(rng, pairs)
    worst = 0.0
    for x, y in zip(xs, ys):
        u_xy, u_yx = ev.value(x, y), ev.value(y, x)
        worst = max(worst, abs(u_xy - u_yx) / abs(u_xy))
    return CheckResult("reciprocity", worst <= tol,
                       {"pairs": pairs, "max_rel_diff": worst, "tol": tol})


def check_transmission(ev, rng, points=50, tol=1e-8):
    """Continuity (extrapolated from x3 = +-eps) and flux matching at interface points."""
    m = ev.medium
    cont, flux = 0.0, 0.0
    for _ in range(points):
        y = _random_points(rng, 1)[0]
        xh = rng.uniform(-2.0, 2.0, size=2)
        scale = abs(ev.value(np.array([xh[0], xh[1], 0.0]), y))
        jumps = []
        for eps in (1e-3, 1e-5):
            up = ev.value(np.array([xh[0], xh[1], eps]), y)
            dn = ev.value(np.array([xh[0], xh[1], -eps]), y)
            jumps.append(up - dn)
        # the jump of a continuous function is O(eps); extrapolate to eps -> 0
        jump0 = (jumps[1] * 1e-3 - jumps[0] * 1e-5) / (1e-3 - 1e-5)
        cont = max(cont, abs(jump0) / scale)
        x0 = np.array([xh[0], xh[1], 0.0])
        f_up = m.a_plus * ev.gradient(x0, y, side=Side.PLUS)[2]
        f_dn = m.a_minus * ev.gradient(x0, y, side=Side.MINUS)[2]
        denom = max(abs(f_up), abs(f_dn), 1e-300)
        flux = max(flux, abs(f_up - f_dn) / denom)
    return CheckResult("transmission", cont <= tol and flux <= tol,
                       {"points": points, "max_continuity_error": cont,
                        "max_flux_error": flux, "tol": tol})


def check_bounds(ev, rng, pairs=500):
    worst = -np.inf
    for _ in range(pairs):
        x, y = _random_points(rng, 2)
        lo, hi = bounds(ev.medium, x, y)
        u = ev.value(x, y)
        slack = 1e-14 * hi
        worst = max(worst, (lo - u - slack) / hi, (u - hi - slack) / hi)
    return CheckResult("bounds", worst <= 0.0,
                       {"pairs": pairs, "max_violation": max(worst, 0.0)})


def _laplacian(ev, x, y, h):
    u0 = ev.value(x, y)
    total = -6.0 * u0
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        total += ev.value(x + e, y) + ev.value(x - e, y)
    return total / h ** 2


def check_harmonicity(ev, rng, points=20, h=0.04, ratio_range=(3.5, 4.5)):
    """7-point Laplacian away from source and interface shrinks ~4x when h halves."""
    y = np.array([0.1, -0.2, 0.5])
    samples = []
    while len(samples) < points:
        x = rng.uniform(-2.0, 2.0, size=3)
        if abs(x[2]) > 4 * h and np.linalg.norm(x - y) > 0.5:
            samples.append(x)
    coarse = max(abs(_laplacian(ev, x, y, h)) for x in samples)
    fine = max(abs(_laplacian(ev, x, y, h / 2)) for x in samples)
    ratio = coarse / fine
    ok = ratio_range[0] <= ratio <= ratio_range[1]
    return CheckResult("harmonicity", ok, {"points": points, "h": h, "max_laplacian_h": coarse,
                                           "max_laplacian_h2": fine, "ratio": ratio})


def check_profile_ode(medium, rng, cases=10, tol=1e-6):
    worst = 0.0
    failed = []
    for _ in range(cases):
        nu = float(rng.uniform(0.2, 5.0))
        y3 = float(rng.choice([-1, 1]) * rng.uniform(0.1, 2.0))
        rep = verify_profile_ode(medium, nu, y3, tol=tol)
        worst = max(worst, max(rep.residuals.values()))
        if not rep.passed:
            failed.append({"nu": nu, "y3": y3})
    return CheckResult("ode_residuals", not failed,
                       {"cases": cases, "max_residual": worst, "tol": tol, "failed": failed})


def check_hankel_identity(grid=LAPLACE_GRID, tol=1e-8):
    worst = 0.0
    for rho, t in grid:
        num, exact = laplace_hankel_check(rho, t)
        worst = max(worst, abs(num - exact))
    return CheckResult("hankel_identity", worst <= tol,
                       {"grid_points": len(grid), "max_abs_error": worst, "tol": tol})


def check_trace(ev, rng, points=20, tol=1e-5):
    worst = 0.0
    for _ in range(points):
        xh, yh = rng.uniform(-1, 1, size=3), rng.uniform(-1, 1, size=2)
        xh[2] = rng.choice([-1, 1]) * rng.uniform(0.2, 1.0)
        ref = interface_trace(ev.medium, xh, yh)
        for s in (1e-7, -1e-7):
            worst = max(worst, abs(ev.value(xh, np.array([yh[0], yh[1], s])) - ref) / ref)
    return CheckResult("trace", worst <= tol, {"points": points, "max_rel_error": worst,
                                               "tol": tol})


def run_suite(medium, seed=0, inject_fault=False, pairs=1000):
    """Run every check; returns ``(all_passed, [CheckResult, ...])``."""
    ev = Evaluator(medium, flip_image=inject_fault)
    rng = np.random.default_rng(seed)
    results = [
        check_reciprocity(ev, rng, pairs=pairs),
        check_transmission(ev, rng),
        check_bounds(ev, rng),
        check_harmonicity(ev, rng),
        check_profile_ode(medium, rng),
        check_hankel_identity(),
        check_trace(ev, rng),
    ]
    return all(r.passed for r in results), results
