"""Frozen-coefficient approximation near a curved interface.

Close to a point ``s`` of a smooth interface ``x3 = phi(x1, x2)`` the potential
is, to leading order, the two-layer closed form written in a frame whose third
axis is the surface normal at ``s``.  This module builds such frames,
evaluates the frozen approximation, and measures how good it is against a
finite-difference solution of the curved problem.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .exceptions import NonConvergenceError
from .fd import BoxGrid, CoefficientField, assemble_operator, conjugate_gradient
from .medium import LayeredMedium, green_value


@dataclass(frozen=True)
class SurfaceGraph:
    """Interface ``x3 = phi(x1, x2)``; ``grad`` returns ``(dphi/dx1, dphi/dx2)``.

    Callables must accept NumPy arrays.  ``grad`` may be omitted, in which case
    a central difference is used.
    """

    phi: object
    grad: object = None
    hess: object = None

    @classmethod
    def flat(cls):
        return cls(lambda x1, x2: np.zeros_like(np.asarray(x1, float)),
                   lambda x1, x2: (0.0 * np.asarray(x1, float), 0.0 * np.asarray(x2, float)),
                   lambda x1, x2: np.zeros((2, 2)))

    @classmethod
    def paraboloid(cls, curvature_radius, sign=1.0):
        """``sign * (x1^2 + x2^2) / (2 R)``: curvature radius ``R`` at the apex."""
        c = sign / (2.0 * curvature_radius)
        return cls(lambda x1, x2: c * (np.asarray(x1, float) ** 2 + np.asarray(x2, float) ** 2),
                   lambda x1, x2: (2.0 * c * np.asarray(x1, float), 2.0 * c * np.asarray(x2, float)),
                   lambda x1, x2: 2.0 * c * np.eye(2))

    @classmethod
    def plane(cls, slope1=0.0, slope2=0.0):
        return cls(lambda x1, x2: slope1 * np.asarray(x1, float) + slope2 * np.asarray(x2, float),
                   lambda x1, x2: (slope1 + 0.0 * np.asarray(x1, float),
                                   slope2 + 0.0 * np.asarray(x2, float)))

    def gradient(self, x1, x2):
        if self.grad is not None:
            return self.grad(x1, x2)
        eps = 1e-6
        return ((self.phi(x1 + eps, x2) - self.phi(x1 - eps, x2)) / (2 * eps),
                (self.phi(x1, x2 + eps) - self.phi(x1, x2 - eps)) / (2 * eps))

    def mirrored(self):
        """Reflection ``x3 -> -x3`` of the surface."""
        grad = None
        if self.grad is not None:
            grad = lambda x1, x2: tuple(-g for g in self.grad(x1, x2))
        return SurfaceGraph(lambda x1, x2: -self.phi(x1, x2), grad)


@dataclass(frozen=True)
class LocalFrame:
    """Orthonormal frame at ``origin``; rows of ``axes`` are ``t1, t2, N``."""

    origin: np.ndarray
    axes: np.ndarray

    @property
    def normal(self):
        return self.axes[2]

    def to_local(self, x):
        return (np.asarray(x, float) - self.origin) @ self.axes.T

    def to_world(self, xi):
        return self.origin + np.asarray(xi, float) @ self.axes

    def direction_to_world(self, v):
        return np.asarray(v, float) @ self.axes

    def rotated(self, rotation):
        """The same frame seen after rotating world space by ``rotation``."""
        rotation = np.asarray(rotation, float)
        return LocalFrame(rotation @ self.origin, self.axes @ rotation.T)


def frame_at(surface, s_hat):
    """Tangent frame of ``surface`` at the point above ``s_hat``.

    The normal points to the side ``x3 > phi``.  ``t1`` is the world ``x1``
    axis projected onto the tangent plane and ``t2 = N x t1``.
    """
    s1, s2 = (float(v) for v in s_hat)
    origin = np.array([s1, s2, float(surface.phi(s1, s2))])
    g1, g2 = (float(v) for v in surface.gradient(s1, s2))
    normal = np.array([-g1, -g2, 1.0])
    normal /= np.linalg.norm(normal)
    e1 = np.array([1.0, 0.0, 0.0])
    t1 = e1 - (e1 @ normal) * normal
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(normal, t1)
    return LocalFrame(origin, np.array([t1, t2, normal]))


def frozen_green(medium, frame, x, y, radius):
    """Two-layer closed form evaluated in frame-local coordinates.

    ``radius`` declares the neighbourhood of the frame origin where the
    approximation is meant to be used; points farther away raise
    ``ValueError``.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    for name, p in (("x", x), ("y", y)):
        if np.any(np.linalg.norm(p - frame.origin, axis=-1) > radius):
            raise ValueError("%s lies outside the declared neighbourhood of radius %g"
                             % (name, radius))
    return green_value(medium, frame.to_local(x), frame.to_local(y))


# Probe directions in frame-local coordinates: source above the tangent
# plane, receiver below it.
DEFAULT_RAYS = (np.array([0.3, 0.1, 0.95]), np.array([-0.25, 0.2, -0.9]))


@dataclass
class FrozenErrorRow:
    scale: float
    relative_error: float
    u_fd: float = None
    u_frozen: float = None
    iterations: int = 0
    residual: float = 0.0
    status: str = "ok"

    def as_dict(self):
        return {"scale": self.scale, "relative_error": self.relative_error,
                "u_fd": self.u_fd, "u_frozen": self.u_frozen,
                "iterations": self.iterations, "residual": self.residual,
                "status": self.status}


@dataclass
class FrozenErrorTable:
    rows: list
    h: float
    observed_rate: float = None

    def errors(self):
        return np.array([r.relative_error for r in self.rows])

    def as_dict(self):
        return {"h": self.h, "observed_rate": self.observed_rate,
                "rows": [r.as_dict() for r in self.rows]}


def _tangent_height(frame):
    s, nrm = frame.origin, frame.normal
    return lambda x1, x2: s[2] - (nrm[0] * (x1 - s[0]) + nrm[1] * (x2 - s[1])) / nrm[2]


def _scattered_solve(medium, surface, frame, grid, sampling, pairs, tol):
    curved = CoefficientField.curved(medium, grid, surface.phi, sampling)
    tangent = CoefficientField.curved(medium, grid, _tangent_height(frame), sampling)
    k_curved = assemble_operator(curved)
    k_delta = (k_curved - assemble_operator(tangent)).tocsr()
    interior = grid.interior_mask().ravel()
    k_ii = k_curved[interior][:, interior].tocsr()
    nodes = grid.nodes().reshape(-1, 3)
    axes = [grid.axis(i) for i in range(3)]
    touched = np.asarray(abs(k_delta).sum(axis=1)).ravel() > 0.0
    cols = np.unique(k_delta[touched].indices)
    out = []
    for x, y in pairs:
        u_nodes = np.zeros(nodes.shape[0])
        if cols.size:
            u_nodes[cols] = green_value(medium, frame.to_local(nodes[cols]), frame.to_local(y))
        rhs = -(k_delta @ u_nodes)[interior]
        v_int, it, res, _ = conjugate_gradient(k_ii, rhs, tol)
        if res > tol:
            raise NonConvergenceError("CG stopped at relative residual %.3e" % res, error=res)
        v = np.zeros(nodes.shape[0])
        v[interior] = v_int
        v_x = float(RegularGridInterpolator(axes, v.reshape(grid.shape))(x[None, :])[0])
        out.append((v_x, it, float(res)))
    return out


def asymptotic_error_experiment(medium, surface, s_hat, scales, box_factor=3.0, n=65,
                                half_width=None, rays=DEFAULT_RAYS, tol=1e-10,
                                sampling="fraction"):
    """Relative error of :func:`frozen_green` against a curved-interface solve.

    For each scale ``d`` the source and the receiver are placed at distance
    ``d`` from ``s`` along the fixed local directions ``rays``.  The curved
    problem (``a_plus`` above ``phi``, ``a_minus`` below, cells sampled as in
    :meth:`CoefficientField.curved` with ``sampling``) is solved on a box
    centred at ``s`` as frozen field plus correction:

        ``K_curved v = -(K_curved - K_tangent) u_frozen``,  ``v = 0`` on the box,

    where ``K_tangent`` is the same discretisation with the tangent plane as
    interface.  Only edges whose conductance changes carry a load, so the
    point source itself is never discretised.  The reported error is
    ``|v(x)| / |u_frozen(x) + v(x)|``; for a flat surface ``v`` vanishes
    identically.

    By default the box has half-width ``box_factor * d`` with ``n`` nodes per
    axis, so every scale is resolved equally well and only the dimensionless
    curvature ``d / R`` changes between rows.  Passing ``half_width`` uses one
    fixed box for all scales instead.

    Returns a :class:`FrozenErrorTable`; its ``observed_rate`` is the
    least-squares slope of ``log error`` against ``log d`` when all errors are
    positive.
    """
    scales = [float(d) for d in scales]
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be strictly decreasing")
    frame = frame_at(surface, s_hat)
    y_dir = frame.direction_to_world(rays[0] / np.linalg.norm(rays[0]))
    x_dir = frame.direction_to_world(rays[1] / np.linalg.norm(rays[1]))

    def grid_for(d):
        return BoxGrid(half_width if half_width is not None else box_factor * d, n,
                       center=tuple(frame.origin))

    for d in scales:
        grid = grid_for(d)
        if d < 4.0 * grid.h:
            raise ValueError("scale %g is below the resolvable limit 4h = %g" % (d, 4.0 * grid.h))
        if d >= 0.5 * grid.half_width:
            raise ValueError("scale %g must stay well inside the box" % d)

    rows = []
    shared = None
    if half_width is not None:
        pairs = [(frame.origin + d * x_dir, frame.origin + d * y_dir) for d in scales]
        try:
            shared = _scattered_solve(medium, surface, frame, grid_for(scales[0]),
                                      sampling, pairs, tol)
        except NonConvergenceError as exc:
            shared = [exc] * len(scales)
    for i, d in enumerate(scales):
        y = frame.origin + d * y_dir
        x = frame.origin + d * x_dir
        u_frozen = float(frozen_green(medium, frame, x, y, radius=2.0 * d))
        try:
            if shared is not None:
                if isinstance(shared[i], Exception):
                    raise shared[i]
                v_x, it, res = shared[i]
            else:
                (v_x, it, res), = _scattered_solve(medium, surface, frame, grid_for(d),
                                                   sampling, [(x, y)], tol)
        except NonConvergenceError as exc:
            rows.append(FrozenErrorRow(d, float("nan"), u_frozen=u_frozen,
                                       residual=float(exc.error or np.nan), status=str(exc)))
            continue
        u_fd = u_frozen + v_x
        rows.append(FrozenErrorRow(d, abs(v_x) / abs(u_fd), u_fd=u_fd, u_frozen=u_frozen,
                                   iterations=it, residual=res))

    h = grid_for(scales[-1]).h
    table = FrozenErrorTable(rows, h)
    errs = table.errors()
    if len(errs) >= 2 and np.all(np.isfinite(errs)) and np.all(errs > 0):
        table.observed_rate = float(np.polyfit(np.log(scales), np.log(errs), 1)[0])
    return table


def mirrored_setup(medium, surface, rays=DEFAULT_RAYS):
    """Medium, surface and rays reflected through the tangent plane at the apex."""
    flip = np.array([1.0, 1.0, -1.0])
    return (LayeredMedium(medium.a_minus, medium.a_plus), surface.mirrored(),
            (rays[0] * flip, rays[1] * flip))
