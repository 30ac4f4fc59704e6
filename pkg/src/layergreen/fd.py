"""Finite-difference solution of the point-source transmission problem on a box.

Unknowns live on the nodes of a uniform Cartesian grid with an odd number of
nodes per axis, so that a node plane coincides with ``x3 = 0``.  Coefficients
are sampled at the centres of the primal cells, which therefore never sit on
a flat interface.  The conductance of the edge between two neighbouring nodes
is the mean of the four cells sharing that edge: the dual face of the edge is
split into four quarters, one per cell, that conduct in parallel.  Along the
edge the coefficient is constant (an edge lies inside a single layer of
cells), so no series averaging is needed.

The discrete problem ``-div_h(a grad_h u) = delta_h`` is solved with a
Jacobi-preconditioned conjugate gradient method.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .exceptions import NonConvergenceError
from .medium import green_value, green_gradient


@dataclass(frozen=True)
class BoxGrid:
    """``n`` nodes per axis on ``[c - L, c + L]`` along each axis."""

    half_width: float
    n: int
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.n < 17 or self.n % 2 == 0:
            raise ValueError("n must be odd and at least 17, got %r" % (self.n,))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def h(self):
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def shape(self):
        return (self.n,) * 3

    def axis(self, i):
        return self.center[i] + np.linspace(-self.half_width, self.half_width, self.n)

    def nodes(self):
        """Node coordinates, shape ``(n, n, n, 3)`` in ``ij`` order."""
        return np.stack(np.meshgrid(self.axis(0), self.axis(1), self.axis(2),
                                    indexing="ij"), axis=-1)

    def cell_centers(self):
        axes = [0.5 * (a[1:] + a[:-1]) for a in (self.axis(0), self.axis(1), self.axis(2))]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def interior_mask(self):
        mask = np.zeros(self.shape, dtype=bool)
        mask[1:-1, 1:-1, 1:-1] = True
        return mask

    def nearest_node(self, p):
        idx = np.rint((np.asarray(p, float) - np.asarray(self.center) + self.half_width)
                      / self.h).astype(int)
        return tuple(int(i) for i in idx)

    def contains(self, p, strict=True):
        off = np.abs(np.asarray(p, float) - np.asarray(self.center))
        return bool(np.all(off < self.half_width) if strict
                    else np.all(off <= self.half_width))


def _edge_mean(cells, axis):
    """Mean of the (up to four) cells sharing each edge along ``axis``."""
    others = [d for d in range(3) if d != axis]
    pad = [(0, 0)] * 3
    for d in others:
        pad[d] = (1, 1)
    padded = np.pad(cells, pad, mode="edge")
    total = 0.0
    for s0 in (0, 1):
        for s1 in (0, 1):
            sl = [slice(None)] * 3
            sl[others[0]] = slice(s0, s0 + cells.shape[others[0]] + 1)
            sl[others[1]] = slice(s1, s1 + cells.shape[others[1]] + 1)
            total = total + padded[tuple(sl)]
    return 0.25 * total


@dataclass
class CoefficientField:
    """Edge conductances of the three edge families.

    ``faces[i]`` has the node shape with axis ``i`` shortened by one; entry
    ``faces[i][p]`` couples node ``p`` to node ``p + e_i``.
    """

    grid: BoxGrid
    faces: tuple
    cells: np.ndarray = None

    @classmethod
    def from_cells(cls, grid, cells, normal_cells=None):
        """Conductances from cell coefficients.

        ``normal_cells`` optionally replaces ``cells`` for the ``x3`` edges,
        which gives an anisotropic cell tensor.
        """
        cells = np.asarray(cells, dtype=float)
        normal_cells = cells if normal_cells is None else np.asarray(normal_cells, float)
        for arr in (cells, normal_cells):
            if arr.shape != (grid.n - 1,) * 3:
                raise ValueError("cell array must have shape %s" % ((grid.n - 1,) * 3,))
            if np.any(arr <= 0):
                raise ValueError("cell coefficients must be positive")
        faces = (_edge_mean(cells, 0), _edge_mean(cells, 1), _edge_mean(normal_cells, 2))
        return cls(grid, faces, cells)

    @classmethod
    def layered(cls, medium, grid):
        centers = grid.cell_centers()
        return cls.from_cells(grid, np.where(centers[..., 2] > 0.0,
                                             medium.a_plus, medium.a_minus))

    @classmethod
    def curved(cls, medium, grid, surface_phi, sampling="center"):
        """Coefficient field of the interface ``x3 = surface_phi(x1, x2)``.

        ``sampling="center"`` puts ``a_plus`` in every cell whose centre lies
        above the surface.  ``sampling="fraction"`` uses the fraction ``f`` of
        each cell's height above the surface: in-plane edges see the
        arithmetic mix ``f a_plus + (1 - f) a_minus`` and vertical edges the
        harmonic mix, the effective tensor of a thin horizontal layer.  This
        resolves interfaces bending by less than a cell, provided the surface
        slope stays small.
        """
        c = grid.cell_centers()
        height = surface_phi(c[..., 0], c[..., 1])
        if sampling == "center":
            above = c[..., 2] > height
            return cls.from_cells(grid, np.where(above, medium.a_plus, medium.a_minus))
        if sampling != "fraction":
            raise ValueError("sampling must be 'center' or 'fraction'")
        h = grid.h
        frac = np.clip((c[..., 2] + 0.5 * h - height) / h, 0.0, 1.0)
        a_p, a_m = medium.a_plus, medium.a_minus
        tangential = frac * a_p + (1.0 - frac) * a_m
        normal = 1.0 / (frac / a_p + (1.0 - frac) / a_m)
        return cls.from_cells(grid, tangential, normal)


def _node_index(shape):
    return np.arange(np.prod(shape)).reshape(shape)


def assemble_operator(coef):
    """Full node operator ``K`` with ``(K u)_p = sum_q k_pq (u_p - u_q) / h^2``.

    ``K`` is symmetric and each row sums to zero.
    """
    grid = coef.grid
    idx = _node_index(grid.shape)
    rows, cols, vals = [], [], []
    inv_h2 = 1.0 / grid.h ** 2
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        p = idx[tuple(lo)].ravel()
        q = idx[tuple(hi)].ravel()
        w = coef.faces[axis].ravel() * inv_h2
        rows += [p, q, p, q]
        cols += [q, p, p, q]
        vals += [-w, -w, w, w]
    size = idx.size
    k = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(size, size))
    return k.tocsr()


@dataclass
class LinearSystem:
    """Interior system ``A u_I = rhs`` after Dirichlet elimination."""

    grid: BoxGrid
    matrix: sp.csr_matrix
    rhs: np.ndarray
    boundary_values: np.ndarray
    interior: np.ndarray
    source_node: tuple = None
    coefficients: CoefficientField = None

    def full_field(self, interior_values):
        u = self.boundary_values.copy().ravel()
        u[self.interior.ravel()] = interior_values
        return u.reshape(self.grid.shape)


def _restrict(k, grid, boundary_values):
    interior = grid.interior_mask()
    flat = interior.ravel()
    k_ii = k[flat][:, flat].tocsr()
    k_ib = k[flat][:, ~flat]
    lift = k_ib @ boundary_values.ravel()[~flat]
    return k_ii, lift, interior


def build_system(medium, grid, y, coefficients=None, boundary="closed_form"):
    """Assemble the discrete point-source problem for a source at ``y``.

    The load is ``1/h^3`` at the node nearest ``y``.  ``boundary`` is
    ``"closed_form"`` (Dirichlet data from :func:`green_value`) or ``"zero"``.
    """
    y = np.asarray(y, dtype=float)
    if not grid.contains(y):
        raise ValueError("source %s lies outside the box" % (y,))
    if y[2] == 0.0:
        raise ValueError("source on the interface plane is not supported")
    node = grid.nearest_node(y)
    if min(node) < 1 or max(node) > grid.n - 2:
        raise ValueError("source is too close to the box boundary")
    if np.linalg.norm(grid.nodes()[node] - y) > grid.h:
        raise ValueError("source must be within h of a grid node")
    coef = coefficients or CoefficientField.layered(medium, grid)
    k = assemble_operator(coef)

    g = np.zeros(grid.shape)
    if boundary == "closed_form":
        nodes = grid.nodes()
        bmask = ~grid.interior_mask()
        g[bmask] = green_value(medium, nodes[bmask], y)
    elif boundary != "zero":
        raise ValueError("boundary must be 'closed_form' or 'zero'")
    k_ii, lift, interior = _restrict(k, grid, g)
    load = np.zeros(grid.shape)
    load[node] = 1.0 / grid.h ** 3
    rhs = load[interior] - lift
    return LinearSystem(grid, k_ii, rhs, g, interior, node, coef)


@dataclass
class SolveReport:
    iterations: int
    residual: float
    converged: bool = True
    rel_l2_error: float = None
    max_error: float = None
    excluded_radius: float = None
    residual_history: list = field(default_factory=list, repr=False)

    def as_dict(self):
        return {"iterations": self.iterations, "residual": self.residual,
                "converged": self.converged, "rel_l2_error": self.rel_l2_error,
                "max_error": self.max_error, "excluded_radius": self.excluded_radius}


def conjugate_gradient(matrix, rhs, tol=1e-8, maxiter=None, x0=None, callback=None):
    """Jacobi-preconditioned CG for a symmetric positive definite ``matrix``.

    Stops when ``||r|| <= tol * ||rhs||``.  ``callback(x)`` sees every iterate.
    Returns ``(x, iterations, relative_residual, history)``.
    """
    n = rhs.size
    maxiter = maxiter or 10 * n
    b_norm = np.linalg.norm(rhs)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if b_norm == 0.0:
        return np.zeros(n), 0, 0.0, [0.0]
    inv_diag = 1.0 / matrix.diagonal()
    r = rhs - matrix @ x
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    history = [np.linalg.norm(r) / b_norm]
    it = 0
    while history[-1] > tol and it < maxiter:
        ap = matrix @ p
        alpha = rz / (p @ ap)
        x += alpha * p
        r -= alpha * ap
        it += 1
        history.append(np.linalg.norm(r) / b_norm)
        if callback is not None:
            callback(x)
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, it, history[-1], history


def solve_system(system, tol=1e-8, maxiter=None):
    """Solve ``system``; returns ``(field, report)`` with the full node field.

    Raises :class:`NonConvergenceError` (partial field and report attached as
    ``value``) when the iteration cap is hit first.
    """
    x, it, res, hist = conjugate_gradient(system.matrix, system.rhs, tol, maxiter)
    report = SolveReport(iterations=it, residual=float(res), converged=bool(res <= tol),
                         residual_history=hist)
    u = system.full_field(x)
    if not report.converged:
        raise NonConvergenceError("CG stopped at relative residual %.3e after %d iterations"
                                  % (res, it), value=(u, report), error=res)
    return u, report


def compare_to_closed_form(medium, grid, y, tol=1e-8, excluded=4.0, excluded_radius=None,
                           return_field=False):
    """Solve on ``grid`` and compare with :func:`green_value` away from the source.

    Nodes within ``excluded * h`` of ``y`` (or within ``excluded_radius`` when
    given) are left out.  The report carries the relative L2 error and the
    maximum relative pointwise error.  A fixed ``excluded_radius`` is the right
    choice for convergence studies: a ball shrinking with ``h`` keeps the
    lattice error of the point load in the comparison.
    """
    system = build_system(medium, grid, y)
    u, report = solve_system(system, tol)
    nodes = grid.nodes()
    radius = excluded * grid.h if excluded_radius is None else float(excluded_radius)
    keep = system.interior & (np.linalg.norm(nodes - np.asarray(y, float), axis=-1) > radius)
    exact = green_value(medium, nodes[keep], y)
    diff = u[keep] - exact
    report.rel_l2_error = float(np.linalg.norm(diff) / np.linalg.norm(exact))
    report.max_error = float(np.max(np.abs(diff) / exact))
    report.excluded_radius = radius
    if return_field:
        return report, u
    return report


def interface_flux_mismatch(coef, u):
    """Discrete flux balance at the nodes of the plane ``x3 = 0``.

    Returns the largest difference between the flux arriving from above and
    the flux leaving below, relative to the largest flux, over interior
    interface nodes away from any source.  The vertical fluxes are
    ``k (u_top - u_0) / h`` and ``k (u_0 - u_bottom) / h``; the in-plane
    fluxes close the discrete balance.
    """
    grid = coef.grid
    mid = grid.n // 2
    h = grid.h
    kz = coef.faces[2]
    up = kz[1:-1, 1:-1, mid] * (u[1:-1, 1:-1, mid + 1] - u[1:-1, 1:-1, mid]) / h
    down = kz[1:-1, 1:-1, mid - 1] * (u[1:-1, 1:-1, mid] - u[1:-1, 1:-1, mid - 1]) / h
    kx, ky = coef.faces[0], coef.faces[1]
    c = u[..., mid]
    lateral = (kx[1:, 1:-1, mid] * (c[2:, 1:-1] - c[1:-1, 1:-1])
               - kx[:-1, 1:-1, mid] * (c[1:-1, 1:-1] - c[:-2, 1:-1])
               + ky[1:-1, 1:, mid] * (c[1:-1, 2:] - c[1:-1, 1:-1])
               - ky[1:-1, :-1, mid] * (c[1:-1, 1:-1] - c[1:-1, :-2])) / h
    balance = up - down + lateral
    scale = max(np.abs(up).max(), np.abs(down).max())
    return float(np.abs(balance).max() / scale)


@dataclass(frozen=True)
class Bump:
    """Smooth bump ``exp(1 - 1 / (1 - s^2))``, ``s = |x - center| / radius``, with value 1 at
    the centre and compact support in the ball."""

    center: tuple
    radius: float

    def __call__(self, x):
        s2 = np.sum((np.asarray(x, float) - np.asarray(self.center)) ** 2, axis=-1) / self.radius ** 2
        out = np.zeros_like(s2)
        inside = s2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
        return out if out.ndim else float(out)

    def gradient(self, x):
        d = np.asarray(x, float) - np.asarray(self.center)
        s2 = np.sum(d ** 2, axis=-1) / self.radius ** 2
        out = np.zeros_like(d)
        inside = s2 < 1.0
        si = s2[inside]
        val = np.exp(1.0 - 1.0 / (1.0 - si))
        # d/dx exp(1 - 1/(1-s2)) = -val * 2 d / (R^2 (1-s2)^2)
        out[inside] = -(val * 2.0 / (self.radius ** 2 * (1.0 - si) ** 2))[:, None] * d[inside]
        return out

    def support_box(self):
        c = np.asarray(self.center, float)
        return c - self.radius, c + self.radius


def _edges_with(lo, hi, cells, breaks):
    edges = np.linspace(lo, hi, cells + 1)
    extra = [b for b in breaks if lo < b < hi]
    return np.unique(np.concatenate([edges, extra]))


def weak_identity_check(medium, y, phi, resolution=64, box=None, chunk=2_000_000):
    """Evaluate ``int a grad u . grad phi dx`` by the midpoint rule.

    The integration box defaults to the support box of ``phi``; the cells are
    split at ``x3 = 0`` and at the source coordinates so that no midpoint sits
    on the interface or at the source.  Returns ``(integral, phi(y))``.
    """
    y = np.asarray(y, dtype=float)
    lo, hi = phi.support_box()
    if box is not None:
        blo, bhi = (np.asarray(b, float) for b in box)
        if np.any(lo < blo) or np.any(hi > bhi):
            raise ValueError("support of phi is clipped by the quadrature box")
        lo, hi = blo, bhi
    axes = []
    for i in range(3):
        breaks = [y[i]] + ([0.0] if i == 2 else [])
        e = _edges_with(lo[i], hi[i], resolution, breaks)
        axes.append((0.5 * (e[1:] + e[:-1]), np.diff(e)))
    (mx, wx), (my, wy), (mz, wz) = axes
    a_z = np.where(mz > 0.0, medium.a_plus, medium.a_minus)
    total = 0.0
    plane = mx.size * my.size
    step = max(1, chunk // plane)
    gx, gy = np.meshgrid(mx, my, indexing="ij")
    wxy = np.outer(wx, wy)
    for k0 in range(0, mz.size, step):
        zs = mz[k0:k0 + step]
        pts = np.empty((gx.shape[0], gx.shape[1], zs.size, 3))
        pts[..., 0] = gx[..., None]
        pts[..., 1] = gy[..., None]
        pts[..., 2] = zs
        integrand = np.sum(green_gradient(medium, pts, y) * phi.gradient(pts), axis=-1)
        weights = wxy[..., None] * (wz[k0:k0 + step] * a_z[k0:k0 + step])
        total += float(np.sum(integrand * weights))
    return total, float(phi(y))
