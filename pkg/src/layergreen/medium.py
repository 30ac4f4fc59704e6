"""Closed-form point-source field of a two-layer medium.

The medium is split by the plane ``x3 = 0``: the coefficient is ``a_plus``
above it and ``a_minus`` below it.  For a unit source at ``y`` the potential
``u`` solves ``div(a grad u) = -delta(x - y)`` with ``u`` and ``a du/dx3``
continuous across the plane.  It is the free-space potential plus an image of
strength ``b`` placed at the mirror point of the source.

All functions accept ``x`` either as a single point of shape ``(3,)`` or as a
stack of points of shape ``(..., 3)``; the source ``y`` is always one point.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import AmbiguousSideError, SingularEvaluationError

FOUR_PI = 4.0 * np.pi


class Side(Enum):
    """Location of a point relative to the interface plane."""

    PLUS = 1
    MINUS = -1
    ON_INTERFACE = 0

    @classmethod
    def of(cls, x3):
        x3 = float(x3)
        if x3 > 0.0:
            return cls.PLUS
        if x3 < 0.0:
            return cls.MINUS
        return cls.ON_INTERFACE


@dataclass(frozen=True)
class LayeredMedium:
    """Pair of positive coefficients on either side of ``x3 = 0``."""

    a_plus: float
    a_minus: float

    def __post_init__(self):
        for name in ("a_plus", "a_minus"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError("%s must be a finite positive number, got %r"
                                 % (name, getattr(self, name)))
            object.__setattr__(self, name, value)

    @property
    def b(self):
        return contrast(self)

    def coefficient(self, side):
        """Coefficient on ``side``; the interface itself has no single value."""
        if side is Side.PLUS:
            return self.a_plus
        if side is Side.MINUS:
            return self.a_minus
        raise AmbiguousSideError("the coefficient is discontinuous on the interface")

    def swapped(self):
        return LayeredMedium(self.a_minus, self.a_plus)


def contrast(medium):
    """Reflection strength ``(a_plus - a_minus) / (a_plus + a_minus)``."""
    return (medium.a_plus - medium.a_minus) / (medium.a_plus + medium.a_minus)


def _as_points(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (3,):
        raise ValueError("points must have a trailing dimension of 3, got shape %s"
                         % (x.shape,))
    return x


def _as_source(y):
    y = np.asarray(y, dtype=float)
    if y.shape != (3,):
        raise ValueError("the source must be a single 3-vector, got shape %s" % (y.shape,))
    if not np.all(np.isfinite(y)):
        raise ValueError("source coordinates must be finite")
    return y


def _scalar(value):
    return float(value) if np.ndim(value) == 0 else value


def mirror_distance(x, y):
    """Distance from ``x`` to the reflection of ``y`` into the half-space of ``x``.

    Equal to ``sqrt(rho**2 + (|x3| + |y3|)**2)`` where ``rho`` is the horizontal
    separation.  It is never smaller than ``|x - y|``.
    """
    x = _as_points(x)
    y = _as_source(y)
    d = x - y
    height = np.abs(x[..., 2]) + abs(y[2])
    big_r = np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2 + height ** 2)
    if np.any(big_r == 0.0):
        raise SingularEvaluationError("singular evaluation: both points coincide on the interface")
    return _scalar(big_r)


def _distance(x, y):
    r = np.linalg.norm(x - y, axis=-1)
    if np.any(r == 0.0):
        raise SingularEvaluationError("singular evaluation: x coincides with the source y")
    return r


def green_value(medium, x, y):
    """Potential at ``x`` of a unit source at ``y``.

    A source exactly on the interface uses the common limit of the two one-sided
    formulas, ``1 / (2 pi (a_plus + a_minus) r)``.

    Raises
    ------
    SingularEvaluationError
        If ``x`` equals ``y``.
    """
    x = _as_points(x)
    y = _as_source(y)
    r = _distance(x, y)
    side = Side.of(y[2])
    if side is Side.ON_INTERFACE:
        return _scalar(1.0 / (2.0 * np.pi * (medium.a_plus + medium.a_minus) * r))
    a = medium.coefficient(side)
    b = side.value * contrast(medium)
    if b == 0.0:
        return _scalar(1.0 / (FOUR_PI * a * r))
    big_r = mirror_distance(x, y)
    return _scalar((1.0 / r + b / big_r) / (FOUR_PI * a))


def interface_trace(medium, x, y_hat):
    """Potential at ``x`` of a unit source sitting on the interface at ``(y_hat, 0)``."""
    y_hat = np.asarray(y_hat, dtype=float)
    if y_hat.shape != (2,):
        raise ValueError("y_hat must be a pair of horizontal coordinates")
    x = _as_points(x)
    r = _distance(x, np.array([y_hat[0], y_hat[1], 0.0]))
    return _scalar(1.0 / (2.0 * np.pi * (medium.a_plus + medium.a_minus) * r))


def green_gradient(medium, x, y, side=None):
    """Gradient of :func:`green_value` with respect to ``x``.

    The normal derivative jumps across ``x3 = 0``. Evaluation points on the
    interface therefore need ``side`` (``Side.PLUS`` or ``Side.MINUS``), which
    selects the one-sided limit; off the interface ``side`` is ignored.

    Raises
    ------
    SingularEvaluationError
        If ``x`` equals ``y``.
    AmbiguousSideError
        If some ``x`` lies on the interface and no side was given.
    """
    x = _as_points(x)
    y = _as_source(y)
    d = x - y
    r = _distance(x, y)
    src_side = Side.of(y[2])
    if src_side is Side.ON_INTERFACE:
        scale = 1.0 / (2.0 * np.pi * (medium.a_plus + medium.a_minus))
        return -scale * d / r[..., None] ** 3

    a = medium.coefficient(src_side)
    b = src_side.value * contrast(medium)
    if b == 0.0:
        return -d / (FOUR_PI * a * r[..., None] ** 3)

    sgn = np.sign(x[..., 2])
    on_plane = sgn == 0.0
    if np.any(on_plane):
        if side not in (Side.PLUS, Side.MINUS):
            raise AmbiguousSideError(
                "x lies on the interface; pass side=Side.PLUS or Side.MINUS")
        sgn = np.where(on_plane, float(side.value), sgn)

    height = np.abs(x[..., 2]) + abs(y[2])
    big_r = np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2 + height ** 2)
    image = np.stack([d[..., 0], d[..., 1], height * sgn], axis=-1)
    grad = d / r[..., None] ** 3 + b * image / big_r[..., None] ** 3
    return -grad / (FOUR_PI * a)


def singular_coefficient(medium, y):
    """Limit of ``u(x, y) * |x - y|`` as ``x`` approaches ``y``.

    This is an explicit constant ``c`` for the near-source bound ``u <= c / r``:
    ``1 / (4 pi a)`` with the coefficient of the source side, or
    ``1 / (2 pi (a_plus + a_minus))`` for a source on the interface.
    """
    y = _as_source(y)
    side = Side.of(y[2])
    if side is Side.ON_INTERFACE:
        return 1.0 / (2.0 * np.pi * (medium.a_plus + medium.a_minus))
    return 1.0 / (FOUR_PI * medium.coefficient(side))


def bounds(medium, x, y):
    """Two-sided envelope ``(lower, upper)`` of ``u`` for an off-interface source."""
    x = _as_points(x)
    y = _as_source(y)
    side = Side.of(y[2])
    r = _distance(x, y)
    b = abs(contrast(medium))
    if side is Side.ON_INTERFACE:
        c = singular_coefficient(medium, y)
        return _scalar(c / r), _scalar(c / r)
    a = medium.coefficient(side)
    return _scalar((1.0 - b) / (FOUR_PI * a * r)), _scalar((1.0 + b) / (FOUR_PI * a * r))
