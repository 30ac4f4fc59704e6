"""Closed-form potential of a point source near a two-layer interface.

Run:  python3 demos/closed_form.py

The source sits at height 1 above the plane separating a medium with
coefficient 2 (above) from one with coefficient 1 (below).  Above the plane
the potential is a free-space term plus an image of strength b = 1/3 at the
mirror point; below it, a single weakened free-space term.
"""

import numpy as np

from layergreen import (LayeredMedium, Side, green_gradient, green_value, interface_trace,
                        singular_coefficient)

medium = LayeredMedium(a_plus=2.0, a_minus=1.0)
y = np.array([0.0, 0.0, 1.0])
print("contrast b =", medium.b)

# Evaluate along the vertical line through the source.
for z in (3.0, 2.0, 0.5, 0.0, -0.5, -1.0, -3.0):
    x = np.array([0.0, 0.0, z])
    print("x3 = %5.2f   u = %.10f" % (z, green_value(medium, x, y)))

# The flux a du/dx3 is the same on both sides of the plane, while du/dx3 is not.
x0 = np.array([1.0, 0.0, 0.0])
g_up = green_gradient(medium, x0, y, side=Side.PLUS)[2]
g_dn = green_gradient(medium, x0, y, side=Side.MINUS)[2]
print("du/dx3 above %.6f, below %.6f" % (g_up, g_dn))
print("flux   above %.6f, below %.6f" % (medium.a_plus * g_up, medium.a_minus * g_dn))

# When the source itself touches the plane, the potential is symmetric in a_plus, a_minus.
print("source on the plane, r = 1:", interface_trace(medium, (1.0, 0.0, 0.0), (0.0, 0.0)),
      "=", 1 / (6 * np.pi))

# Near the source u behaves like c / r with c set by the coefficient where the source lives.
for src in ((0, 0, 1.0), (0, 0, -1.0), (0, 0, 0.0)):
    src = np.array(src, float)
    r = 1e-6
    print("y3 = %4.1f  u*r = %.8f  limit %.8f" % (src[2], green_value(medium, src + [r, 0, 0], src) * r,
                                                 singular_coefficient(medium, src)))
