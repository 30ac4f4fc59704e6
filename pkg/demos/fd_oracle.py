"""Solve the transmission problem on a grid and compare with the closed form.

Run:  python3 demos/fd_oracle.py     (about 5 s)

Nodes are placed so that a grid plane coincides with the interface.  Dirichlet
data on the box come from the closed form, so the only error left is the
discretization itself.  A second run with zero boundary data shows how a
finite box biases the answer, roughly like 1/L.
"""

import numpy as np

from layergreen import BoxGrid, LayeredMedium, build_system, compare_to_closed_form, green_value, solve_system

medium = LayeredMedium(2.0, 1.0)
y = (0.0, 0.0, 0.5)

print("closed-form boundary data, L = 2")
for n in (17, 33, 65):
    grid = BoxGrid(2.0, n)
    rep = compare_to_closed_form(medium, grid, y, excluded_radius=0.5)
    print("  n=%3d h=%.4f  rel L2 = %.3e  (CG %d its)" % (n, grid.h, rep.rel_l2_error, rep.iterations))

print("zero boundary data, h = 0.25, probe at (0, 0, -0.5)")
probe = np.array([0.0, 0.0, -0.5])
exact = green_value(medium, probe, y)
for half_width, n in ((2.0, 17), (4.0, 33), (8.0, 65)):
    grid = BoxGrid(half_width, n)
    u, _ = solve_system(build_system(medium, grid, y, boundary="zero"))
    gap = exact - u[grid.nearest_node(probe)]
    print("  L=%3.0f  exact - u_h = %.5f   L * gap = %.4f" % (half_width, gap, half_width * gap))
