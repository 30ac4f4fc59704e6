"""How good is the flat-interface formula next to a curved interface?

Run:  python3 demos/curved_interface.py     (about 6 s)

The interface is the paraboloid x3 = (x1^2 + x2^2) / 10 (curvature radius 5).
Near its apex the closed form written in the tangent frame is the leading
term.  Source and receiver are placed at distance d from the apex on fixed
rays.  The curved problem is solved on a box of half-width 3d, and the
relative gap is reported.  It should fall roughly linearly with d.
"""

from layergreen import LayeredMedium, SurfaceGraph, asymptotic_error_experiment

medium = LayeredMedium(2.0, 1.0)
scales = [0.4, 0.2, 0.1]
table = asymptotic_error_experiment(medium, SurfaceGraph.paraboloid(5.0), (0.0, 0.0), scales)
for row in table.rows:
    print("d = %.2f   relative error %.4e   (u = %.5f)" % (row.scale, row.relative_error, row.u_fd))
print("observed rate d^%.2f" % table.observed_rate)

flat = asymptotic_error_experiment(medium, SurfaceGraph.flat(), (0.0, 0.0), scales)
print("flat surface control:", list(flat.errors()))
