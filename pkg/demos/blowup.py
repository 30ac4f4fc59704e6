"""Blow-up of the orthogonality integral as probes approach an interface.

Run:  python3 demos/blowup.py     (about 10 s)

Two configurations share the lower half-space but differ above the plane
(coefficients 2 and 1.5).  On a unit box below the plane we take a constant
coefficient difference v = 0.5 and integrate v grad u1 . grad u2.  Both
sources sit at height d above the origin.  The integrand behaves like
|x - y|^-4, so the integral grows like 1/d.
"""

from layergreen import LayeredMedium, ProbeConfig, blowup_exponent
from layergreen.inverse import kernel_self_test

m1, m2 = LayeredMedium(2.0, 1.0), LayeredMedium(1.5, 1.0)
fit = blowup_exponent(ProbeConfig(v=0.5), m1, m2)
for d, value in zip(fit.distances, fit.values):
    print("d = %.3f   I(d) = %.6f" % (d, value))
print("log-log slope %.3f (residual %.1e)" % (fit.exponent, fit.residual))

# With identical configurations v vanishes and so does the integral.
print("identical media:", blowup_exponent(ProbeConfig(), m1, m1).note)

# The bare kernel on a wide box, checked against scipy's nested quadrature.
k = kernel_self_test(half_width=4.0)
print("kernel slope %.3f, brute force %.3f, largest value gap %.1e"
      % (k["exponent"], k["oracle_exponent"], k["max_rel_diff"]))
