"""Rebuild the potential from its horizontal Fourier transform.

Run:  python3 demos/spectral_oracle.py

For each radial frequency nu the transformed problem is an ODE in x3 whose
solution is a pair of exponentials.  Inverting with a J0-weighted radial
integral must give back the closed form.  The check below also confirms the
Laplace-Hankel identity that the inversion rests on.
"""

import numpy as np

from layergreen import (LayeredMedium, green_value, hankel_invert, laplace_hankel_check,
                        verify_profile_ode)

for rho, t in ((0.0, 2.0), (3.0, 4.0), (1.0, 1.0)):
    num, exact = laplace_hankel_check(rho, t)
    print("int exp(-nu t) J0(nu rho): rho=%.1f t=%.1f  %.15f vs %.15f" % (rho, t, num, exact))

medium = LayeredMedium(2.0, 1.0)
print("ODE residuals (nu=1, y3=1):", verify_profile_ode(medium, 1.0, 1.0).residuals)

rng = np.random.default_rng(0)
worst = 0.0
for _ in range(50):
    x = rng.uniform(-2, 2, 3)
    y = rng.uniform(-2, 2, 3)
    if abs(x[2]) + abs(y[2]) < 0.1 or np.linalg.norm(x - y) < 0.05:
        continue
    u_spec, err = hankel_invert(medium, x, y, return_error=True)
    u = green_value(medium, x, y)
    worst = max(worst, abs(u_spec - u) / u)
print("worst relative gap over random pairs: %.2e" % worst)
