"""The potential satisfies int a grad u . grad phi = phi(y) for test functions phi.

Run:  python3 demos/weak_identity.py

A smooth bump centred at the source straddles the interface.  The volume
integral uses analytic gradients and a midpoint rule whose cells are cut at
the interface and at the source.  The error should shrink about 4x per
refinement.
"""

import numpy as np

from layergreen import Bump, LayeredMedium, weak_identity_check

medium = LayeredMedium(2.0, 1.0)
y = np.array([0.0, 0.0, 0.5])
phi = Bump(center=tuple(y), radius=1.0)
for n in (16, 32, 64):
    integral, target = weak_identity_check(medium, y, phi, resolution=n)
    print("cells/axis %3d   integral %.8f   phi(y) %.1f   rel err %.2e"
          % (n, integral, target, abs(integral - target) / target))

# A bump that does not touch the source integrates to zero.
integral, target = weak_identity_check(medium, y, Bump((0.0, 0.0, -0.6), 0.4), resolution=48)
print("bump away from the source: integral %.2e, phi(y) = %g" % (integral, target))
