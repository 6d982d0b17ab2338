"""Wulff shapes are the equality case of the maximal-curvature inequality.

For a closed curve of area A, the largest anisotropic curvature is at
least sqrt(kappa / A), kappa being the area of the unit Wulff shape. Here
we build Wulff shapes for two anisotropies, check that they sit on the
bound, and then perturb one to watch the margin open up.

Run with ``python3 demos/wulff_equality.py``.
"""

import numpy as np

from finslerflow.anisotropy import Anisotropy, wulff_area, wulff_boundary
from finslerflow.gen import GenSpec, generate
from finslerflow.verify import equality_gap, main_inequality

anisotropies = {
    "quadratic(4,1)": Anisotropy.quadratic(4.0, 1.0),
    "fourier 4-fold": Anisotropy.fourier(1.0, [(4, 0.05, 0.0)]),
}

for name, a in anisotropies.items():
    print(f"{name}: kappa = {wulff_area(a):.10f}")
    w = wulff_boundary(a, 512)
    for r in (0.5, 1.0, 2.0):
        rep = main_inequality(w.scaled(r), a)
        print(f"  r = {r:3.1f}  kF_max = {rep.lhs:.6f}  sqrt(kappa/A) = {rep.rhs:.6f}"
              f"  relative margin = {rep.relative_margin:+.2e}")

# the quadratic Wulff shape is an ellipse with semi-axes 2 and 1
a = anisotropies["quadratic(4,1)"]
print(f"\nquadratic kappa against the ellipse area 2 pi: {wulff_area(a) - 2 * np.pi:+.2e}")

# a small mode-3 bump moves the curve off the equality case; this Wulff shape
# has radius of curvature down to 0.25, so the bump must stay below 1/32
a = anisotropies["fourier 4-fold"]
print("\nperturbed Wulff shapes:")
for eps in (0.0, 0.002, 0.005, 0.01, 0.02):
    c = generate(GenSpec("perturbed_wulff", {"eps": eps, "mode": 3}, M=512), a)
    rep = main_inequality(c, a)
    print(f"  eps = {eps:5.3f}  relative margin = {rep.relative_margin:.3e}"
          f"  distance to Wulff = {equality_gap(c, a):.3e}")
