"""Free-boundary calibration of the axial hyperplane in a circular cone.

Explicit construction and machine verification of a divergence-free unit
vector field tangent to the cone surface and equal to e_1 on the hyperplane
slice, for base dimension n >= 4 and slope below the sharp threshold
(n-3)/(2 sqrt(n-2)); plus a discrete free-boundary min-cut laboratory that
corroborates (n >= 4) and refutes (n = 2) area-minimality of the slice.
"""

__version__ = "0.1.0"
