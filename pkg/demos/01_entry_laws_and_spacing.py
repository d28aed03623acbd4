"""Entry laws, symmetrized laws, and the anti-concentration certificate.

Everything here is exact rational arithmetic: atoms and masses are
fractions, and the spacing check P(c1 <= |xi - xi'| <= c2) >= c3 is a
finite sum, not an estimate.
"""

from fractions import Fraction as F

import numpy as np

from randsym import (AtomicLaw, SamplerConfig, SpacingCertificate,
                     atom_bound_holds, auto_certificate, bernoulli,
                     difference_law, gaussian, lazy_difference_law, lazy_sign,
                     sample_truncated, standardize, verify_spacing)

law = bernoulli()
print("Bernoulli +-1:", law.atoms)

# Any finitely supported law can be affinely standardized; the rescale is
# exact whenever the variance is the square of a rational.
raw = AtomicLaw(((0, F(1, 2)), (2, F(1, 2))))
print("standardize {0, 2}:", standardize(raw).atoms)
print("standardize lazy sign (irrational scale):",
      [(round(float(v), 6), p) for v, p in standardize(lazy_sign(F(1, 2))).atoms])

# The symmetrized law xi - xi' and its lazy variant eta^(1/2) (xi - xi')
# drive the quadratic-form machinery.
d = difference_law(law)
z = lazy_difference_law(law, F(1, 2))
print("xi - xi':", d.atoms)
print("eta^(1/2) (xi - xi'):", z.atoms)

# A spacing certificate witnesses anti-concentration.  For Bernoulli the
# best certificate is (2, 2, 1/2), found automatically:
cert = auto_certificate(law)
print("auto certificate:", (cert.c1, cert.c2, cert.c3))
print("verify (2, 2, 1/2):", verify_spacing(law, SpacingCertificate(2, 2, F(1, 2))))
print("verify (1, 1.5, 0.1):", verify_spacing(law, SpacingCertificate(1, 1.5, 0.1)))

# Any accepted certificate caps the largest atom: sup_a P(xi = a) is at
# most sqrt(1 - c3), checked exactly by squaring.
print("largest-atom bound holds:", atom_bound_holds(law, cert))

# Continuous laws carry a sampler plus the closed-form mass of |xi - xi'|.
g = gaussian()
print("gaussian spacing at (1/2, 4):",
      verify_spacing(g, SpacingCertificate(0.5, 4.0, 0.5)))

# Truncated sampling: draws are rejected above n^(B+1); the stream is a
# pure function of (seed, index), so reruns and worker splits agree.
cfg = SamplerConfig(seed=7, truncation_exponent=1.0, n=10)   # bound 100
draws = sample_truncated(g, cfg, 10 ** 5)
print("1e5 truncated gaussian draws, max |x| =", float(np.max(np.abs(draws))))
again = sample_truncated(g, cfg, 10 ** 5)
print("bit-identical rerun:", bool((draws == again).all()))
