"""persistwalk — persistence of the sign-sum of zero-mean integer random walks.

The toolkit has three legs that check each other:

* closed forms: the persistence exponent φ(x, b), its ingredients κ(x, b)
  and ψ̄(b), and the α = 1/2 stable-law algebra behind them;
* estimation: survival curves for the time event (running sign-sum above
  x·s for all s ≤ t) and the excursion event (checked at crossing times up
  to t_2k), log-log slope fits, and two independent estimators of the
  walk's relative asymmetry b;
* exact ground truth: rational-arithmetic dynamic programming at desk
  scale, plus an exhaustive checker for the excursion-sum reduction.

All randomness flows through counter-based per-trial streams, so results
are bit-identical for any worker count at a fixed seed.
"""

__version__ = "0.1.0"

from .errors import PersistWalkError
from .increments import IncrementDistribution, preset, validate
from .exponent import AsymmetryModel, invert_phi, kappa_of, phi, psi_bar_of
from .stable import StableParams, negativity_probability

__all__ = [
    "PersistWalkError",
    "IncrementDistribution",
    "preset",
    "validate",
    "AsymmetryModel",
    "kappa_of",
    "psi_bar_of",
    "phi",
    "invert_phi",
    "StableParams",
    "negativity_probability",
    "__version__",
]
