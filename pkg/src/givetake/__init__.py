"""Give-and-take Markov chains on [0, 1] with beta-distributed jump proportions.

The state moves left to ``x - x*L`` with probability ``p(x)`` and right to
``x + (1 - x)*R`` otherwise.  The package simulates such chains, evaluates
their stationary densities in closed form, solves the boundary-value problem
for semidegenerate kernels, and checks all of these against independent
oracles.
"""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    DomainError,
    ErgodicityError,
    GiveTakeError,
    NumericalError,
    UnsupportedError,
    VerificationError,
)
from .core import *  # noqa: E402,F401,F403
from .chain import *  # noqa: E402,F401,F403
from .analytic import *  # noqa: E402,F401,F403
from .verify import *  # noqa: E402,F401,F403
from .semidegenerate import *  # noqa: E402,F401,F403
from .apps import *  # noqa: E402,F401,F403
from .estimators import StationaryDensity  # noqa: E402
from .special import beta_fn, incomplete_beta, log_beta  # noqa: E402
