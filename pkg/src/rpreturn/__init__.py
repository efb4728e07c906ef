"""Right-point Riemann sum returns vs. the discrete-time return.

Modules: ``signals`` (random reward signals), ``quadrature`` (the two return
sums and the mid-point reference), ``servo_env`` (simulated DC-motor reacher),
``reinforce`` (online REINFORCE with traces) and ``harness`` (experiments and
CLI). Hot loops live in a compiled extension with a numpy fallback; see
``rpreturn._backend``.
"""

from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
