"""Classical and quantum dynamics of three resonantly coupled oscillator modes.

Submodules
----------
model       parameters, amplitudes, invariants and the reduced phase space
special     elliptic, Weierstrass and Whittaker functions
numerics    ODE integration, quadrature, polynomial roots, tridiagonal spectra
classical   exact and numerical classical motion
quantum     block decomposition, spectra and evolution
coherent    symbol calculus, reduced coherent states and their measure
verify      the self-check suites behind ``threewave verify``
"""
from .errors import *  # noqa: F401,F403
from .model import *  # noqa: F401,F403
from .classical import *  # noqa: F401,F403
from .quantum import *  # noqa: F401,F403
from .coherent import *  # noqa: F401,F403
from .kernels import BACKEND

from . import errors, model, special, numerics, kernels, classical, quantum, symbols, coherent  # noqa: F401

__version__ = "0.1.0"
