"""Commuting Markov kernels, hypergroup certificates and the discrete wave
equation for birth-and-death chains."""
from ._kernels import BACKEND
from .errors import *  # noqa: F401,F403
from .kernel import *  # noqa: F401,F403
from .spectral import *  # noqa: F401,F403
from .commutator import *  # noqa: F401,F403
from .metropolis import *  # noqa: F401,F403
from .wave import *  # noqa: F401,F403
from .intertwine import *  # noqa: F401,F403
from .symmetry import *  # noqa: F401,F403

__version__ = "0.1.0"
