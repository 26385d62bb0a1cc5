"""Multidimensional latent-class Rasch model toolkit.

Discrete-MML estimation by EM with multi-start, BIC model selection,
posterior class assignment, latent-trait correlation, a normal-MML
unidimensional baseline, and two dimensionality tests (discrete-MML
likelihood ratio and Martin-Lof).
"""

from ._lcrasch import *  # noqa: F401,F403
from ._lcrasch import __version__  # noqa: F401
