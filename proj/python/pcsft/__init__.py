"""Classical random-field laboratory.

Thin Python layer over the C++ core: sample random fields on C^n, map their
covariances to density operators, build maximally correlated superpositions,
and run threshold-detector races.
"""

from ._pcsft import *  # noqa: F401,F403
from ._pcsft import __version__  # noqa: F401
