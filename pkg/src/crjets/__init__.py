"""crjets: exact jet calculus for hypersurface germs in C^2.

Subpackages: series arithmetic, hypersurface normal-form invariants, the
Segre-jet reconstruction engine, singular-ODE formal solutions, and the
text DSL with its command-line front end.
"""

from .rational import ComplexRational
from .series import TruncatedSeries, to_float

__all__ = ["ComplexRational", "TruncatedSeries", "to_float"]

__version__ = "0.1.0"
