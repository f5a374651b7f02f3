"""Average lattice-point counts of random ideal lattices in cyclotomic fields."""

from .cyclo_field import CyclotomicField, create_field
from .errors import IlzError

__version__ = "0.1.0"

__all__ = ["CyclotomicField", "IlzError", "create_field", "__version__"]
