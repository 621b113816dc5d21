"""
Exception types shared across the toolkit.
The CLI maps every HurwitzError to a non-zero exit code.
"""


class HurwitzError(Exception):
    """Base class for toolkit failures"""


class ConfigError(HurwitzError, ValueError):
    """Invalid configuration value (flag or environment)"""


class LatticeFormatError(HurwitzError, ValueError):
    """Malformed lattice document or rational string"""


class DegenerateLatticeError(HurwitzError, ValueError):
    """Basis vectors are not linearly independent"""


class CapacityError(HurwitzError, RuntimeError):
    """Enumeration produced more vectors than the configured cap"""

    def __init__(self, count: int, capacity: int):
        super().__init__(f"enumeration exceeded capacity: {count} vectors > cap {capacity}")
        self.count = count
        self.capacity = capacity


class NotUnimodularError(HurwitzError, ValueError):
    """Operation requires a determinant-one lattice"""


class SupportConditionError(HurwitzError, ValueError):
    """Height alpha is too large for the test function's support"""


class UnsupportedTestFunctionError(HurwitzError, ValueError):
    """No slice integral is available for this test function kind"""


class InvarianceError(HurwitzError, ValueError):
    """Convex body failed the unit-invariance spot check"""
