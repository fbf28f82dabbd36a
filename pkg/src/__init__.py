"""NematicLimit - low Mach number limit laboratory for compressible nematic flows."""

__version__ = "0.1.0"
