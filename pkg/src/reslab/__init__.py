"""reslab: numerical laboratory for Selberg zeta functions, twisted
L-functions and resonances of Schottky surfaces."""

__version__ = "0.1.0"
