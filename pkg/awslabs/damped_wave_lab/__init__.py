"""
Damped Wave Lab
Numerical laboratory for u_tt - Δu + b(t)u_t = N(u) under radial symmetry
"""

__version__ = "0.1.0"
