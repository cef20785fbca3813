"""
qev/qev/__init__.py

Quantum elliptical vortex states: construction, Wigner functions, quadrature
uncertainties, mode entropies and the sweeps built on top of them.
"""

__version__: str = '1.0.0'
