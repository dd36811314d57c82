"""Numerical diagnostics for decohered cluster states.

Submodules
----------
pauli      stabilizer/Pauli algebra over GF(2), cluster-state constructors
dense      brute-force density-matrix oracle (small qubit counts)
statmech   1D Ising transfer matrices, closed forms, plaquette-model tools
fidelity   exact fidelity correlators (1D, general noise, 2D reduction)
negativity trace-norm negativity: exact enumeration and Monte Carlo
mpdo       matrix-product density operator checks (moments, symmetry algebra)
cli        command-line interface
"""

__version__ = "0.1.0"
