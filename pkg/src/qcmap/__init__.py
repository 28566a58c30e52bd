"""Classical-map modelling of quantum electron fluids.

Ideal-fermion pair distributions, HNC/MHNC integral equations, the Pauli
exclusion potential, the spin-resolved classical map with coupling-constant
integration, Bohm's quantum potential and a thermal-wavelength classifier.
"""

__version__ = "0.1.0"
