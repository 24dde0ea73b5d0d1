"""Symmetric periodic orbits of Reeb flows on three-dimensional energy levels.

Index engines (Conley-Zehnder and Robbin-Salamon, each by two independent
methods), model Hamiltonian systems with anti-symplectic symmetries, flow and
frame construction, symmetric orbit shooting, linking predicates and disk-like
surfaces of section.
"""

__version__ = "0.1.0"
