"""Formal normal forms of perturbations of quasi-homogeneous plane vector fields."""

__version__ = "0.1.0"
