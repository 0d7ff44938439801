"""Finite-stage construction and verification of a minimal subshift of the
cone-valued full shift over Z or Z^2 with mean dimension d/2 that does not
embed into the cubical shift ([0,1]^d)^G."""

__version__ = "0.1.0"
