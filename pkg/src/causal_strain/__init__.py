"""Causal structure of a two-dimensional spacetime whose future boundary carries a strain.

Modules: conefield (metrics and cones), nullflow (null curves), chronology
(past sets), cboundary (TIPs and the boundary atlas), jmap (maps between
boundaries), confmap (piecewise map into flat space), gridoracle (lattice
cross-check), scenario/acceptance/cli (orchestration).
"""

from .conefield import ConeField, InvalidInput, Point, by_name, minkowski, narrow, strain

__all__ = ["ConeField", "InvalidInput", "Point", "by_name", "minkowski", "narrow", "strain"]
__version__ = "0.1.0"
