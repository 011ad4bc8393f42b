"""Lattice vibrations, density of states and the Debye T^3 law on periodic graphs."""

from .lattice import (CrystalSpec, LatticeError, build_cubic, build_diamond,
                      load_crystal, parse_crystal, serialize,
                      validate_rotation_invariance)

__version__ = "0.1.0"

__all__ = ["CrystalSpec", "LatticeError", "build_cubic", "build_diamond",
           "load_crystal", "parse_crystal", "serialize",
           "validate_rotation_invariance"]
