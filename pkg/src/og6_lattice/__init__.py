"""og6-lattice: integral lattices, discriminant forms and the classification of
wall-free finite-order isometries of 3U + 2[-2]."""

__version__ = "0.1.0"
