"""Sticky-disc energies, grain orientations and Wulff shapes on the triangular lattice."""
