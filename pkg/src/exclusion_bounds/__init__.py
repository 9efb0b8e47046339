"""Information-exclusion and entropic-uncertainty bounds for several
projective measurements on a finite-dimensional system with quantum memory."""

__version__ = "0.1.0"
