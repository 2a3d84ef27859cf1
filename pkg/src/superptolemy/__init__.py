"""Super-Ptolemy assignments, OSp(2|1) cocycles and 1-loop invariants."""

__version__ = "0.1.0"
