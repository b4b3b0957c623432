"""Signature-free Byzantine-tolerant SWMR registers over a simulated shared
memory, with Byzantine-linearizability checking and an executable replay of
the optimality attack."""

from byzreg.engine import ENGINE

__version__ = "0.1.0"
__all__ = ["ENGINE", "__version__"]
