"""Linear information coupling models of single-hop and layered networks."""

__version__ = "1.0.0"
