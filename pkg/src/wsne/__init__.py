"""Tournament-based win-lose games and exact well-supported equilibrium tools."""

__version__ = "0.1.0"
