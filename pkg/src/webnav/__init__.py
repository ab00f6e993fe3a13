"""Goal-driven graph-navigation benchmarks and agents."""

__version__ = "0.1.0"
