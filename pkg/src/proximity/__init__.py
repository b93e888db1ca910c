"""Distance-decay analysis of social ties and the spatial spread of baby names."""

__version__ = "0.1.0"
