# Functional-data classification for Gaussian processes

__version__ = "1.0.0"
