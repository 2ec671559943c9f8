"""Fast digital shearlet transform on the oversampled pseudo-polar grid."""

__version__ = "0.1.0"
