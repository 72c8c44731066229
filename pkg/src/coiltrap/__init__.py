"""Design and verification toolkit for microcoil ion-trap arrays."""
__version__ = "0.1.0"
