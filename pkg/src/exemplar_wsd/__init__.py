"""Exemplar WSD - supervised word sense disambiguation by nearest-neighbour exemplars."""

__version__ = "0.1.0"
