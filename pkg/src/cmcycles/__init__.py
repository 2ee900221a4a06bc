"""Temporary minimal package init during bootstrap."""

from .quadarith import BinaryQF, ClassGroup, Discriminant, FractionalIdealRep

__version__ = "0.1.0"
