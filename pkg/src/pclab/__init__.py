"""Peisert-type Cayley graphs over finite fields: construction, clique search and verification."""

__version__ = "0.1.0"
