"""Numerical certification of independence for matrix C*-subalgebras and Hilbert C*-modules."""

__version__ = "0.1.0"
