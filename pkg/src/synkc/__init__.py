"""synkc: a compiler toolchain for a kernel synchronous language."""

__version__ = "0.1.0"
