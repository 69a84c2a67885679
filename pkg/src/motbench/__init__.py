"""Graph-guided modular code generation pipeline and benchmark harness."""

__version__ = "0.1.0"
