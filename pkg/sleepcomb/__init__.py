"""Online sleeping combinatorial optimization: solvers, hard instances and reductions."""

__version__ = "0.1.0"
