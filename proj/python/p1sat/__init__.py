from ._core import SolverError, check, flatten, oracle, render, verify

__all__ = ["SolverError", "check", "flatten", "oracle", "render", "verify"]
