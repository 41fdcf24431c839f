"""Numerical toolkit for one-sided fractional Sobolev spaces on an interval.

Submodules:

* ``core`` — grids, sampled functions, shared numerics
* ``oracle`` — closed-form test functions with exact transforms
* ``operators`` — fractional derivative and integral schemes
* ``spaces`` — norms, seminorms, traces, regularity tests
* ``verify`` — executable checks for the constructive theorems
* ``cli`` — command-line front end
"""

__version__ = "0.1.0"
