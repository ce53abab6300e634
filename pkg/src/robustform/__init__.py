"""robustform: formation control under parametric communication uncertainty.

Two halves, one toolkit:

* a certification pipeline that decides whether an uncertain weighted graph
  stays connected for every parameter value in a semialgebraic set, by way of
  Gram (square) matrix representations of polynomial matrices and a small
  dense semidefinite-programming solver;

* a multi-agent formation simulator whose controller combines consensus terms
  with reciprocal barrier functions for collision avoidance and sensing-range
  maintenance, plus runtime monitors for the invariants the theory promises.
"""

__version__ = "0.1.0"
