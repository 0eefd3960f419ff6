"""Subgroup membership for free, automatic and relatively hyperbolic groups.

Modules, from the bottom up: ``words`` (free group words, presentations),
``stallings`` (folding), ``automata`` (finite and two-tape automata),
``autostruct`` (automatic structures), ``lattice`` (subgroups of Z^n and
peripheral data), ``completion`` (relator gluing), ``lstallings`` (graphs
relative to a language of representatives), ``relhyp`` (the membership
orchestrator), ``oracles`` (independent checks) and ``cli``.
"""

__version__ = "0.1.0"
