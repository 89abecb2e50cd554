"""Action-minimizing periodic and fixed-end solutions of the Newtonian n-body problem."""
__version__ = "0.1.0"
