"""python package simulating repeated quantum interactions and their thermal Langevin limits."""

__version__ = "1.0.0"
