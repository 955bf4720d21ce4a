"""Four-well dipolar Bose-Hubbard rotation sensor: exact dynamics and analytic oracles."""

__version__ = "0.1.0"
