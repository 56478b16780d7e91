"""BOPS metric toolkit: operation counting, peak/efficiency formulas and the DC-Roofline model."""

__version__ = "0.1.0"
