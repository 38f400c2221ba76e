"""cvent: Gaussian model of quadrature entanglement from two squeezed beams."""

__version__ = "0.1.0"
