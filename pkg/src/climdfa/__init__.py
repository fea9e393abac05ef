"""Stochastic asset/liability projection for general-insurance markets
driven by scenario-conditioned climate and socio-economic inputs."""

__version__ = "0.1.0"
