"""Verification toolkit for weighted Einstein structures: curvature of
coordinate metrics with density, Ricci-type classification, a catalog of
explicit solution families, the warped-product ODE system, and an exact
Groebner-basis pipeline."""

__version__ = "0.1.0"
