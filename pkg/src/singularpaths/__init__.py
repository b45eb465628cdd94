"""Singular Hölder paths, improper Young/rough integration, SLE traces and
renormalised Wong-Zakai approximations for rough volatility."""

__version__ = "0.1.0"
