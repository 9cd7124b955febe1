"""Exact checks for stochastic mathematical systems, calibration and reasoning patterns."""
