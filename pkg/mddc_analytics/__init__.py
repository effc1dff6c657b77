"""Modified Detecting Deviating Cells (MDDC) signal detection for drug-AE contingency tables."""

__version__ = "0.1.0"
