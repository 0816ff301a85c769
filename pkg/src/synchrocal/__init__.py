"""PMU-based calibration and screening of line and generator parameters."""

__version__ = "0.1.0"
