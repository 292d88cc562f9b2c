"""Experiment presets, one folder per study."""
