"""Experiment harness: sweeps, results CSV, figures, and property verification."""
