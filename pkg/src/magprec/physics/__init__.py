"""Closed-form physics: noisy single-qubit channel, probe moments, precision and bounds."""
