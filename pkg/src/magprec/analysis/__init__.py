"""Optimization, parameter scans and figure tables built on the closed-form physics."""
