"""Test suite for magprec."""
