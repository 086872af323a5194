"""Completing sparse partial Latin squares with local trades."""
