"""Pfaffian correlation functions for beta = 1 ensembles with odd N."""
__version__ = "0.1.0"
