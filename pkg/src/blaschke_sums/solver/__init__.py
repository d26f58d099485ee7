"""Constructive solvers: nested-arc searches, lower-bound certificates and the Paley-type solver."""
