"""Sums of iterates of finite Blaschke products on the unit circle."""
from .core import (BlaschkeProduct, BoundaryPoint, ExpansionConstants, derivative_modulus_boundary,
                   estimate_decay_rate, evaluate, evaluate_boundary, expansion_constants, iterate,
                   pseudohyperbolic, required_precision)

__version__ = "0.1.0"
