"""Constructive convergence of separable nets, with exact Riemann integration
over tagged partitions as the worked instance."""

from .exact import CReal, Rational, arith, compare_within, creal_from_rational, to_rational
from .nets import (
    NATURALS,
    CofinalSequence,
    DirectedSet,
    Net,
    SeparabilityWitness,
    net_limit,
    verify_net_limit,
)
from .riemann import REGISTRY, TaggedPartition, integrate, riemann_sum
from .topology import Ball, RegularPair, classify, decide_convergent, shrink_to_regular

__version__ = "0.1.0"
