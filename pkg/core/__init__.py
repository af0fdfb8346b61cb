"""
Magnus Walks Package
====================

Random walks on F_r/[N,N] through the Magnus embedding: words, marked groups,
Fox calculus and flows, exact and Monte Carlo return probabilities, exclusive
pairs and the resulting return-probability profiles.
"""

__version__ = "1.0.0"
__author__ = "Magnus Walks"

from .groups import MarkedGroup, parse_group_spec
from .fox import flow_of_word, magnus_embed, words_equal_mod_NN
from .measures import convolve_power, make_lazy_srw, return_probability_exact
from .walks import mc_return_probability
from .words import ReducedWord, parse_word

__all__ = [
    'MarkedGroup',
    'ReducedWord',
    'convolve_power',
    'flow_of_word',
    'magnus_embed',
    'make_lazy_srw',
    'mc_return_probability',
    'parse_group_spec',
    'parse_word',
    'return_probability_exact',
    'words_equal_mod_NN',
]
