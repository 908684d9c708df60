"""Bisimilarity for register automata and fresh-register automata."""

from .automata import Automaton, Configuration, Transition, validate
from .errors import CapacityError, CertificateError, RegBisimError, UsageError
from .fileformat import parse, parse_config, serialize
from .games import GameVerdict

__all__ = ["Automaton", "Configuration", "Transition", "validate", "parse", "parse_config", "serialize",
           "GameVerdict", "RegBisimError", "UsageError", "CapacityError", "CertificateError"]
