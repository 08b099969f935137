"""PLTL preference reasoning for a multi-agent smart car park."""

from .formula import (
    Always,
    And,
    Atom,
    Eventually,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    ParseError,
    atoms,
    nnf,
    parse,
    render,
)
from .oracle import oracle_decide
from .tableau import DepthExceeded, TableauResult, Verdict, decide, is_valid, render_tree

__version__ = "0.1.0"
