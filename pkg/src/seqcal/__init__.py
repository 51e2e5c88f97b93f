"""seqcal: a workbench for process terms with revised sequential composition."""

from .errors import *  # noqa: F401,F403
from .syntax import (  # noqa: F401
    TAU, Action, Alt, Expr, GnfSpec, Name, Nesting, ONE, One, Par, Prefix, Program,
    RecSpec, Seq, Star, ZERO, Zero, act, check_guarded, parse_action, parse_process,
    parse_spec, pretty, recv, send, validate_gnf,
)
from .semantics import Flavor, Interpreter, normalize, step, terminates  # noqa: F401

__version__ = "0.1.0"
