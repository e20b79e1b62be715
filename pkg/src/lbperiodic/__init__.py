"""Periodic minimizers of the constrained Landau-Brazovskii energy."""

from .model import *  # noqa: F401,F403
from .profile import *  # noqa: F401,F403
from .energy import *  # noqa: F401,F403
from .optimize import *  # noqa: F401,F403
from .landscape import *  # noqa: F401,F403
from .diagnostics import *  # noqa: F401,F403
from .persist import write_landscape_csv, read_landscape_csv, RunConfig, ConfigError  # noqa: F401
from .cli import cli_main  # noqa: F401

__version__ = "0.1.0"
