from __future__ import annotations

import logging

from rich.console import Console
from rich.logging import RichHandler

_HANDLER_NAME = "adaptdim-stderr"


def configure_logging(*, debug: bool = False) -> None:
    """Route package logs to stderr; stdout is reserved for artifacts."""
    root = logging.getLogger("adaptdim")
    root.setLevel(logging.DEBUG if debug else logging.WARNING)
    for h in list(root.handlers):
        if h.get_name() == _HANDLER_NAME:
            root.removeHandler(h)
    handler = RichHandler(
        console=Console(stderr=True),
        show_time=False,
        show_path=debug,
        markup=False,
        rich_tracebacks=debug,
    )
    handler.set_name(_HANDLER_NAME)
    root.addHandler(handler)
    root.propagate = False
