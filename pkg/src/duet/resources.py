"""Location of template files shipped with the package or overridden by env."""
from __future__ import annotations

import os
from pathlib import Path

ENV_TEMPLATES_DIR = "DUET_TEMPLATES_DIR"

_PACKAGED = Path(__file__).parent / "templates"


def templates_root(explicit=None) -> Path:
    """Resolve the templates directory: explicit arg, env var, packaged default."""
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get(ENV_TEMPLATES_DIR)
    if env:
        return Path(env)
    return _PACKAGED
