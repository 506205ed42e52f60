"""figrender: paper-style figures from exactreg CSV outputs."""

__version__ = "0.1.0"

from .render import (  # noqa: F401
    FigureSpec,
    SchemaError,
    load_grid,
    load_meta,
    load_thresholds,
    render,
    render_directory,
)
