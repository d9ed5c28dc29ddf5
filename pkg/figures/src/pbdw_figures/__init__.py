from .render import KINDS, FigureSpec, SchemaError, read_table, render

__all__ = ["KINDS", "FigureSpec", "SchemaError", "read_table", "render"]
