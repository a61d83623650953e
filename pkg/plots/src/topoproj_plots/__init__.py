"""Figure generation from serialized topoproj experiment reports."""

__version__ = "0.1.0"

from .figures import FIGURE_KINDS, FigureSpec, RenderResult, SchemaMismatch, isotonic, render
