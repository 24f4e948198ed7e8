"""canonstyle: frontalize-and-stylize portrait pipeline at desk scale."""

__version__ = "0.1.0"
