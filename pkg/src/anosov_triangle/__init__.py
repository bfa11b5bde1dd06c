"""Anosov representations of hyperbolic triangle groups into SL(3, R).

Modules, roughly bottom-up: ``projlin`` (projective geometry), ``cartan``
(Cartan matrices and representations), ``group`` (words), ``hyperbolic``
(the Fuchsian structure and codes), ``classify`` (component and Anosov
verdicts), ``boxes`` (nested-box certificate), ``limitcurve`` (boundary
maps) and ``cli``.
"""

__version__ = "0.1.0"
