"""Exact computations in logarithmic tautological rings of moduli of curves.

Modules:

* :mod:`~logchow.exactalg` -- rational polynomials and exact linear algebra
* :mod:`~logchow.conestack` -- cone stacks, stars, generic structures, stellar subdivisions
* :mod:`~logchow.stablegraphs` -- stable graphs and the tropical moduli stacks
* :mod:`~logchow.piecewise` -- piecewise polynomials, subdivisions and Brion pushforward
* :mod:`~logchow.stratalgebra` -- the strata algebra of decorated strata classes
* :mod:`~logchow.logstrata` -- decorated log strata classes and their product
* :mod:`~logchow.genus0` -- Keel ring and log Chow ranks in genus zero
* :mod:`~logchow.cli` -- command-line front end
"""

from .errors import LogChowError
from .exactalg import Poly
from .stablegraphs import StableGraph, enumerate_graphs, moduli_cone_stack, graph_star
from .piecewise import PPClass, StrictPP, Subdivision
from .stratalgebra import StrataElem
from .logstrata import LogElem

__version__ = "0.1.0"

__all__ = ["LogChowError", "Poly", "StableGraph", "enumerate_graphs", "moduli_cone_stack", "graph_star",
           "PPClass", "StrictPP", "Subdivision", "StrataElem", "LogElem", "__version__"]
