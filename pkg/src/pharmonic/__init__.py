"""Homogeneous p-harmonic maps from admissible polynomial maps.

Modules:

* ``polyalg``: exact sparse polynomials over the rationals
* ``hurwitz``: normed bilinear maps ``[r, s, t]`` and their composition rules
* ``construct``: admissible polynomial maps ``h`` and their exact checks
* ``pmap``: exponents and the maps ``u = |x|^(gamma-k) h``
* ``numeric``: finite-difference oracle
* ``regularity``: regularity curves and observations
* ``cli``: command line entry point
"""

__version__ = "0.1.0"


def load_schema(name: str) -> dict:
    """One of the shipped JSON schemas, e.g. ``load_schema("pmap")``."""
    import json
    from importlib.resources import files

    return json.loads(files(__name__).joinpath("schemas", f"{name}.schema.json").read_text("utf-8"))
