"""Orbit files: JSON with explicit keys, floats written by ``repr`` (bit-exact)."""
import json

import numpy as np

from . import __version__
from .core import MassSystem
from .errors import SchemaError
from .paths import FourierLoop, NodePath

SCHEMA = "orbitforge/orbit"
VERSION = 1


def orbit_to_dict(path, symmetry=None, provenance=None):
    ms = path.ms
    d = {
        "schema": SCHEMA,
        "version": VERSION,
        "masses": list(ms.masses),
        "dim": ms.dim,
        "symmetry": symmetry,
        "provenance": {"tool_version": __version__, **(provenance or {})},
    }
    if isinstance(path, FourierLoop):
        d.update(representation="fourier", period=path.period, modes=path.modes,
                 coefficients=path.coeffs.tolist())
    elif isinstance(path, NodePath):
        d.update(representation="nodes", t0=path.t0, duration=path.duration,
                 nodes=path.all_nodes.tolist())
    else:
        raise TypeError(f"cannot serialize {type(path).__name__}")
    return d


def dumps(path, symmetry=None, provenance=None):
    return json.dumps(orbit_to_dict(path, symmetry, provenance), sort_keys=True, indent=1) + "\n"


def write_orbit(filename, path, symmetry=None, provenance=None):
    with open(filename, "w") as fh:
        fh.write(dumps(path, symmetry, provenance))


def orbit_from_dict(d):
    """Rebuild (path, metadata) from a parsed orbit document."""
    if d.get("schema") != SCHEMA:
        raise SchemaError(f"not an orbit file (schema={d.get('schema')!r})")
    if d.get("version") != VERSION:
        raise SchemaError(f"unsupported orbit file version {d.get('version')!r}")
    try:
        ms = MassSystem(tuple(d["masses"]), int(d["dim"]))
        rep = d["representation"]
        if rep == "fourier":
            path = FourierLoop(ms, d["period"], np.array(d["coefficients"], dtype=float))
            if path.modes != d["modes"]:
                raise SchemaError("modes does not match coefficient payload")
        elif rep == "nodes":
            X = np.array(d["nodes"], dtype=float)
            path = NodePath(ms, X[0], X[-1], X[1:-1], d["duration"], d.get("t0", 0.0))
        else:
            raise SchemaError(f"unknown representation {rep!r}")
    except KeyError as exc:
        raise SchemaError(f"missing field {exc.args[0]!r}") from None
    meta = {k: d.get(k) for k in ("symmetry", "provenance")}
    return path, meta


def read_orbit(filename):
    with open(filename) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{filename}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return orbit_from_dict(d)
