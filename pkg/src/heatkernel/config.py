"""JSON run configurations: parsing, validation, and object construction.

The schema is a nested map of flat sections; every key is documented in the
README.  Configs are canonicalized (sorted keys, fixed separators) before
hashing so identical settings always produce identical provenance stamps.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .bounds import FAMILIES, BoundEnvelope
from .errors import ConfigError
from .explicit import QuadraticCoeffs
from .potentials import (
    PolynomialPotential,
    Potential,
    PowerPotential,
    ScaledPotential,
    SumPotential,
    TabulatedPotential,
)

ENGINES = ("explicit", "spectral", "ode")

DEFAULT_CONFIG = {
    "potential": {"kind": "polynomial", "coefficients": [0.0, 0.0, 1.0], "dimension": 1},
    "engine": "explicit",
    "grid": {"x": [-2.0, 2.0, 5], "y": [-2.0, 2.0, 5], "t": [0.05, 1.0, 4]},
    "envelopes": [
        {"family": "avg_upper", "beta": 0.99},
        {"family": "symmetrized_upper", "beta": 0.99},
        {"family": "quadratic_sharp"},
        {"family": "avg_lower_near", "kappa": 0.125},
        {"family": "avg_lower_far", "kappa": 0.125},
    ],
    "weights": {"rh_q": 1.5, "ap_p": 2.0, "window_center": 0.0, "window_side": 2.0, "depth": 12},
    "ode": {"coefficients": [0.0, 1.0, 1.0], "t0": 0.01, "t1": 2.0, "samples": 120},
    "chain": {"x": 0.0, "y": 1.0, "t": 1.0},
    "spectral": {"half_width": 8.0, "points": 2001},
    "tolerances": {"rel": 1e-4},
}


def load_config(path) -> dict:
    """Read a JSON config file; parse errors carry line/column diagnostics."""
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _need(cfg: dict, key: str, section: str = ""):
    if key not in cfg:
        where = f" in section {section!r}" if section else ""
        raise ConfigError(f"missing key {key!r}{where}")
    return cfg[key]


def potential_from_config(spec: dict, base_dir: Path | None = None) -> Potential:
    """Build a potential from its config section.

    Keys: kind (polynomial | power | constant | tabulated | scaled | sum),
    then coefficients/dimension, exponent, value, table, factor/base, parts.
    """
    kind = str(_need(spec, "kind", "potential")).lower()
    n = int(spec.get("dimension", 1))
    try:
        if kind == "polynomial":
            return PolynomialPotential(_need(spec, "coefficients", "potential"), n=n)
        if kind == "power":
            return PowerPotential(float(_need(spec, "exponent", "potential")), n=n)
        if kind == "constant":
            value = float(_need(spec, "value", "potential"))
            return PolynomialPotential([value], n=n)
        if kind == "tabulated":
            table = _need(spec, "table", "potential")
            path = Path(table)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return load_tabulated_csv(path)
        if kind == "scaled":
            return ScaledPotential(
                float(_need(spec, "factor", "potential")),
                potential_from_config(_need(spec, "base", "potential"), base_dir),
            )
        if kind == "sum":
            parts = [potential_from_config(p, base_dir) for p in _need(spec, "parts", "potential")]
            return SumPotential(*parts)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"potential section: {exc}") from exc
    raise ConfigError(f"unknown potential kind {kind!r}")


def load_tabulated_csv(path) -> TabulatedPotential:
    """Load a tabulated potential from CSV columns (coordinate, value)."""
    rows = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except (ValueError, IndexError):
                if line_no == 1:
                    continue  # header row
                raise ConfigError(f"{path}: line {line_no}: expected 'coordinate,value'")
    if len(rows) < 2:
        raise ConfigError(f"{path}: need at least 2 samples")
    xs, vals = zip(*rows)
    return TabulatedPotential(xs, vals)


def quadratic_from_potential(V: Potential) -> QuadraticCoeffs:
    """Extract (a0, a1, a2) when V is a 1D polynomial of degree exactly 2."""
    if not isinstance(V, PolynomialPotential) or V.n != 1:
        raise ConfigError("explicit/ode engines require a one-dimensional polynomial potential")
    coeffs = list(V.coeffs) + [0.0] * (3 - len(V.coeffs))
    if len(V.coeffs) > 3 or coeffs[2] <= 0.0:
        raise ConfigError(
            "explicit/ode engines require a quadratic potential with positive x^2 coefficient"
        )
    return QuadraticCoeffs(a0=coeffs[0], a1=coeffs[1], a2=coeffs[2])


def envelope_from_config(spec: dict, n: int = 1) -> BoundEnvelope:
    """Keys: family plus any of c0..c3, beta, kappa, epsilon, C, n."""
    family = str(_need(spec, "family", "envelopes"))
    if family not in FAMILIES:
        raise ConfigError(f"unknown envelope family {family!r}; known: {', '.join(FAMILIES)}")
    kwargs = {}
    for key in ("c0", "c1", "c2", "c3", "beta", "kappa", "epsilon", "C"):
        if key in spec:
            kwargs[key] = float(spec[key])
    try:
        return BoundEnvelope(family=family, n=int(spec.get("n", n)), **kwargs)
    except Exception as exc:
        raise ConfigError(f"envelope section: {exc}") from exc


def axis_from_config(spec, name: str) -> np.ndarray:
    """[lo, hi, count] -> linspace; a plain list of numbers passes through."""
    if not isinstance(spec, (list, tuple)) or not spec:
        raise ConfigError(f"grid axis {name!r} must be a list")
    if len(spec) == 3 and isinstance(spec[2], int) and spec[2] >= 1:
        lo, hi, count = float(spec[0]), float(spec[1]), int(spec[2])
        if count == 1:
            return np.array([lo])
        return np.linspace(lo, hi, count)
    return np.asarray([float(v) for v in spec])


def grid_from_config(cfg: dict):
    grid = _need(cfg, "grid")
    xs = axis_from_config(_need(grid, "x", "grid"), "x")
    ys = axis_from_config(_need(grid, "y", "grid"), "y")
    ts = axis_from_config(_need(grid, "t", "grid"), "t")
    if np.any(ts <= 0):
        raise ConfigError("grid times must be > 0")
    return xs, ys, ts
