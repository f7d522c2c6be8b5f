"""Catalog of explicit flows with known transversal Killing spinor data.

Homogeneous entries are Lie groups with a left-invariant frame.  Chart
entries describe products with a round two-sphere on a coordinate patch;
their spinors are given in closed form and checked by residuals.

Descriptors are JSON objects::

    {"name": str, "dim": int, "kind": "homogeneous" | "chart",
     "structure_constants": [[[...]]],            # homogeneous only, c[i][j][k]
     "sectors": [{"label": str, "multiplicity": int,
                  "generators": {"real": [...], "imag": [...]}}],
     "plane_waves": bool,
     "chart": {"family": str, "parameters": {...}, "samples": [[...]]},
     "parameters": {...},
     "expected": [{"alpha": float, "beta": float, "dim": int, "source": str}]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .clifford import CliffordRep, build_rep
from .flow_frame import Chart, FrameManifold, Sector, jacobi_defect, trivial_sector
from .spin_conn import SpinorField, TksParams, chart_field
from .tks import complete_frame

SPIN_CUTOFF = 2.0  # largest spin of the S^3 sectors searched by default


class DescriptorError(ValueError):
    """Malformed manifold descriptor; the message names the offending field or line."""


@dataclass(frozen=True)
class Fact:
    alpha: float
    beta: float
    dim: int
    source: str


@dataclass(frozen=True)
class ZooEntry:
    """A catalog manifold with its expected facts.

    ``spinors(p)`` returns closed-form TKS fields for chart entries (an
    empty list when none are known for ``p``); homogeneous entries are
    solved directly instead.
    """

    manifold: FrameManifold
    expected: tuple
    notes: str = ""
    spinors: Callable[[TksParams], list] | None = None


# --- homogeneous entries ------------------------------------------------------

def _cyclic(value: float) -> np.ndarray:
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = value
        c[j, i, k] = -value
    return c


def spin_matrices(j: float) -> list[np.ndarray]:
    """Hermitian angular-momentum matrices ``(J_x, J_y, J_z)`` for spin ``j``."""
    d = int(round(2 * j + 1))
    m = j - np.arange(d)
    raise_op = np.zeros((d, d), dtype=complex)
    for k in range(1, d):
        raise_op[k - 1, k] = math.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    lower = raise_op.conj().T
    return [(raise_op + lower) / 2, (raise_op - lower) / 2j, np.diag(m).astype(complex)]


def s3_sectors(cutoff: float = SPIN_CUTOFF) -> tuple:
    """Irreducible sectors of SU(2) for the frame with ``[e_i, e_j] = -2 e_k`` (cyclic)."""
    out = [trivial_sector(3)]
    for twice in range(1, int(round(2 * cutoff)) + 1):
        j = twice / 2
        gens = tuple(2.0j * m for m in spin_matrices(j))
        out.append(Sector(f"spin{j:g}", gens, twice + 1))
    return tuple(out)


def flat_r3(xi=(0.0, 0.0, 1.0)) -> ZooEntry:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (3,) or not np.linalg.norm(xi) > 0:
        raise ValueError("xi must be a nonzero 3-vector")
    xi = xi / np.linalg.norm(xi)
    mf = FrameManifold("flat_r3", 3, "homogeneous", np.zeros((3, 3, 3)), plane_waves=True,
                       parameters={"xi": xi.tolist()})
    facts = (
        Fact(0.0, 0.0, 2, "literature: parallel spinors of Euclidean space"),
        Fact(1.0, 0.0, 2, "literature: (alpha, 0) solutions for every real alpha"),
        Fact(-0.5, 0.0, 2, "literature: (alpha, 0) solutions for every real alpha"),
        Fact(0.0, 1.0, 0, "derived: a flat local product forces beta = 0"),
    )
    notes = "The flow direction only matters for the chart version (flat_chart); the frame is the same."
    return ZooEntry(mf, facts, notes)


def round_s3() -> ZooEntry:
    mf = FrameManifold("round_s3", 3, "homogeneous", _cyclic(-2.0), sectors=s3_sectors())
    facts = (
        Fact(0.0, 1.0, 2, "literature: Hopf fibration over the sphere of curvature 4"),
        Fact(0.0, -1.0, 2, "literature: Hopf fibration over the sphere of curvature 4"),
        Fact(-1.0, 0.0, 2, "literature: Killing spinors of S^3 in the extreme eigenbundles"),
        Fact(1.0, 0.0, 0, "literature: alpha cannot be flipped on S^3"),
    )
    notes = ("Lens spaces Z_k\\S^3 share this local frame and carry nonzero (0, ±1) solutions for the "
             "trivial spin structure; equivariance over Z_k is not modelled.")
    return ZooEntry(mf, facts, notes)


def berger_s3(t: float = 2.0) -> ZooEntry:
    from .deform import d_homothety

    if not t > 0:
        raise ValueError("berger_s3 needs t > 0")
    base = round_s3()
    deformed = d_homothety(base.manifold, t)
    mf = FrameManifold("berger_s3", 3, "homogeneous", deformed.structure_constants, sectors=deformed.sectors,
                       parameters={"t": t})
    facts = tuple(Fact(f.alpha / t, f.beta / math.sqrt(t), f.dim, "derived: transported from round_s3")
                  for f in base.expected)
    return ZooEntry(mf, facts, "D-homothetic deformation of round_s3.")


def heisenberg(b: float = 1.0) -> ZooEntry:
    if not (math.isfinite(b) and b != 0):
        raise ValueError("heisenberg needs a finite nonzero b")
    c = np.zeros((3, 3, 3))
    c[1, 2, 0] = -2.0 * b
    c[2, 1, 0] = 2.0 * b
    mf = FrameManifold("heisenberg", 3, "homogeneous", c, parameters={"b": b})
    facts = (
        Fact(0.0, 0.0, 2, "literature: transversally parallel spinors"),
        Fact(1.0, 0.0, 0, "literature: no real (alpha, beta) != (0, 0)"),
        Fact(0.0, 1.0, 0, "literature: no real (alpha, beta) != (0, 0)"),
    )
    notes = "Only left-invariant spinors are searched; they descend to every compact quotient."
    return ZooEntry(mf, facts, notes)


# --- chart entries -----------------------------------------------------------

def _sphere_samples(count: int, period: float | None, seed: int = 7) -> np.ndarray:
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.0, period if period else 4.0, count)
    theta = rng.uniform(0.3, math.pi - 0.3, count)
    phi = rng.uniform(0.0, 2 * math.pi, count)
    return np.column_stack([s, theta, phi])


def _product_chart(family: str, radius: float, samples, params: dict) -> Chart:
    r = float(radius)

    def frame(x):
        return np.array([[1.0, 0.0, 0.0], [0.0, 1.0 / r, 0.0], [0.0, 0.0, 1.0 / (r * math.sin(x[1]))]])

    def brackets(x):
        c = np.zeros((3, 3, 3))
        cot = math.cos(x[1]) / math.sin(x[1])
        c[1, 2, 2] = -cot / r
        c[2, 1, 2] = cot / r
        return c

    return Chart(family, frame, np.asarray(samples, dtype=float), brackets, params)


def sphere_product_spinors(rep: CliffordRep, mf: FrameManifold, radius: float) -> Callable[[TksParams], list]:
    """Closed-form ``(0, ±1/(2 radius))`` fields on a product of a line or circle with S^2."""
    g = rep.generators
    rot_xi = g[0]
    tilt = g[0] @ g[1]
    basis = np.eye(rep.spinor_dim, dtype=complex)

    def build(p: TksParams) -> list:
        if p.alpha != 0 or p.beta == 0:
            return []
        sign = 1 if np.real(p.beta) > 0 else -1
        if abs(p.beta - sign / (2 * radius)) > 1e-12:
            return []
        out = []
        for psi0 in basis:
            def fn(x, psi0=psi0):
                return expm(0.5 * sign * x[1] * tilt) @ expm(-0.5 * x[2] * rot_xi) @ psi0
            out.append(chart_field(rep, mf, fn))
        return out

    return build


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0 or not math.isfinite(value):
        raise ValueError(f"{name} must be positive, got {value!r}")
    return value


def s1_x_s2(L: float = 2 * math.pi, delta: int = 0, radius: float = 1.0, samples: int = 8) -> ZooEntry:
    L, radius = _positive("L", L), _positive("radius", radius)
    if delta not in (0, 1):
        raise ValueError("delta must be 0 or 1")
    params = {"L": L, "delta": int(delta), "radius": radius}
    pts = _sphere_samples(samples, L)
    mf = FrameManifold("s1_x_s2", 3, "chart", chart=_product_chart("s1_x_s2", radius, pts, params), parameters=params)
    if delta == 0:
        beta = 1 / (2 * radius)
        facts = (Fact(0.0, beta, 2, "literature: product with a round sphere, trivial circle structure"),
                 Fact(0.0, -beta, 2, "literature: product with a round sphere, trivial circle structure"))
        spinors = sphere_product_spinors(build_rep(3), mf, radius)
    else:
        facts, spinors = (), None
    notes = ("The closed-form fields do not depend on the circle coordinate, so they need the trivial "
             "spin structure on the circle; the chart avoids the poles of S^2.")
    return ZooEntry(mf, facts, notes, spinors)


def r_x_s2(radius: float = 1.0, samples: int = 8) -> ZooEntry:
    radius = _positive("radius", radius)
    params = {"radius": radius}
    pts = _sphere_samples(samples, None)
    mf = FrameManifold("r_x_s2", 3, "chart", chart=_product_chart("r_x_s2", radius, pts, params), parameters=params)
    beta = 1 / (2 * radius)
    facts = (Fact(0.0, beta, 2, "literature: product with a round sphere"),
             Fact(0.0, -beta, 2, "literature: product with a round sphere"))
    return ZooEntry(mf, facts, "Chart avoids the poles of S^2.", sphere_product_spinors(build_rep(3), mf, radius))


def flat_chart(xi_bar=(0.0, 0.0, 1.0), samples: int = 8, seed: int = 11) -> FrameManifold:
    """Euclidean R^3 in Cartesian coordinates with the constant frame adapted to ``xi_bar``."""
    frame_rows = complete_frame(xi_bar)
    pts = np.random.default_rng(seed).uniform(-2.0, 2.0, (samples, 3))
    params = {"xi": frame_rows[0].tolist()}
    chart = Chart("flat", lambda x: frame_rows, pts, lambda x: np.zeros((3, 3, 3)), params)
    return FrameManifold("flat_chart", 3, "chart", chart=chart, parameters=params)


# --- registry ----------------------------------------------------------------

_BUILDERS = {
    "flat_r3": (flat_r3, {"xi": "unit 3-vector, default (0, 0, 1)"}),
    "round_s3": (round_s3, {}),
    "berger_s3": (berger_s3, {"t": "deformation parameter, t > 0 (default 2)"}),
    "heisenberg": (heisenberg, {"b": "nonzero real, [e1, e2] = -2 b xi (default 1)"}),
    "s1_x_s2": (s1_x_s2, {"L": "circle length > 0 (default 2 pi)", "delta": "circle spin structure, 0 or 1",
                          "radius": "sphere radius > 0 (default 1)", "samples": "number of chart samples"}),
    "r_x_s2": (r_x_s2, {"radius": "sphere radius > 0 (default 1)", "samples": "number of chart samples"}),
}

# chart families reconstructible from descriptor parameters
CHART_FAMILIES = {
    "s1_x_s2": lambda params, samples: _product_chart("s1_x_s2", params["radius"], samples, params),
    "r_x_s2": lambda params, samples: _product_chart("r_x_s2", params["radius"], samples, params),
    "flat": lambda params, samples: Chart("flat", (lambda x, f=complete_frame(params["xi"]): f), samples,
                                          lambda x: np.zeros((3, 3, 3)), params),
}


def list_catalog() -> dict:
    """Entry names mapped to their parameter descriptions."""
    return {name: dict(schema) for name, (_, schema) in _BUILDERS.items()}


def build(name: str, **params) -> ZooEntry:
    if name not in _BUILDERS:
        raise KeyError(f"unknown manifold {name!r}; known: {', '.join(_BUILDERS)}")
    fn, schema = _BUILDERS[name]
    unknown = set(params) - set(schema)
    if unknown:
        raise ValueError(f"{name} does not take parameter(s) {', '.join(sorted(unknown))}")
    return fn(**params)


# --- descriptors -------------------------------------------------------------

def _complex_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"real": a.real.tolist(), "imag": a.imag.tolist()}


def to_descriptor(entry: ZooEntry | FrameManifold) -> dict:
    """JSON-ready descriptor; floats are kept at full precision so loading is exact."""
    mf = entry.manifold if isinstance(entry, ZooEntry) else entry
    out = {"name": mf.name, "dim": mf.ambient_dim, "kind": mf.kind, "parameters": mf.parameters}
    if mf.kind == "homogeneous":
        out["structure_constants"] = mf.structure_constants.tolist()
        out["sectors"] = [{"label": s.label, "multiplicity": s.multiplicity,
                           "generators": _complex_json(np.asarray(s.generators))} for s in mf.sectors]
        out["plane_waves"] = mf.plane_waves
    else:
        if mf.chart.family not in CHART_FAMILIES:
            raise ValueError(f"chart family {mf.chart.family!r} cannot be serialized")
        out["chart"] = {"family": mf.chart.family, "parameters": mf.chart.parameters,
                        "samples": np.asarray(mf.chart.samples).tolist()}
    if isinstance(entry, ZooEntry):
        out["expected"] = [{"alpha": f.alpha, "beta": f.beta, "dim": f.dim, "source": f.source}
                           for f in entry.expected]
    return out


def dump_descriptor(entry: ZooEntry | FrameManifold) -> str:
    return json.dumps(to_descriptor(entry), indent=2)


def _field(obj: dict, key: str, path: str, kind, required: bool = True):
    if key not in obj:
        if required:
            raise DescriptorError(f"{path}{key}: missing required field")
        return None
    value = obj[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise DescriptorError(f"{path}{key}: expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _array(value, path: str, shape=None, dtype=float) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise DescriptorError(f"{path}: not a numeric array ({exc})") from None
    if shape is not None and arr.shape != shape:
        raise DescriptorError(f"{path}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DescriptorError(f"{path}: non-finite entries")
    return arr


def from_descriptor(data: dict) -> ZooEntry:
    """Rebuild an entry from a parsed descriptor, naming the first bad field on error."""
    if not isinstance(data, dict):
        raise DescriptorError("descriptor must be a JSON object")
    name = _field(data, "name", "", str)
    dim = _field(data, "dim", "", int)
    if not 2 <= dim <= 7:
        raise DescriptorError(f"dim: must be between 2 and 7, got {dim}")
    kind = _field(data, "kind", "", str)
    params = _field(data, "parameters", "", dict, required=False) or {}
    try:
        if kind == "homogeneous":
            c = _array(_field(data, "structure_constants", "", list), "structure_constants", (dim, dim, dim))
            if jacobi_defect(c) > 1e-12:
                raise DescriptorError("structure_constants: Jacobi identity fails")
            sectors = []
            for i, sec in enumerate(_field(data, "sectors", "", list, required=False) or []):
                path = f"sectors[{i}]."
                if not isinstance(sec, dict):
                    raise DescriptorError(f"sectors[{i}]: expected object")
                gens = _field(sec, "generators", path, dict)
                re = _array(_field(gens, "real", path + "generators.", list), path + "generators.real")
                im = _array(_field(gens, "imag", path + "generators.", list), path + "generators.imag", re.shape)
                if re.ndim != 3 or re.shape[0] != dim or re.shape[1] != re.shape[2]:
                    raise DescriptorError(f"{path}generators: expected shape ({dim}, k, k), got {re.shape}")
                sectors.append(Sector(_field(sec, "label", path, str), tuple(re + 1j * im),
                                      _field(sec, "multiplicity", path, int)))
            plane = _field(data, "plane_waves", "", bool, required=False) or False
            mf = FrameManifold(name, dim, kind, c, sectors=tuple(sectors), plane_waves=plane, parameters=params)
        elif kind == "chart":
            ch = _field(data, "chart", "", dict)
            family = _field(ch, "family", "chart.", str)
            if family not in CHART_FAMILIES:
                raise DescriptorError(f"chart.family: unknown family {family!r}; known: {', '.join(CHART_FAMILIES)}")
            if dim != 3:
                raise DescriptorError(f"dim: chart family {family!r} is three-dimensional, got {dim}")
            cparams = _field(ch, "parameters", "chart.", dict)
            samples = _array(_field(ch, "samples", "chart.", list), "chart.samples")
            if samples.ndim != 2 or samples.shape[1] != dim:
                raise DescriptorError(f"chart.samples: expected shape (k, {dim}), got {samples.shape}")
            try:
                chart = CHART_FAMILIES[family](cparams, samples)
            except KeyError as exc:
                raise DescriptorError(f"chart.parameters: missing {exc.args[0]!r}") from None
            mf = FrameManifold(name, dim, kind, chart=chart, parameters=params)
        else:
            raise DescriptorError(f"kind: expected 'homogeneous' or 'chart', got {kind!r}")
    except DescriptorError:
        raise
    except ValueError as exc:
        raise DescriptorError(str(exc)) from None
    facts = []
    for i, f in enumerate(_field(data, "expected", "", list, required=False) or []):
        path = f"expected[{i}]."
        if not isinstance(f, dict):
            raise DescriptorError(f"expected[{i}]: expected object")
        facts.append(Fact(_field(f, "alpha", path, float), _field(f, "beta", path, float),
                          _field(f, "dim", path, int), _field(f, "source", path, str, required=False) or ""))
    spinors = None
    if kind == "chart" and family in ("s1_x_s2", "r_x_s2"):
        if family == "r_x_s2" or mf.chart.parameters.get("delta", 0) == 0:
            spinors = sphere_product_spinors(build_rep(dim), mf, float(mf.chart.parameters["radius"]))
    return ZooEntry(mf, tuple(facts), "", spinors)


def load_descriptor(text: str) -> ZooEntry:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_descriptor(data)
