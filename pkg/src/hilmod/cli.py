"""Command-line harness.

Every command reads JSON (bundled corpus names or paths), writes a JSON report
(or a CSV grid for ``taylor-spectrum``) and exits with 0 on success, 1 when a
checked property fails and 2 on bad input, ball violations or refused
(gap-flagged) comparisons.  Reports are deterministic for a fixed
configuration and seed; wall time is only included with ``--timing``.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
import time
import warnings
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .basis import TruncatedSeries
from .dspace import (CommutingTuple, DASpace, NonCommutingError, QuotientModule, as_point, purity_profile,
                     quotient_module, row_contraction_defect)
from .koszul import (build_koszul, dirac_report, filtered_homology, fredholm_index, homology_dims,
                     spectrum_point)
from .moebius import (MoebiusMap, apply_moebius_to_tuple, base_point_overlap, base_point_transport_defect,
                      build_composition_unitary, ergodicity_scan, kernel_identity_residual, row_moebius_check,
                      unitarity_defect)
from .rank import GapWarning, UnreliableRankError
from .resolution import (MultiplierMatrix, ResolutionSpec, compare_theorem_39_25, compare_theorem_87,
                         default_grid, localized_homology, verify_exactness)

SCHEMA_VERSION = 1
DEFAULT_MAX_GRID = 10_000


class InputError(ValueError):
    """Bad configuration or input file; maps to exit code 2."""


# ---------------------------------------------------------------------------
# JSON decoding


def parse_complex(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise InputError(f"complex numbers are [re, im] pairs, got {x!r}")


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def parse_point(x) -> np.ndarray:
    if not isinstance(x, list):
        raise InputError(f"a point is a list of [re, im] pairs, got {x!r}")
    return np.array([parse_complex(v) for v in x], dtype=complex)


def parse_matrix(x) -> np.ndarray:
    if not isinstance(x, list) or not x or not all(isinstance(r, list) for r in x):
        raise InputError("a matrix is a non-empty row-major list of rows")
    if len({len(r) for r in x}) != 1:
        raise InputError("matrix rows have different lengths")
    return np.array([[parse_complex(v) for v in r] for r in x], dtype=complex)


def parse_polynomial(x, d: int) -> dict[tuple[int, ...], complex]:
    """``[{"exp": [..], "coeff": [re, im]}, ...]`` -> ``{exponents: coefficient}``."""
    if not isinstance(x, list):
        raise InputError("a polynomial is a list of {exp, coeff} terms")
    out: dict[tuple[int, ...], complex] = {}
    for term in x:
        if not isinstance(term, dict) or "exp" not in term or "coeff" not in term:
            raise InputError(f"polynomial term needs 'exp' and 'coeff': {term!r}")
        exp = term["exp"]
        if not isinstance(exp, list) or len(exp) != d or not all(isinstance(e, int) and e >= 0 for e in exp):
            raise InputError(f"exponent must be {d} nonnegative integers: {exp!r}")
        key = tuple(exp)
        out[key] = out.get(key, 0) + parse_complex(term["coeff"])
    return out


def encode_polynomial(s: TruncatedSeries) -> list[dict]:
    items = sorted(s.coefficients.items(), key=lambda kv: kv[0].sort_key())
    return [{"exp": list(m.exponents), "coeff": encode_complex(c)} for m, c in items]


def parse_multiplier(x, d: int) -> MultiplierMatrix:
    if not isinstance(x, list) or not x or not all(isinstance(r, list) for r in x):
        raise InputError("a multiplier matrix is a row-major list of rows of polynomials")
    rows = [[parse_polynomial(p, d) for p in r] for r in x]
    try:
        return MultiplierMatrix.from_terms(rows, d)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def encode_multiplier(phi: MultiplierMatrix) -> list:
    return [[encode_polynomial(e) for e in row] for row in phi.entries]


def parse_tuple(x, d: int) -> CommutingTuple:
    mats = x.get("matrices")
    if not isinstance(mats, list) or len(mats) != d:
        raise InputError(f"tuple needs a list of {d} matrices")
    arr = [parse_matrix(m) for m in mats]
    if len({a.shape for a in arr}) != 1 or arr[0].shape[0] != arr[0].shape[1]:
        raise InputError("tuple matrices must be square and of equal size")
    tol = float(x.get("commute_tol", 1e-10))
    return CommutingTuple(np.stack(arr), tol=tol)


def parse_module(x, d: int):
    if not isinstance(x, dict) or "kind" not in x:
        raise InputError("module needs a 'kind'")
    kind = x["kind"]
    if kind == "tuple":
        return parse_tuple(x, d)
    if kind == "point":
        return CommutingTuple.scalar(as_point(parse_point(x["point"]), d, closed=True))
    if kind == "quotient":
        cap = x.get("cap")
        if not isinstance(cap, int) or cap < 0:
            raise InputError("quotient module needs an integer 'cap' >= 0")
        space = DASpace(d, cap)
        gens = x.get("generators")
        if not isinstance(gens, list) or not gens:
            raise InputError("quotient module needs a non-empty 'generators' list")
        try:
            vecs = [space.polynomial(parse_polynomial(g, d)) for g in gens]
        except KeyError as exc:
            raise InputError(f"generator term above the cap: {exc}") from None
        return quotient_module(space, vecs)
    raise InputError(f"unknown module kind {kind!r}")


def parse_resolution(x, d: int) -> ResolutionSpec:
    if not isinstance(x, dict):
        raise InputError("resolution must be an object")
    ranks = x.get("ranks")
    maps = x.get("maps")
    if not isinstance(ranks, list) or not isinstance(maps, list):
        raise InputError("resolution needs 'ranks' and 'maps'")
    shifts = x.get("shifts")
    try:
        return ResolutionSpec(d, tuple(ranks), tuple(parse_multiplier(m, d) for m in maps),
                              x.get("target", {}), None if shifts is None else tuple(map(tuple, shifts)))
    except ValueError as exc:
        raise InputError(f"invalid resolution: {exc}") from None


def encode_resolution(R: ResolutionSpec) -> dict:
    out = {"ranks": list(R.ranks), "maps": [encode_multiplier(m) for m in R.maps], "target": _jsonable(R.target)}
    if R.shifts is not None:
        out["shifts"] = [list(s) for s in R.shifts]
    return out


def parse_automorphism(x, d: int) -> MoebiusMap:
    if not isinstance(x, dict) or "lambda" not in x:
        raise InputError("automorphism needs 'lambda'")
    lam = parse_point(x["lambda"])
    if lam.shape[0] != d:
        raise InputError(f"lambda has {lam.shape[0]} coordinates, expected {d}")
    if np.linalg.norm(lam) >= 1:
        raise InputError(f"lambda = {lam} is not in the open unit ball")
    u = x.get("unitary", "identity")
    u = None if u == "identity" else parse_matrix(u)
    try:
        return MoebiusMap(lam, u, unitary_tol=float(x.get("unitary_tol", 1e-12)))
    except ValueError as exc:
        raise InputError(str(exc)) from None


@dataclass
class Example:
    name: str
    d: int
    raw: dict
    module: Any = None
    resolution: ResolutionSpec | None = None
    automorphism: MoebiusMap | None = None


def decode_json(text: str, source: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError(f"{source}: top level must be an object")
    return data


def bundled_names() -> list[str]:
    root = resources.files("hilmod") / "corpus"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def read_input(ref: str) -> tuple[str, str]:
    """Path or bundled corpus name -> (text, source label)."""
    p = Path(ref)
    if p.is_file():
        return p.read_text(encoding="utf-8"), str(p)
    name = ref[:-5] if ref.endswith(".json") else ref
    res = resources.files("hilmod") / "corpus" / f"{name}.json"
    if res.is_file():
        return res.read_text(encoding="utf-8"), f"corpus:{name}"
    raise InputError(f"no such input file or bundled example: {ref!r} (bundled: {', '.join(bundled_names())})")


def load_corpus(ref: str) -> Example:
    text, source = read_input(ref)
    data = decode_json(text, source)
    version = data.get("version")
    if version != SCHEMA_VERSION:
        raise InputError(f"{source}: schema version {version!r} is not supported (expected {SCHEMA_VERSION})")
    d = data.get("d")
    if not isinstance(d, int) or d < 1:
        raise InputError(f"{source}: 'd' must be a positive integer")
    ex = Example(str(data.get("name", Path(ref).stem)), d, data)
    try:
        if "module" in data:
            ex.module = parse_module(data["module"], d)
        if "resolution" in data:
            ex.resolution = parse_resolution(data["resolution"], d)
        if "automorphism" in data:
            ex.automorphism = parse_automorphism(data["automorphism"], d)
    except NonCommutingError as exc:
        raise InputError(f"{source}: {exc}") from None
    except KeyError as exc:
        raise InputError(f"{source}: missing field {exc}") from None
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise InputError(f"{source}: {exc}") from None
        raise InputError(f"{source}: {exc}") from None
    return ex


# ---------------------------------------------------------------------------
# configuration and grids


@dataclass
class JobConfig:
    command: str
    d: int | None = None
    cap: int = 4
    expansion_cap: int | None = None
    rank_tol: float = 1e-9
    seed: int = 0
    input: str | None = None
    output: str | None = None
    grid: str | None = None
    points: str | None = None
    format: str = "json"
    max_grid_points: int = DEFAULT_MAX_GRID
    samples: int = 100
    n_max: int = 10
    threshold: float = 0.01
    timing: bool = False

    def validate(self):
        if self.cap < 0:
            raise InputError("--cap must be >= 0")
        if self.expansion_cap is not None and self.expansion_cap < self.cap:
            raise InputError("--expansion-cap must be >= --cap")
        if not 0 < self.rank_tol < 1e-3:
            raise InputError("--rank-tol must lie in (0, 1e-3)")
        if self.d is not None and self.d < 1:
            raise InputError("--d must be >= 1")
        if self.samples < 0 or self.n_max < 0:
            raise InputError("--samples and --n-max must be >= 0")
        if self.max_grid_points < 0:
            raise InputError("--max-grid-points must be >= 0")

    @property
    def M(self) -> int:
        return self.cap + 40 if self.expansion_cap is None else self.expansion_cap

    def echo(self) -> dict:
        out = asdict(self)
        out.pop("timing")
        out.pop("output")
        return out


def parse_grid(spec: str, d: int, max_points: int = DEFAULT_MAX_GRID) -> list[np.ndarray]:
    """``"z1.re=a:b:n,z2.im=a:b:n"`` -> points; unnamed components are 0, first axis varies slowest."""
    axes = []
    for part in filter(None, (p.strip() for p in spec.split(","))):
        try:
            name, rng = part.split("=")
            var, comp = name.strip().split(".")
            i = int(var.strip().lstrip("z")) - 1
            a, b, n = rng.split(":")
            a, b, n = float(a), float(b), int(n)
        except ValueError:
            raise InputError(f"bad grid axis {part!r}; expected like z1.re=-0.5:0.5:11") from None
        if not 0 <= i < d or comp not in ("re", "im"):
            raise InputError(f"grid axis {name!r} does not name a coordinate of C^{d}")
        if n < 0:
            raise InputError("grid axis counts must be >= 0")
        axes.append((i, comp, np.linspace(a, b, n) if n != 1 else np.array([a])))
    total = math.prod(len(v) for _, _, v in axes) if axes else 0
    if total > max_points:
        raise InputError(f"grid has {total} points, above the limit {max_points} (raise --max-grid-points)")
    pts = []
    for combo in itertools.product(*[v for _, _, v in axes]):
        z = np.zeros(d, dtype=complex)
        for (i, comp, _), val in zip(axes, combo):
            z[i] += val if comp == "re" else 1j * val
        pts.append(z)
    for z in pts:
        if np.linalg.norm(z) >= 1:
            raise InputError(f"grid point {z} is not in the open unit ball")
    return pts


def parse_points(spec: str, d: int) -> list[np.ndarray]:
    data = decode_json(spec if spec.strip().startswith("{") else '{"p": %s}' % spec, "--points")
    pts = data.get("p", data.get("points"))
    if not isinstance(pts, list):
        raise InputError("--points must be a JSON list of points")
    out = []
    for p in pts:
        z = parse_point(p)
        if z.shape[0] != d:
            raise InputError(f"point {p} has {z.shape[0]} coordinates, expected {d}")
        if np.linalg.norm(z) >= 1:
            raise InputError(f"point {z} is not in the open unit ball")
        out.append(z)
    return out


def grid_points(cfg: JobConfig, d: int, default=None) -> list[np.ndarray]:
    if cfg.grid is not None and cfg.points is not None:
        raise InputError("give either --grid or --points, not both")
    if cfg.grid is not None:
        return parse_grid(cfg.grid, d, cfg.max_grid_points)
    if cfg.points is not None:
        return parse_points(cfg.points, d)
    return default if default is not None else []


# ---------------------------------------------------------------------------
# output


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return encode_complex(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def dumps_report(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path: str, text: str):
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=str(target.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def grid_header(d: int) -> list[str]:
    cols = ["idx"]
    for i in range(1, d + 1):
        cols += [f"z{i}_re", f"z{i}_im"]
    return cols + ["membership", "dirac_sigma_min"]


def emit_grid(rows: list[dict], d: int, fmt: str) -> str:
    """Scan rows (keys ``point``, ``member``, ``sigma_min``) as CSV or JSON text, ordered by index."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(grid_header(d))
        for idx, r in enumerate(rows):
            vals = [str(idx)]
            for z in r["point"]:
                vals += [repr(float(z.real)), repr(float(z.imag))]
            vals += ["1" if r["member"] else "0", repr(float(r["sigma_min"]))]
            w.writerow(vals)
        return buf.getvalue()
    if fmt == "json":
        body = [{"idx": i, "point": r["point"], "membership": int(r["member"]), "dirac_sigma_min": r["sigma_min"],
                 "reliable": r["reliable"]} for i, r in enumerate(rows)]
        return dumps_report({"columns": grid_header(d), "rows": body})
    raise InputError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# commands


def _need_example(cfg: JobConfig) -> Example:
    if cfg.input is None:
        raise InputError(f"{cfg.command} needs --input (a path or one of: {', '.join(bundled_names())})")
    ex = load_corpus(cfg.input)
    if cfg.d is not None and cfg.d != ex.d:
        raise InputError(f"--d {cfg.d} disagrees with the input's d = {ex.d}")
    return ex


def _need_module(ex: Example):
    if ex.module is None:
        raise InputError(f"example {ex.name!r} has no module")
    return ex.module


def _need_resolution(ex: Example) -> ResolutionSpec:
    if ex.resolution is None:
        raise InputError(f"example {ex.name!r} has no resolution")
    return ex.resolution


def _module_homology(H, tol: float):
    if isinstance(H, QuotientModule) and not H.is_finite:
        if not H.graded:
            raise InputError("non-graded quotient with truncation loss has no truncation-safe homology route")
        return filtered_homology(H.tuple, H.degrees, H.parent.cap, None, tol), "strands<=N"
    T = H.tuple if isinstance(H, QuotientModule) else H
    return homology_dims(build_koszul(T), tol), "finite"


def _module_tuple(H) -> CommutingTuple:
    return H.tuple if isinstance(H, QuotientModule) else H


def cmd_koszul_homology(cfg: JobConfig) -> tuple[dict, int]:
    ex = _need_example(cfg)
    H = _need_module(ex)
    rep, route = _module_homology(H, cfg.rank_tol)
    res = rep.to_dict()
    res.update(route=route, fredholm_index=fredholm_index(rep), module_dim=_module_tuple(H).n)
    return {"example": ex.name, **res}, 0


def cmd_dirac(cfg: JobConfig) -> tuple[dict, int]:
    ex = _need_example(cfg)
    T = _module_tuple(_need_module(ex))
    K = build_koszul(T)
    hom = homology_dims(K, cfg.rank_tol)
    dr = dirac_report(K, cfg.rank_tol)
    ok = dr.harmonic_dims == hom.dims and dr.invertible == all(h == 0 for h in hom.dims)
    res = {
        "example": ex.name,
        "harmonic_dims": list(dr.harmonic_dims),
        "homology_dims": list(hom.dims),
        "sigma_min": dr.sigma_min,
        "invertible": dr.invertible,
        "gap_ratio": dr.decision.gap_ratio,
        "self_adjoint_residual": dr.self_adjoint_residual,
        "hodge_consistent": ok,
    }
    return res, 0 if ok else 1


def cmd_taylor_spectrum(cfg: JobConfig) -> tuple[dict | str, int]:
    ex = _need_example(cfg)
    T = _module_tuple(_need_module(ex))
    pts = grid_points(cfg, T.d)
    rows = []
    for z in pts:
        sp = spectrum_point(T, z, cfg.rank_tol)
        rows.append({"point": z, "member": sp.member, "sigma_min": sp.dirac_sigma_min, "reliable": sp.reliable})
    return emit_grid(rows, T.d, cfg.format), 0


def _rng_point(rng, d: int, radius: float) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v) * radius * rng.uniform() ** (1 / (2 * d))


def _rng_unitary(rng, d: int) -> np.ndarray:
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def cmd_moebius_check(cfg: JobConfig) -> tuple[dict, int]:
    d = cfg.d or 2
    rng = np.random.default_rng(cfg.seed)
    worst67 = 0.0
    for _ in range(cfg.samples):
        lam, z, w = (_rng_point(rng, d, 0.9) for _ in range(3))
        worst67 = max(worst67, kernel_identity_residual(lam, z, w, _rng_unitary(rng, d)))
    lam = _rng_point(rng, d, 0.5)
    pairs = [(_rng_point(rng, d, 0.9), _rng_point(rng, d, 0.9)) for _ in range(cfg.samples)]
    rep = row_moebius_check(lam, DASpace(d, cfg.cap), pairs, cfg.M)
    ok = worst67 <= 1e-12 and rep.ok
    res = {
        "d": d,
        "kernel_identity_max_residual": worst67,
        "row_multiplier_lambda": lam,
        "closed_form_max_residual": rep.closed_form_residual,
        "truncated_operator_residual": rep.operator_residual,
        "samples": cfg.samples,
        "pass": ok,
    }
    return res, 0 if ok else 1


def _automorphism(cfg: JobConfig, d: int) -> MoebiusMap:
    if cfg.input is not None:
        ex = _need_example(cfg)
        if ex.automorphism is None:
            raise InputError(f"example {ex.name!r} has no automorphism")
        return ex.automorphism
    pts = grid_points(cfg, d)
    if len(pts) != 1:
        raise InputError("give the automorphism via --input or exactly one point in --points")
    return MoebiusMap(pts[0])


def cmd_build_unitary(cfg: JobConfig) -> tuple[dict, int]:
    phi = _automorphism(cfg, cfg.d or 2)
    rows = []
    caps = sorted({min(cfg.cap + 10, cfg.M), min(cfg.cap + 20, cfg.M), cfg.M})
    for M in caps:
        U = build_composition_unitary(phi, cfg.cap, M)
        rows.append({"expansion_cap": M, "unitarity_defect": unitarity_defect(U),
                     "transport_defect": base_point_transport_defect(U),
                     "base_point_overlap": abs(base_point_overlap(U))})
    defects = [r["unitarity_defect"] for r in rows]
    monotone = all(b <= a + 1e-14 for a, b in zip(defects, defects[1:]))
    res = {"lambda": phi.lam, "unitary": phi.u, "cap": cfg.cap, "by_expansion_cap": rows, "monotone": monotone}
    return res, 0


def cmd_resolution_verify(cfg: JobConfig) -> tuple[dict, int]:
    ex = _need_example(cfg)
    R = _need_resolution(ex)
    rep = verify_exactness(R, DASpace(R.d, cfg.cap), cfg.rank_tol)
    checks = [{"level": c.level, "strand": c.strand, "kernel_dim": c.kernel_dim, "image_dim": c.image_dim,
               "gap_ratios": list(c.gap_ratios), "exact": c.exact} for c in rep.checks]
    res = {"example": ex.name, "ranks": list(R.ranks), "composite_residual": rep.composite_residual,
           "exact": rep.exact, "reliable": rep.reliable, "flagged_strands": list(rep.flagged_strands),
           "checks": checks, "label": rep.label, "note": rep.note}
    return res, 0 if rep.exact else 1


def cmd_localize(cfg: JobConfig) -> tuple[dict, int]:
    ex = _need_example(cfg)
    R = _need_resolution(ex)
    pts = grid_points(cfg, R.d, default_grid(R.d))
    out = []
    for z in pts:
        loc = localized_homology(R, z, cfg.rank_tol)
        out.append({"point": z, "dims": {str(k): v for k, v in loc.dims.items()},
                    "matrices": [m for m in loc.matrices],
                    "gap_ratios": [dd.gap_ratio for dd in loc.decisions], "reliable": loc.reliable})
    return {"example": ex.name, "points": out}, 0


def cmd_compare_39_25(cfg: JobConfig) -> tuple[dict, int]:
    ex = _need_example(cfg)
    rep = compare_theorem_39_25(_need_resolution(ex), _need_module(ex), cfg.rank_tol, verify_cap=cfg.cap)
    return {"example": ex.name, **rep.to_dict(), "all_match": rep.all_match}, 0 if rep.all_match else 1


def cmd_compare_87(cfg: JobConfig) -> tuple[dict, int]:
    ex = _need_example(cfg)
    R, H = _need_resolution(ex), _need_module(ex)
    if ex.automorphism is not None and cfg.grid is None and cfg.points is None:
        maps = [ex.automorphism]
    else:
        maps = [MoebiusMap(z) for z in grid_points(cfg, R.d, default_grid(R.d))]
    reps = [compare_theorem_87(R, H, phi, cfg.rank_tol, verify_cap=cfg.cap) for phi in maps]
    ok = all(r.all_match for r in reps)
    return {"example": ex.name, "comparisons": [r.to_dict() for r in reps], "all_match": ok}, 0 if ok else 1


def cmd_ergodicity_scan(cfg: JobConfig) -> tuple[dict, int]:
    if cfg.input is not None:
        ex = _need_example(cfg)
        H = _need_module(ex)
        if not isinstance(H, QuotientModule):
            raise InputError("ergodicity-scan needs a quotient module (its submodule is scanned)")
        space, gens, d = H.parent, list(H.generators), ex.d
    else:
        d = cfg.d or 1
        space = DASpace(d, cfg.cap)
        e = [0] * d
        e[0] = 1
        gens = [space.monomial(tuple(e))]
    default = [np.zeros(d, complex)] + [0.3 * np.eye(d, dtype=complex)[i] for i in range(d)] + default_grid(d)[1:]
    pts = grid_points(cfg, d, default)
    rep = ergodicity_scan(space, gens, pts, cfg.M, cfg.threshold)
    res = {"d": d, "cap": space.cap, "found": rep.found, "point": rep.point, "vector_index": rep.vector_index,
           "defect": rep.defect, "points_scanned": rep.points_scanned, "max_defects": list(rep.max_defects),
           "threshold": rep.threshold}
    return res, 0


def cmd_purity(cfg: JobConfig) -> tuple[dict, int]:
    if cfg.input is not None:
        ex = _need_example(cfg)
        T = _module_tuple(_need_module(ex))
        name = ex.name
        if ex.automorphism is not None:
            T = apply_moebius_to_tuple(T, ex.automorphism)
    else:
        d = cfg.d or 2
        T = DASpace(d, cfg.cap).shift_tuple()
        name = f"truncated-shift-d{d}-N{cfg.cap}"
        pts = grid_points(cfg, d)
        if len(pts) > 1:
            raise InputError("purity takes at most one --points entry (the automorphism base point)")
        if pts:
            T = apply_moebius_to_tuple(T, MoebiusMap(pts[0]))
    prof = purity_profile(T, cfg.n_max)
    first_zero = next((n for n, v in enumerate(prof) if v == 0.0), None)
    res = {"module": name, "row_contraction_defect": row_contraction_defect(T), "profile": prof,
           "first_exact_zero": first_zero}
    return res, 0


COMMANDS = {
    "koszul-homology": cmd_koszul_homology,
    "dirac": cmd_dirac,
    "taylor-spectrum": cmd_taylor_spectrum,
    "moebius-check": cmd_moebius_check,
    "build-unitary": cmd_build_unitary,
    "resolution-verify": cmd_resolution_verify,
    "localize": cmd_localize,
    "compare-39-25": cmd_compare_39_25,
    "compare-87": cmd_compare_87,
    "ergodicity-scan": cmd_ergodicity_scan,
    "purity": cmd_purity,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hilmod", description="Truncated Drury-Arveson module computations.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int, default=None, help="number of variables")
    common.add_argument("--cap", type=int, default=4, help="truncation degree N")
    common.add_argument("--expansion-cap", type=int, default=None, help="series cap M (default N+40)")
    common.add_argument("--rank-tol", type=float, default=1e-9, help="relative singular value cutoff")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--input", default=None, help="JSON file or bundled example name")
    common.add_argument("--output", default=None, help="write here instead of stdout")
    common.add_argument("--grid", default=None, help='axis ranges, e.g. "z1.re=-0.5:0.5:11,z1.im=-0.5:0.5:11"')
    common.add_argument("--points", default=None, help="JSON list of points, each a list of [re, im] pairs")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--max-grid-points", type=int, default=DEFAULT_MAX_GRID)
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--n-max", type=int, default=10)
    common.add_argument("--threshold", type=float, default=0.01)
    common.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identity)")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    sub.add_parser("list-corpus", help="print bundled example names")
    return p


def run(cfg: JobConfig) -> tuple[str, int]:
    """Execute one command; returns (text to emit, exit code)."""
    cfg.validate()
    if cfg.format == "csv" and cfg.command != "taylor-spectrum":
        raise InputError("--format csv is only available for taylor-spectrum")
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", GapWarning)
        result, code = COMMANDS[cfg.command](cfg)
    if isinstance(result, str):
        return result, code
    report = {
        "version": SCHEMA_VERSION,
        "command": cfg.command,
        "config": cfg.echo(),
        "results": result,
        "warnings": [str(w.message) for w in caught if issubclass(w.category, GapWarning)],
        "exit_code": code,
    }
    if cfg.timing:
        report["wall_time_s"] = time.perf_counter() - start
    return dumps_report(report), code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list-corpus":
        print("\n".join(bundled_names()))
        return 0
    cfg = JobConfig(**{k: v for k, v in vars(args).items()})
    try:
        text, code = run(cfg)
    except (InputError, NonCommutingError, UnreliableRankError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # ball violations and other domain errors raised by the compute modules
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.output:
        write_atomic(cfg.output, text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
