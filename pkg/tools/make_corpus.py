"""Regenerate the bundled example files under src/hilmod/corpus."""
import json
from pathlib import Path

from hilmod.cli import SCHEMA_VERSION, dumps_report, encode_resolution
from hilmod.resolution import koszul_resolution_of_point, taylor_resolution_monomial

OUT = Path(__file__).resolve().parents[1] / "src" / "hilmod" / "corpus"


def zero_tuple(d):
    return {"kind": "tuple", "matrices": [[[[0.0, 0.0]]] for _ in range(d)]}


def mono(e):
    return [{"exp": list(e), "coeff": [1.0, 0.0]}]


def write(name, payload):
    payload = {"version": SCHEMA_VERSION, "name": name, **payload}
    (OUT / f"{name}.json").write_text(dumps_report(payload), encoding="utf-8")


for d in (1, 2, 3):
    write(f"point-module-d{d}", {
        "d": d,
        "description": "one-dimensional module at the origin with its Koszul resolution",
        "module": zero_tuple(d),
        "resolution": encode_resolution(koszul_resolution_of_point(None, d)),
    })

quotients = {
    "quotient-z1z2": [(1, 1)],
    "quotient-z1sq-z1z2": [(2, 0), (1, 1)],
    "quotient-z1sq-z2": [(2, 0), (0, 1)],
    "quotient-z1sq-z1z2-z2sq": [(2, 0), (1, 1), (0, 2)],
}
for name, gens in quotients.items():
    write(name, {
        "d": 2,
        "description": "quotient of the truncated space by a monomial submodule, Taylor resolution",
        "module": {"kind": "quotient", "cap": 6, "generators": [mono(g) for g in gens]},
        "resolution": encode_resolution(taylor_resolution_monomial(gens, 2)),
    })

write("diagonal-tuple", {
    "d": 2,
    "description": "T1 = diag(0, 0.5), T2 = diag(0, 0.25); joint spectrum {(0,0), (0.5,0.25)}",
    "module": {"kind": "tuple", "matrices": [
        [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]],
        [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.25, 0.0]]],
    ]},
})

write("moebius-point-d2", {
    "d": 2,
    "description": "origin module with an automorphism based at (0.3, 0.4)",
    "module": zero_tuple(2),
    "resolution": encode_resolution(koszul_resolution_of_point(None, 2)),
    "automorphism": {"lambda": [[0.3, 0.0], [0.4, 0.0]], "unitary": "identity"},
})
