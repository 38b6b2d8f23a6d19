"""Freeze g1 quadrature values used by the Rust test-suite.

Writes crates/core/tests/fixtures/g1_quadrature.json with 50 probe points
plus the k-scaling probe. Run once; slow (nested adaptive quadrature).
"""
import json
import warnings

import numpy as np

from g1_quadrature_oracle import g1_quad

warnings.filterwarnings("ignore")

rng = np.random.default_rng(20240611)
mods = np.exp(rng.uniform(np.log(0.05), np.log(20.0), 50))
args = rng.uniform(-np.pi, np.pi, 50)
probes = []
for r, a in zip(mods, args):
    w = r * np.exp(1j * a)
    v = g1_quad(w)
    probes.append({"w": [w.real, w.imag], "g1": [v.real, v.imag]})
    print(len(probes), w, v, flush=True)

k = 2.0
z = 0.3 + 0.1j
gk = g1_quad(z, scale=k)
out = {
    "description": "g1(w) = (2pi)^-2 Int exp(i w.xi)/(|xi|^2 + 2 xi) dxi by nested adaptive quadrature",
    "probes": probes,
    "scaling": {"k": [k, 0.0], "z": [z.real, z.imag], "gk": [gk.real, gk.imag]},
}
with open("../crates/core/tests/fixtures/g1_quadrature.json", "w") as f:
    json.dump(out, f, indent=1)
