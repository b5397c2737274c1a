"""Monte Carlo reference values for a few Galerkin entries on the unit grid.

Each entry is a six-dimensional integral over two hat supports; points are
sampled uniformly in both supports. The gradient entries use the form

    int int d_i phi(x) g(x - y) d_j phi(y - delta) dx dy

(one derivative moved onto each hat), whose integrand has finite variance.
The results, with their standard errors, are frozen in
``tests/data/golden_mc.json``.
"""
import json
import os

import numpy as np

N = 10_000_000
CHUNK = 500_000
SEED = 20240611

CASES = [
    {"name": "g_self_kh0.5", "kind": "g", "kh": 0.5, "delta": [0, 0, 0]},
    {"name": "g_self_static", "kind": "g", "kh": 0.0, "delta": [0, 0, 0]},
    {"name": "g_face_kh0.5", "kind": "g", "kh": 0.5, "delta": [1, 0, 0]},
    {"name": "grad_xx_self_kh0.5", "kind": "grad", "i": 0, "j": 0, "kh": 0.5, "delta": [0, 0, 0]},
    {"name": "grad_xx_self_static", "kind": "grad", "i": 0, "j": 0, "kh": 0.0, "delta": [0, 0, 0]},
    {"name": "grad_xy_edge_kh0.5", "kind": "grad", "i": 0, "j": 1, "kh": 0.5, "delta": [1, 1, 0]},
    {"name": "grad_zz_face_kh0.25", "kind": "grad", "i": 2, "j": 2, "kh": 0.25, "delta": [0, 0, 1]},
]


def hat(s):
    return np.prod(1.0 - np.abs(s), axis=-1)


def hat_derivative(s, i):
    f = 1.0 - np.abs(s)
    out = -np.sign(s[:, i])
    for a in range(3):
        if a != i:
            out = out * f[:, a]
    return out


def sample(case, rng):
    delta = np.asarray(case["delta"], dtype=float)
    kh = case["kh"]
    total = 0.0
    total_sq = 0.0
    for _ in range(N // CHUNK):
        s = rng.uniform(-1.0, 1.0, size=(CHUNK, 3))
        t = rng.uniform(-1.0, 1.0, size=(CHUNK, 3))
        r = np.linalg.norm(s - (t + delta), axis=-1)
        g = np.exp(1j * kh * r) / (4 * np.pi * r)
        if case["kind"] == "g":
            f = hat(s) * g * hat(t)
        else:
            f = hat_derivative(s, case["i"]) * g * hat_derivative(t, case["j"])
        f = 64.0 * f
        total += f.sum()
        total_sq += (f.real ** 2).sum() + 1j * (f.imag ** 2).sum()
    mean = total / N
    var = (total_sq / N) - (mean.real ** 2 + 1j * mean.imag ** 2)
    se = np.sqrt(var.real / N) + 1j * np.sqrt(max(var.imag, 0.0) / N)
    return mean, se


def main():
    rng = np.random.default_rng(SEED)
    out = {"samples": N, "seed": SEED, "entries": []}
    for case in CASES:
        mean, se = sample(case, rng)
        print(f"{case['name']:24s} {mean.real:.8f} {mean.imag:+.8f}j  se {se.real:.2e} {se.imag:.2e}")
        out["entries"].append(dict(case, re=mean.real, im=mean.imag, se_re=se.real, se_im=se.imag))
    path = os.path.join(os.path.dirname(__file__), "..", "tests", "data", "golden_mc.json")
    with open(path, "w") as f:
        json.dump(out, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
