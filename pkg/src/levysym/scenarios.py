"""Named triples and the standard domain pairs used by the verification suite."""
from __future__ import annotations

import numpy as np

from .characteristics import BOX, MIXTURE, POWER, JumpDensity, LevyTriple
from .domains import Ball, Box

__all__ = ["CATALOG", "scenario", "Geometry", "GEOMETRY", "domain_pairs", "THEOREM_EXPERIMENTS",
           "experiment_params", "standard_suite", "oracle_suite"]


def _cauchy_1d():
    phi = JumpDensity(POWER, {"alpha": 1.0, "scale": 1.0 / np.pi, "r_min": 0.0}, 1,
                      support_radius=4.0)
    return LevyTriple(np.array([0.3]), np.zeros((1, 1)), phi)


def _uniform_1d():
    phi = JumpDensity(BOX, {"lower": [0.25], "upper": [1.0], "height": 2.0}, 1)
    return LevyTriple(np.array([-0.4]), np.array([[0.04]]), phi)


def _gauss_2d():
    return LevyTriple(np.array([1.0, 0.0]), np.diag([1.0, 4.0]), None)


def _mixed_2d():
    phi = JumpDensity(MIXTURE, {"weights": [1.0, 0.5], "means": [[0.6, 0.0], [-0.2, 0.5]],
                                "covs": [np.diag([0.05, 0.2]), np.diag([0.1, 0.05])]},
                      2, support_radius=2.5)
    return LevyTriple(np.array([0.5, -0.25]), np.array([[0.5, 0.2], [0.2, 0.3]]), phi)


CATALOG = {
    "cauchy-truncated-1d": _cauchy_1d,
    "uniform-jumps-asymmetric-1d": _uniform_1d,
    "gaussian-anisotropic-2d": _gauss_2d,
    "mixed-gauss-jump-2d": _mixed_2d,
}


def scenario(name):
    try:
        return CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {sorted(CATALOG)}") from None


class Geometry:
    """Length and time scales of a scenario's domains and horizons."""

    def __init__(self, half_widths, T, T_long, steps=128, steps_long=256):
        self.half_widths = np.asarray(half_widths, dtype=float)
        self.T = float(T)
        self.T_long = float(T_long)
        self.steps = int(steps)
        self.steps_long = int(steps_long)


GEOMETRY = {
    "cauchy-truncated-1d": Geometry([1.5], 0.5, 8.0),
    "uniform-jumps-asymmetric-1d": Geometry([1.0], 1.0, 40.0),
    "gaussian-anisotropic-2d": Geometry([1.5, 1.0], 0.25, 1.5),
    "mixed-gauss-jump-2d": Geometry([1.25, 1.0], 0.5, 8.0),
}


def domain_pairs(name):
    """``{pair: (D, z)}``: a centred rectangle with an off-centre start, and an
    off-centre disk of the same area with an off-centre start."""
    g = GEOMETRY[name]
    a = g.half_widths
    rect = Box(-a, a)
    z_rect = 0.35 * a
    area = rect.measure
    d = a.size
    radius = Ball(np.zeros(d), 1.0).measure
    radius = (area / radius) ** (1.0 / d)
    c = np.zeros(d)
    c[0] = 0.6 * radius
    disk = Ball(c, radius)
    z_disk = c.copy()
    z_disk[-1] += 0.25 * radius
    return {"rectangle": (rect, z_rect), "offset-disk": (disk, z_disk)}


def _bump_box(D, z):
    """Small box around ``z`` lying inside ``D``."""
    lo, hi = D.bounds()
    w = 0.2 * (hi - lo)
    box = Box(z - 0.5 * w, z + 0.5 * w)
    return box


THEOREM_EXPERIMENTS = ("thm11", "feynman-kac", "exit-moment", "lambda1", "heat-content",
                       "torsion")


def experiment_params(name, kind, pair):
    """Kind-specific parameters for one standard comparison."""
    g = GEOMETRY[name]
    D, z = domain_pairs(name)[pair]
    lo, hi = D.bounds()
    size = hi - lo
    dom = D.to_dict()
    zl = z.tolist()
    if kind == "thm11":
        box = Box(D.center + 0.1 * size - 0.3 * size, D.center + 0.1 * size + 0.3 * size)
        return {"times": [0.5 * g.T, g.T], "start": zl,
                "functions": [{"type": "indicator", "domain": box.to_dict()},
                              {"type": "radial", "center": (D.center - 0.1 * size).tolist(),
                               "width": float(0.5 * size.min()), "profile": "gaussian"}],
                "domains": [dom, dom]}, g.steps, g.T
    if kind == "feynman-kac":
        return {"domain": dom, "start": zl, "T": g.T,
                "potential": {"type": "bump", "value": 2.0, "box": _bump_box(D, z).to_dict()},
                "f": {"type": "radial", "center": (z + 0.1 * size).tolist(),
                      "width": float(0.5 * size.min()), "profile": "cauchy"}}, g.steps, g.T
    if kind == "exit-moment":
        return {"domain": dom, "start": zl, "T": g.T_long,
                "psi": {"type": "power", "p": 1.0}}, g.steps_long, g.T_long
    if kind == "lambda1":
        return {"domain": dom, "start": D.center.tolist(),
                "horizons": np.linspace(g.T_long / 16, g.T_long / 2, 24).tolist()}, \
            g.steps_long // 2, g.T_long / 2
    if kind == "heat-content":
        return {"domain": dom, "T": g.T}, g.steps, g.T
    if kind == "torsion":
        return {"domain": dom, "T_max": g.T_long, "time_quad": 48}, g.steps_long, g.T_long
    raise ValueError(f"{kind!r} is not a theorem experiment")


def standard_suite(seed=20240601, num_paths=100_000, truncation_n=64, n_jobs=1,
                   kinds=None, scenarios=None, chunk_size=4096):
    """Configurations of the theorem suite: catalog x experiments x domain pairs."""
    configs = []
    k = 0
    for name in scenarios or CATALOG:
        for pair in ("rectangle", "offset-disk"):
            for kind in THEOREM_EXPERIMENTS:
                if kinds and kind not in kinds:
                    k += 1
                    continue
                params, steps, horizon = experiment_params(name, kind, pair)
                configs.append({
                    "experiment": kind,
                    "name": f"{kind}/{name}/{pair}",
                    "scenario": name,
                    "params": params,
                    "seed": int(seed) + k,
                    "sampler": {"truncation_n": truncation_n, "num_paths": num_paths,
                                "steps": steps, "horizon": horizon, "n_jobs": n_jobs,
                                "chunk_size": chunk_size},
                })
                k += 1
    return configs


def oracle_suite(seed=20240601, kinds=None):
    """Default configurations of the deterministic oracles."""
    configs = [
        {"experiment": "oracle-bll", "seed": seed, "params": {"instances": 100}},
        {"experiment": "oracle-rw", "seed": seed, "params": {"instances": 100}},
        {"experiment": "oracle-gauss", "seed": seed,
         "params": {"A": [[1.0, 0.0], [0.0, 4.0]], "b": [2.0, 0.0], "t": 1.0}},
        {"experiment": "oracle-psi", "seed": seed, "scenario": "cauchy-truncated-1d",
         "params": {"n_list": [4, 16, 64]}},
    ]
    return [c for c in configs if not kinds or c["experiment"] in kinds]
