"""Data files and configs covering every family/kernel pair the CLI accepts."""

import json

import numpy as np

FAMILY_PARAMS = {
    "lasso": {"lambda": 1.0},
    "elastic-net": {"lambda1": 1.0, "lambda2": 0.5},
    "logistic": {},
    "probit-glmm": {"beta": [0.2], "blocks": [{"lambda": [[1.5]], "r": [[1.0, 0.3], [0.3, 1.0]]}]},
    "robit": {"nu": 4.0},
    "quantreg": {"alpha": 0.3, "b0": [[10.0, 0.0], [0.0, 10.0]], "n0": 4.0, "t0": 4.0},
}

KERNELS = {
    "lasso": ["da", "adda"],
    "elastic-net": ["da", "adda"],
    "logistic": ["da"],
    "probit-glmm": ["da", "haar-pxda", "adda"],
    "robit": ["da"],
    "quantreg": ["two-block", "two-block-pxda:1", "two-block-pxda:2"],
}

CASES = [(family, kernel) for family, kernels in KERNELS.items() for kernel in kernels]


def write_data(directory, seed=0, m=12):
    """Continuous and binary response tables; returns their paths."""
    gen = np.random.default_rng(seed)
    w = gen.standard_normal((m, 2))
    cont = directory / "continuous.csv"
    rows = np.column_stack([w @ [1.0, -0.5] + gen.standard_normal(m), w])
    np.savetxt(cont, rows, delimiter=",", header="y,w1,w2", comments="")
    binary = directory / "binary.csv"
    v = gen.standard_normal((m, 2))
    z = (w @ [0.8, -0.4] + gen.standard_normal(m) > 0).astype(float)
    z[:2] = [0.0, 1.0]
    np.savetxt(binary, np.column_stack([z, w[:, :1], v]), delimiter=",", header="z,w1,v1,v2", comments="")
    return cont, binary


def make_config(directory, family, kernel, iterations=150, seed=7, **extra):
    """Write the JSON config for one pair and return its path."""
    cont, binary = write_data(directory)
    binary_family = family in ("logistic", "probit-glmm", "robit")
    data = {"path": (binary if binary_family else cont).name, "response": "z" if binary_family else "y"}
    if family == "probit-glmm":
        data.update(design=["w1"], random_effects=["v1", "v2"])
    elif binary_family:
        data["design"] = ["w1"]
    model = {"family": family, **FAMILY_PARAMS[family]}
    if family in ("lasso", "elastic-net"):
        model["standardize"] = True
    cfg = {"model": model, "kernel": kernel, "iterations": iterations, "burn_in": 10, "seed": seed,
           "data": data}
    if kernel == "adda":
        cfg["adda"] = {"k": 2, "r": 0.5, "epsilon": 0.3,
                       "latency": {"item_mean": 1.0, "speeds": [1.0, 3.0]}}
    cfg.update(extra)
    path = directory / f"{family}-{kernel.replace(':', '')}.json"
    path.write_text(json.dumps(cfg, indent=2))
    return path
