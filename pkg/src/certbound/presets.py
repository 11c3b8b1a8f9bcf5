"""Built-in run configurations reproducing the reference figure curves.

Every preset expands to a complete config dict; the CLI echoes the
expanded form into the output header so each file is reproducible from
the artifact alone.
"""

from __future__ import annotations

import copy

_BSC_GRID = {"start": 100, "stop": 2000, "step": 100}

PRESETS: dict[str, dict] = {
    "fig1": {
        "command": "sum-cdf",
        "distribution": {"family": "bernoulli", "p": 0.2, "n": 100},
        "grid": {"start": 5.0, "stop": 35.0, "step": 1.0},
    },
    "fig2": {
        "command": "sum-cdf",
        "distribution": {"family": "chi_squared", "n": 50},
        "grid": {"start": 0.0, "stop": 100.0, "step": 2.0},
        "quadrature": {"nodes": 2001},
    },
    "fig3a": {
        "command": "dt-curve",
        "channel": {"kind": "bsc", "delta": 0.11},
        "rate": 0.32,
        "grid": dict(_BSC_GRID),
    },
    "fig3b": {
        "command": "mc-curve",
        "channel": {"kind": "bsc", "delta": 0.11},
        "rate": 0.42,
        "grid": dict(_BSC_GRID),
    },
    "fig4a": {
        "command": "dt-curve",
        "channel": {"kind": "bi_awgn", "snr": 1.0},
        "rate": 0.425,
        "grid": dict(_BSC_GRID),
        "quadrature": {"nodes": 2001},
    },
    "fig4b": {
        "command": "mc-curve",
        "channel": {"kind": "bi_awgn", "snr": 1.0},
        "rate": 0.425,
        "grid": dict(_BSC_GRID),
        "quadrature": {"nodes": 2001},
    },
    "fig5a": {
        "command": "dt-curve",
        "channel": {"kind": "bi_sas", "alpha": 1.4, "sigma": 0.6},
        "rate": 0.38,
        "grid": dict(_BSC_GRID),
        "quadrature": {"nodes": 2001},
    },
    "fig5b": {
        "command": "mc-curve",
        "channel": {"kind": "bi_sas", "alpha": 1.4, "sigma": 0.6},
        "rate": 0.38,
        "grid": dict(_BSC_GRID),
        "quadrature": {"nodes": 2001},
    },
}


def preset_config(name: str) -> dict:
    if name not in PRESETS:
        raise KeyError(name)
    return copy.deepcopy(PRESETS[name])
