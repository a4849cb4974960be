"""Writes the example inputs under data/ (deterministic)."""

import json
from pathlib import Path

import numpy as np

DATA = Path(__file__).resolve().parent.parent / "data"


def write_csv(name, header, rows):
    lines = [",".join(header)]
    lines += [",".join(repr(float(v)) if not isinstance(v, str) else v for v in row) for row in rows]
    (DATA / name).write_text("\n".join(lines) + "\n")


def design():
    d = {
        "nodes": ["1", "2", "3", "4", "5"],
        "ground": {"1": 60.0, "2": 60.0, "3": 29.5, "4": 60.0, "5": 60.0},
        "pairs": [
            {"a": "1", "b": "2", "c_fF": 52.45746863493275},
            {"a": "2", "b": "3", "c_fF": 6.67},
            {"a": "4", "b": "3", "c_fF": 6.75},
            {"a": "5", "b": "4", "c_fF": 52.5449327126556},
        ],
        "squids": [
            {"qubit": ["1", "2"], "ejs_GHz": 0.0, "ejl_GHz": 10.202082271267574},
            {"qubit": ["5", "4"], "ejs_GHz": 0.0, "ejl_GHz": 10.212827109226723},
        ],
    }
    (DATA / "design.json").write_text(json.dumps(d, indent=2) + "\n")


def edge():
    x = np.arange(1001) * 0.1
    write_csv("edge.csv", ["x_um", "h_um"], zip(x, 3.0 * np.exp(-x * x / 200.0)))


def resistance(rng):
    n = np.arange(1, 11) * 10
    r = 0.52 * n * (1 + 0.01 * rng.standard_normal(n.size))
    write_csv("resistance.csv", ["n_bridges", "resistance_ohm"], zip(n, r))


def units(rng):
    rho = 0.21e-6
    rows = []
    for length in (20.0, 30.0, 40.0, 50.0, 60.0):
        ratio = length * 1e-6 / (16e-6 * 400e-9) + 20e-6 / (30e-6 * 200e-9)
        r = rho * ratio * (1 + 0.01 * rng.standard_normal())
        rows.append([length, 16.0, 400.0, 20.0, 30.0, 200.0, r])
    header = [
        "bridge_length_um", "bridge_width_um", "bridge_thickness_nm",
        "pad_length_um", "pad_width_um", "pad_thickness_nm", "resistance_ohm",
    ]
    write_csv("units.csv", header, rows)


def loss():
    n = np.arange(10) * 10
    write_csv("loss.csv", ["n_bridges", "inv_qi"], zip(n, 5e-7 + n * 3.84e-9))


def s21(rng):
    f0, qi, qc, phi = 6.3, 2.0e6, 1.0e5, 0.1
    ql = 1 / (1 / qi + np.cos(phi) / qc)
    f = f0 + np.linspace(-5, 5, 201) * f0 / ql
    s = 1 - (ql / qc) * np.exp(1j * phi) / (1 + 2j * ql * (f - f0) / f0)
    s = s + 1e-3 * (rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size))
    write_csv("s21.csv", ["f_GHz", "re", "im"], zip(f, s.real, s.imag))


def tls(rng):
    fd, nc, beta, qhp = 1 / 2.08e6, 30.0, 1.0, 5.3e7
    n = 10.0 ** np.arange(-2, 7.01, 0.25)
    y = fd / np.sqrt(1 + (n / nc) ** beta) + 1 / qhp
    write_csv("tls.csv", ["n_photon", "inv_qi"], zip(n, y * (1 + 0.01 * rng.standard_normal(n.size))))


def layout():
    paths = [
        {"id": "ctrl1", "role": "control", "trace_um": 10, "gap_um": 6,
         "vertices": [[0, 0], [1000, 0]]},
        {"id": "ro1", "role": "readout", "trace_um": 10, "gap_um": 6,
         "vertices": [[0, 400], [500, 400], [500, 900]]},
        {"id": "res1", "role": "resonator", "trace_um": 10, "gap_um": 6,
         "vertices": [[1200, 0], [1200, 600], [1700, 600], [1700, 0]]},
    ]
    (DATA / "layout.json").write_text(json.dumps({"paths": paths}, indent=2) + "\n")
    rule = {"spacing_um": 100, "end_margin_um": 50}
    (DATA / "rule.json").write_text(json.dumps(rule, indent=2) + "\n")


def main():
    DATA.mkdir(exist_ok=True)
    rng = np.random.default_rng(20240611)
    design()
    edge()
    resistance(rng)
    units(rng)
    loss()
    s21(rng)
    tls(rng)
    layout()


if __name__ == "__main__":
    main()
