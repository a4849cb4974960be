"""Smoke test for the airbridge Python extension.

Build first:  pip install --no-build-isolation -e crates/py
Then run:     python3 python/smoke_test.py
"""

import json
import math
from pathlib import Path

import numpy as np

import airbridge as ab

DATA = Path(__file__).resolve().parent.parent / "data"


def close(a, b, rel):
    return abs(a / b - 1.0) <= rel


def main():
    p = ab.transmon_params(0.23, 10.0)
    levels = ab.charge_basis_levels(0.23, 10.0)
    assert abs(p.n_zpf * p.phi_zpf - 0.5) < 1e-12
    assert close(p.omega, levels[1], 0.01)
    assert close(p.alpha, levels[2] - 2 * levels[1], 0.10)

    assert abs(ab.squid_effective_ej(5.0, 5.0, math.pi)) < 1e-12
    assert abs(ab.squid_phase_offset(2.0, 8.0, math.pi / 2) - math.atan(-0.6)) < 1e-12

    report = ab.quantize_design((DATA / "design.json").read_text())
    assert len(report["qubits"]) == 2 and report["couplings"][0]["j12"] > 0

    x = np.arange(1001) * 0.1
    edge = ab.Profile(0.0, 0.1, list(3.0 * np.exp(-x * x / 200.0)))
    s = ab.simulate_scaffold(edge, 60.0)
    assert abs(s.at(30.0) - 0.06665) < 1e-4
    length, monotone, _ = ab.max_stable_length(edge, 30.0, 200.0)
    assert length == 69.5 and monotone
    assert not ab.detect_plateau(ab.grayscale_profile(3.0, 60.0, 601))["has_plateau"]

    n = np.arange(0, 100, 10.0)
    fit = ab.linear_fit(list(n), list(5e-7 + 3.84e-9 * n))
    assert abs(fit["slope"] - 3.84e-9) < 1e-12

    m = ab.NotchModel(6.3, 2.0e6, 1.0e5, 0.1)
    f, s21 = m.sweep()
    fit = ab.fit_notch(f, s21)
    assert close(fit["q_internal"], 2.0e6, 1e-3)
    assert m.photon_number(-120.0) > 0

    nph = list(np.logspace(-2, 7, 40))
    loss = [ab.tls_loss(k, 4.8e-7, 50.0, 1.0, 5.3e7) for k in nph]
    tls = ab.fit_tls(nph, loss)
    assert close(tls["q_hp"], 5.3e7, 1e-3)

    layout = (DATA / "layout.json").read_text()
    placed = ab.place(layout, (DATA / "rule.json").read_text())
    assert placed and ab.check(layout, json.dumps(placed)) == []

    print(f"airbridge {ab.__version__}: smoke test OK ({len(placed)} bridges placed)")


if __name__ == "__main__":
    main()
