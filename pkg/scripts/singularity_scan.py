#!/usr/bin/env python3
"""Scan the second-harmonic amplitude under the expanding speed H = L and
locate the curvature pinch time for each amplitude.

For u0 = 1 + a2*cos(2 theta) the length solves L(t) = 2*pi*e^{(1-2pi)t}
while the min radius deviation decays like -3*a2*e^{-3t}, so the pinch
happens at the analytic time t* = ln(3*a2) / (4 - 2*pi). The detected
event times are compared against that prediction.

Usage:
    python scripts/singularity_scan.py [--amplitudes 0.05,0.1,...,0.3]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from curveflow import (  # noqa: E402
    IntegratorControls,
    PowerSum,
    SupportSpectrum,
    integrate,
)

H_EQUALS_L = PowerSum(terms=((1.0, 1.0, 0.0),))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--amplitudes", default="0.05,0.1,0.15,0.2,0.25,0.3")
    args = parser.parse_args()
    amplitudes = [float(a) for a in args.amplitudes.split(",")]

    print(f"{'a2':>6} {'event':>12} {'t_detected':>12} {'t_analytic':>12} {'gap':>10}")
    for a2 in amplitudes:
        spec = SupportSpectrum(mean=1.0, cos_coeffs=[0.0, a2], sin_coeffs=[0.0, 0.0])
        traj = integrate(spec, H_EQUALS_L, IntegratorControls(t_max=10.0))
        analytic = np.log(3.0 * a2) / (4.0 - 2.0 * np.pi)
        detected = traj.event.t
        print(
            f"{a2:>6.3f} {traj.event.kind:>12} {detected:>12.6f} "
            f"{analytic:>12.6f} {abs(detected - analytic):>10.2e}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
