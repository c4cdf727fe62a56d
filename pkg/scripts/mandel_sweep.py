"""Mandel parameter and position dispersion of q-deformed coherent states vs |z|^2.

Prints a CSV table; the closed forms -(1-q)x and (1-(1-q)x)/2 are listed alongside.
"""

import argparse
import csv
import math
import sys

import numpy as np

from fockforge import DeformationSpec
from fockforge.quantize import dispersions, mandel
from fockforge.states import CoherentParameter, build_ncs, required_dimension


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=float, nargs="+", default=[0.3, 0.5, 0.9])
    ap.add_argument("--points", type=int, default=12)
    args = ap.parse_args(argv)

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["q", "abs_z_squared", "mandel_Q", "closed_form_Q", "dQ2", "closed_form_dQ2"])
    for q in args.q:
        spec = DeformationSpec.q_deformed(q, 256)
        x_max = (0.9 * spec.radius_primal.value) ** 2
        for x in np.linspace(0.0, x_max, args.points):
            p = CoherentParameter.plain(math.sqrt(x))
            s = build_ncs(spec, max(8, required_dimension(spec, p, tol=1e-14)), p)
            m = mandel(spec, s).Q_mandel
            d = dispersions(spec, s).dQ2 if x > 0 else 0.5
            w.writerow([q, repr(float(x)), repr(m), repr(float(-(1 - q) * x)), repr(d), repr(float((1 - (1 - q) * x) / 2))])


if __name__ == "__main__":
    main()
