"""Gram defect of the displacement exp((g/omega)(a f - f^-1 a^dag)) vs coupling.

For f = 1 the generator is anti-Hermitian and the defect stays at rounding
level; for other f it grows with g, which is why the spectrum task gates its
comparison on this number.
"""

import argparse
import csv
import sys

import numpy as np

from fockforge import DeformationSpec
from fockforge.fock_ops import ModeParams, bk_operator


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=32)
    ap.add_argument("--g", type=float, nargs="+", default=list(np.round(np.linspace(0, 0.5, 6), 3)))
    args = ap.parse_args(argv)

    specs = [("identity", DeformationSpec.identity(256)), ("q=0.9", DeformationSpec.q_deformed(0.9, 256)),
             ("q=0.5", DeformationSpec.q_deformed(0.5, 256))]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["deformation", "g", "gram_defect", "spectrum_defect"])
    for name, spec in specs:
        for g in args.g:
            params = ModeParams(1.0, eps=(0.0,), g=(g,), k_config=(1,))
            bk = bk_operator(spec, args.n_max, params)
            w.writerow([name, g, repr(bk.gram_defect), repr(bk.leading_block_defect())])


if __name__ == "__main__":
    main()
