"""Resolution-of-identity and kernel-idempotence defects vs quadrature order."""

import argparse
import csv
import sys

from fockforge import DeformationSpec
from fockforge.measure import kernel_idempotence_check, quadrature_from_moments, verify_resolution_identity
from fockforge.states import CoherentParameter

P = CoherentParameter.plain


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--orders", type=int, nargs="+", default=[2, 4, 8, 12, 16, 20, 24])
    args = ap.parse_args(argv)

    cases = [
        ("identity", DeformationSpec.identity(256), [(P(1.0), P(0.8j)), (P(1.5 - 0.5j), P(-1.2))]),
        ("q=0.5", DeformationSpec.q_deformed(0.5, 256), [(P(0.9), P(0.6j)), (P(1.2j), P(-1.0 + 0.3j))]),
    ]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["deformation", "order", "dps", "resolution_defect", "idempotence_defect"])
    for name, spec, pairs in cases:
        for m in args.orders:
            quad = quadrature_from_moments(spec, m)
            res = verify_resolution_identity(spec, quad, 2 * m).max_defect
            idem = kernel_idempotence_check(spec, quad, pairs)
            w.writerow([name, m, quad.dps, repr(res), repr(idem)])


if __name__ == "__main__":
    main()
