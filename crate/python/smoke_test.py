#!/usr/bin/env python3
"""Build the pybhsim extension module and exercise its core surface.

Usage: python3 python/smoke_test.py [--skip-build]

Builds the cdylib with cargo, copies it into a temporary directory under
the importable name, and runs a handful of physics checks end to end.
Exits nonzero on the first failure.
"""

import argparse
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build():
    subprocess.run(
        [
            "cargo",
            "build",
            "--release",
            "-p",
            "pybhsim",
            "--features",
            "extension-module",
        ],
        cwd=REPO,
        check=True,
    )


def import_module(tmp):
    built = REPO / "target" / "release" / "libpybhsim.so"
    if not built.exists():
        sys.exit(f"missing {built}; run without --skip-build")
    target = Path(tmp) / "pybhsim.so"
    shutil.copy2(built, target)
    sys.path.insert(0, str(tmp))
    import pybhsim

    return pybhsim


CHECKS = []


def check(label, condition, detail=""):
    status = "PASS" if condition else "FAIL"
    print(f"{status}: {label}" + (f" ({detail})" if detail else ""))
    CHECKS.append(condition)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--skip-build", action="store_true")
    args = parser.parse_args()
    if not args.skip_build:
        build()

    with tempfile.TemporaryDirectory() as tmp:
        bh = import_module(tmp)

        # basis bookkeeping
        check("dimension(21, 4) == 2024", bh.dimension(21, 4) == 2024)
        basis = bh.Basis(5, 3)
        roundtrip = all(
            basis.rank(basis.unrank(i)) == i for i in range(basis.dimension)
        )
        check("rank/unrank roundtrip on (5, 3)", roundtrip)
        moved, amp = bh.hop([2, 0], 0, 1)
        check(
            "hop amplitude sqrt(2)",
            moved == [1, 1] and abs(amp - math.sqrt(2)) < 1e-15,
        )

        # mean-field seed: three-well ground state at g = 1
        trimer = bh.LatticeSpec.chain(1.0, 3)
        mf = bh.solve_ground_state(trimer, 1.0, 0.5)
        c = [z.real for z in mf.coefficients]
        check(
            "three-well ground state coefficients",
            abs(c[0] - 0.3604) < 5e-4 and abs(c[1] - 0.4902) < 5e-4,
            f"c = ({c[0]:.4f}, {c[1]:.4f}, {c[2]:.4f})",
        )
        check(
            "stationary residual below 1e-12",
            bh.gpe_residual(mf, trimer, 1.0) < 1e-12,
        )

        # two independent condensates on a four-well chain, no interaction
        spec = bh.LatticeSpec.chain(2.0, 4)
        dimer_mode = [complex(math.sqrt(0.5)), complex(math.sqrt(0.5))]
        left = bh.condensate_state(dimer_mode, 3)
        right = bh.condensate_state(dimer_mode, 1)
        psi0 = bh.product_state(left, right)
        check("product state is normalized", abs(psi0.norm() - 1.0) < 1e-12)
        check(
            "subsystem purity starts at 1",
            abs(bh.purity(bh.spdm(psi0, [0, 1])) - 1.0) < 1e-10,
        )

        series = bh.evolve(spec, psi0, t_final=2.0, dt=1e-3, sample_every=100)
        norms = series.norms()
        check(
            "norm conserved through propagation",
            max(abs(n - 1.0) for n in norms) < 1e-9,
            f"max drift {max(abs(n - 1.0) for n in norms):.2e}",
        )

        p_tot0 = bh.purity(series.spdm_at(0, [0, 1, 2, 3]))
        worst_ptot = 0.0
        worst_identity = 0.0
        for i in range(len(series)):
            full = series.spdm_at(i, [0, 1, 2, 3])
            worst_ptot = max(worst_ptot, abs(bh.purity(full) - p_tot0))
            nu = bh.contrast(full, 0, 1)
            pjk = bh.two_site_purity(full, 0, 1)
            ijk = bh.imbalance(full, 0, 1)
            worst_identity = max(worst_identity, abs(nu * nu - (pjk - ijk)))
        check(
            "total purity constant at g = 0",
            worst_ptot < 1e-10,
            f"max deviation {worst_ptot:.2e}",
        )
        check(
            "contrast identity nu^2 = P - I",
            worst_identity < 1e-12,
            f"max deviation {worst_identity:.2e}",
        )

        fillings = series.fillings()
        total = [sum(site[i] for site in fillings) for i in range(len(series))]
        check(
            "particle number conserved",
            max(abs(v - 4.0) for v in total) < 1e-12,
        )

    failed = CHECKS.count(False)
    print(f"{len(CHECKS) - failed}/{len(CHECKS)} checks passed")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
