#!/usr/bin/env python3
"""Scan the corpus: reconstruct H_{w^k}(z, 0) from origin jets and compare
against the stored maps for every k up to a bound."""

import argparse
import pathlib
import sys
from fractions import Fraction

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from crjets.hypersurface import heisenberg, infinite_type_model, quartic_model
from crjets.mapjets import (
    dilation,
    segre_jet_reconstruct,
    segre_restriction_direct,
    verify_mapping,
    w_mobius,
)
from crjets.rational import ComplexRational as CR
from crjets.series import max_coefficient_difference


def cases(order):
    heis = heisenberg(order)
    for a in (Fraction(1), Fraction(1, 2), Fraction(-2)):
        yield "quadric", heis, w_mobius(a, order)
    yield "quadric", heis, dilation(Fraction(2), Fraction(4), order)
    quartic = quartic_model(order)
    for lam in (Fraction(2), Fraction(1, 2)):
        yield "quartic", quartic, dilation(lam, lam**4, order)
    horn = infinite_type_model(order)
    yield "infinite-type", horn, dilation(CR(0, 1), Fraction(1), order)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--order", type=int, default=12)
    parser.add_argument("--k-max", type=int, default=4)
    args = parser.parse_args()

    failures = 0
    for label, surface, germ in cases(args.order):
        assert verify_mapping(surface, surface, germ).is_zero
        for k in range(args.k_max + 1):
            recon = segre_jet_reconstruct(surface, surface, germ.jet(k + 1), k)
            direct = segre_restriction_direct(germ, k)
            if recon.f_wk.is_exact:
                o_f = min(recon.f_wk.order, direct.f_wk.order)
                o_g = min(recon.g_wk.order, direct.g_wk.order)
                ok = recon.f_wk.truncate(o_f) == direct.f_wk.truncate(
                    o_f
                ) and recon.g_wk.truncate(o_g) == direct.g_wk.truncate(o_g)
                detail = "exact"
            else:
                diff = max(
                    max_coefficient_difference(recon.f_wk, direct.f_wk),
                    max_coefficient_difference(recon.g_wk, direct.g_wk),
                )
                ok = diff < 1e-9
                detail = f"max diff {diff:.2e}"
            status = "ok" if ok else "MISMATCH"
            failures += 0 if ok else 1
            print(f"{label:14s} k={k}  {status}  ({detail})")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
