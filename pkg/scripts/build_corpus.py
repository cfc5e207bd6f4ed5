#!/usr/bin/env python3
"""Regenerate the corpus documents under corpus/ from the model factories."""

import pathlib
import sys
from fractions import Fraction

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from crjets.dsl import Document
from crjets.hypersurface import (
    heisenberg,
    infinite_type_model,
    levi_flat_model,
    quartic_model,
)
from crjets.mapjets import dilation, identity_map, w_mobius
from crjets.rational import ComplexRational as CR

ORDER = 12
ROOT = pathlib.Path(__file__).resolve().parents[1] / "corpus"


def surface_doc(surface) -> str:
    body = {"vars": ("z", "x", "t"), "order": surface.order, "Q": surface.q}
    return Document("surface", body).print()


def map_doc(germ) -> str:
    body = {"vars": ("z", "w"), "order": germ.order, "F": germ.f, "G": germ.g}
    return Document("map", body).print()


def main():
    ROOT.mkdir(exist_ok=True)
    files = {
        "heisenberg.surf": surface_doc(heisenberg(ORDER)),
        "z4.surf": surface_doc(quartic_model(ORDER)),
        "infinite_type.surf": surface_doc(infinite_type_model(ORDER)),
        "leviflat.surf": surface_doc(levi_flat_model(ORDER)),
        "identity.map": map_doc(identity_map(ORDER)),
        "h_mobius_1.map": map_doc(w_mobius(Fraction(1), ORDER)),
        "h_mobius_half.map": map_doc(w_mobius(Fraction(1, 2), ORDER)),
        "h_mobius_neg2.map": map_doc(w_mobius(Fraction(-2), ORDER)),
        "dilation_heis.map": map_doc(dilation(Fraction(2), Fraction(4), ORDER)),
        "rotation_heis.map": map_doc(
            dilation(CR(Fraction(3, 5), Fraction(4, 5)), Fraction(1), ORDER)
        ),
        "dilation_z4.map": map_doc(dilation(Fraction(2), Fraction(16), ORDER)),
        "res2.ode": (
            "kind: ode\ngamma: 0\nvars: x y\norder: 28\np: 2*y\nq: 1\n"
        ),
        "gamma1.ode": (
            "kind: ode\ngamma: 1\nvars: x y\norder: 28\np: y\nq: 1\n"
        ),
        "zero_rhs.ode": (
            "kind: ode\ngamma: 1\nvars: x y\norder: 28\np: 0\nq: 1\n"
        ),
    }
    for name, text in files.items():
        path = ROOT / name
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
