"""Mapping-equation engine for germs between normal-form surfaces.

A germ H = (F, G) sends the source surface into the target surface exactly
when G(z, Q(z,x,t)) agrees with Q'(F(z, Q(z,x,t)), Fbar(x,t), Gbar(x,t)) as
a series in (z, x, t); ``verify_mapping`` computes that residual.

``segre_jet_reconstruct`` recovers the derivative series H_{w^k}(z, 0) along
the curve {w = 0} from nothing but the (k+1)-jet of H at the origin and the
two surfaces.  It runs the recursion order by order in the w-derivative:

* the conjugated F-series along {w = 0} comes first, from the minimal
  nonvanishing derivative identity: after an ell-th root factorization the
  branch constant is eliminated through the first-derivative relation, so
  the result does not depend on the chosen branch (exact arithmetic when
  ell = 1, float principal branches otherwise);
* each conjugated G-derivative solves a coefficient equation in which it
  appears with unit coefficient;
* each conjugated F-derivative appears multiplied by a series vanishing to
  some order nu; the equation's known side must vanish to order nu as well
  (otherwise the jet is not realizable and DivisibilityObstruction reports
  it), after which the quotient is exact.

Jet coefficients of order beyond the supplied jet never enter: the single
top coefficient that would is eliminated by evaluating the equation at the
origin, which is also where inconsistent jets are detected.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

from .hypersurface import InfiniteUpTo, NormalFormSurface
from .rational import ComplexRational as CR
from .series import (
    TruncatedSeries,
    UnknownOrder,
    kth_root,
    max_coefficient_difference,
    solve_composition,
    to_float,
)

MAP_VARS = ("z", "w")


class MapError(Exception):
    pass


class JetArityError(MapError):
    pass


class LeviFlatInput(MapError):
    pass


class InconsistentJet(MapError):
    pass


class DivisibilityObstruction(MapError):
    """The jet is not realizable by any map between the two surfaces."""


class PreconditionError(MapError):
    pass


# ----------------------------------------------------------------------
# germs and jets


class MapGerm:
    """Holomorphic germ H = (F, G) at the origin of C^2."""

    def __init__(self, f: TruncatedSeries, g: TruncatedSeries):
        if f.variables != MAP_VARS or g.variables != MAP_VARS:
            raise MapError(f"map components must use variables {MAP_VARS}")
        if not f.constant_term().is_zero or not g.constant_term().is_zero:
            raise MapError("map must fix the origin")
        order = min(f.order, g.order)
        self.f = f.truncate(order)
        self.g = g.truncate(order)
        self.order = order

    def __eq__(self, other):
        return isinstance(other, MapGerm) and self.f == other.f and self.g == other.g

    def __repr__(self):
        return f"<map order={self.order} F={self.f} G={self.g}>"

    def jet(self, k: int) -> "MapJet":
        if k > self.order:
            raise JetArityError(f"jet order {k} exceeds stored order {self.order}")
        lam, mu = {}, {}
        for table, comp in ((lam, self.f), (mu, self.g)):
            for (i, j), c in comp.coefficients.items():
                if 1 <= i + j <= k:
                    table[(i, j)] = c * (factorial(i) * factorial(j))
        return MapJet(k, lam, mu)

    def compose(self, inner: "MapGerm") -> "MapGerm":
        subs = {"z": inner.f, "w": inner.g}
        return MapGerm(self.f.compose(subs), self.g.compose(subs))

    def inverse(self) -> "MapGerm":
        a = self.f.coefficient((1, 0))
        b = self.f.coefficient((0, 1))
        c = self.g.coefficient((1, 0))
        d = self.g.coefficient((0, 1))
        det = a * d - b * c
        if det.is_zero:
            raise MapError("linear part is singular")
        zg = TruncatedSeries.variable("z", MAP_VARS, self.order)
        wg = TruncatedSeries.variable("w", MAP_VARS, self.order)
        nf = self.f - (zg * a + wg * b)
        ng = self.g - (zg * c + wg * d)

        def linear_solve(p, q):
            inv_det = CR(1) / det
            return ((p * d - q * b) * inv_det, (q * a - p * c) * inv_det)

        hf, hg = linear_solve(zg, wg)
        for _ in range(self.order + 1):
            rf = zg - nf.compose({"z": hf, "w": hg})
            rg = wg - ng.compose({"z": hf, "w": hg})
            nf_, ng_ = linear_solve(rf, rg)
            if nf_ == hf and ng_ == hg:
                break
            hf, hg = nf_, ng_
        inv = MapGerm(hf, hg)
        probe = self.compose(inv)
        if probe.f != zg or probe.g != wg:
            raise MapError("inverse iteration failed to close")
        return inv

    def on_axis(self) -> tuple[TruncatedSeries, TruncatedSeries]:
        """The restriction H(z, 0) as univariate series in z."""
        return (
            self.f.extract({"w": 0}, keep=("z",)),
            self.g.extract({"w": 0}, keep=("z",)),
        )


class MapJet:
    """Jet table at the origin, derivative-normalized entries.

    lam[(i, j)] is the (i, j) derivative of F at 0, mu likewise for G, for
    1 <= i + j <= k.  Triangularity (G_z(0) = 0) and invertibility of the
    linear part (F_z(0) G_w(0) != 0) are construction invariants.
    """

    def __init__(self, k: int, lam: dict, mu: dict):
        if k < 1:
            raise JetArityError("a map jet has order at least 1")
        self.k = k
        self.lam = {ij: CR.coerce(c) for ij, c in lam.items() if 1 <= sum(ij) <= k}
        self.mu = {ij: CR.coerce(c) for ij, c in mu.items() if 1 <= sum(ij) <= k}
        if not self.mu.get((1, 0), CR(0)).is_zero:
            raise MapError("jet violates triangularity: G_z(0) != 0")
        if (self.lam.get((1, 0), CR(0)) * self.mu.get((0, 1), CR(0))).is_zero:
            raise MapError("jet is not invertible: F_z(0) G_w(0) = 0")

    def entry(self, table: str, i: int, j: int) -> CR:
        src = self.lam if table == "lam" else self.mu
        return src.get((i, j), CR(0))

    def up_to(self, k: int) -> tuple:
        lam = tuple(
            sorted((ij, c) for ij, c in self.lam.items() if sum(ij) <= k and not c.is_zero)
        )
        mu = tuple(
            sorted((ij, c) for ij, c in self.mu.items() if sum(ij) <= k and not c.is_zero)
        )
        return lam, mu

    def __eq__(self, other):
        if not isinstance(other, MapJet):
            return NotImplemented
        return self.k == other.k and self.up_to(self.k) == other.up_to(other.k)


@dataclass(frozen=True)
class SegreJetResult:
    """Derivative series H_{w^k}(z, 0) with its provenance."""

    k: int
    f_wk: TruncatedSeries
    g_wk: TruncatedSeries
    provenance: str


# ----------------------------------------------------------------------
# factories


def identity_map(order: int = 12) -> MapGerm:
    return MapGerm(
        TruncatedSeries.variable("z", MAP_VARS, order),
        TruncatedSeries.variable("w", MAP_VARS, order),
    )


def dilation(lam, rho, order: int = 12) -> MapGerm:
    zg = TruncatedSeries.variable("z", MAP_VARS, order)
    wg = TruncatedSeries.variable("w", MAP_VARS, order)
    return MapGerm(zg * CR.coerce(lam), wg * CR.coerce(rho))


def w_mobius(a, order: int = 12) -> MapGerm:
    """(z, w) -> (z, w) / (1 - a w); sends the quadric model into itself."""
    zg = TruncatedSeries.variable("z", MAP_VARS, order)
    wg = TruncatedSeries.variable("w", MAP_VARS, order)
    denom = 1 - wg * CR.coerce(a)
    return MapGerm(zg / denom, wg / denom)


# ----------------------------------------------------------------------
# the mapping identity


def verify_mapping(
    source: NormalFormSurface, target: NormalFormSurface, h: MapGerm
) -> TruncatedSeries:
    """Residual of the mapping identity; zero through the order iff H maps
    source into target to that order."""
    order = min(source.order, target.order, h.order)
    vars3 = ("z", "x", "t")
    zg = TruncatedSeries.variable("z", vars3, order)
    xg = TruncatedSeries.variable("x", vars3, order)
    tg = TruncatedSeries.variable("t", vars3, order)
    q = source.q.truncate(order)
    f_on_m = h.f.compose({"z": zg, "w": q})
    g_on_m = h.g.compose({"z": zg, "w": q})
    fbar = h.f.conjugate().lift(vars3, {"z": "x", "w": "t"}).truncate(order)
    gbar = h.g.conjugate().lift(vars3, {"z": "x", "w": "t"}).truncate(order)
    rhs = target.q.truncate(order).compose({"z": f_on_m, "x": fbar, "t": gbar})
    return g_on_m - rhs


@dataclass(frozen=True)
class NormalPreservationReport:
    g_vanishes_on_axis: bool
    triangular: bool
    local_biholomorphism: bool
    g_w_real: bool
    mapping_verified: bool

    @property
    def passed(self) -> bool:
        base = self.g_vanishes_on_axis and self.triangular and self.local_biholomorphism
        if self.mapping_verified:
            return base and self.g_w_real
        return base


def normal_preservation_checks(h: MapGerm, mapping_verified: bool = False):
    g_axis = h.g.zero_out("w")
    mu10 = h.g.coefficient((1, 0))
    lam10 = h.f.coefficient((1, 0))
    mu01 = h.g.coefficient((0, 1))
    return NormalPreservationReport(
        g_vanishes_on_axis=g_axis.is_zero,
        triangular=mu10.is_zero,
        local_biholomorphism=not (lam10 * mu01).is_zero,
        g_w_real=mu01.is_real,
        mapping_verified=mapping_verified,
    )


def segre_restriction_direct(h: MapGerm, k: int) -> SegreJetResult:
    """Oracle side: H_{w^k}(z, 0) read off the stored series."""
    if k > h.order:
        raise JetArityError(f"derivative order {k} exceeds stored order {h.order}")
    fac = factorial(k)
    return SegreJetResult(
        k,
        h.f.extract({"w": k}, keep=("z",)) * fac,
        h.g.extract({"w": k}, keep=("z",)) * fac,
        "direct",
    )


# ----------------------------------------------------------------------
# reconstruction from the origin jet


class _Reconstruction:
    def __init__(self, source, target, jet, k, tolerance, force_float=False):
        self.tolerance = tolerance
        inv = source.compute_invariants()
        inv2 = target.compute_invariants()
        if isinstance(inv.m0, InfiniteUpTo) or isinstance(inv2.m0, InfiniteUpTo):
            raise LeviFlatInput(
                f"no nonvanishing derivative data through order "
                f"{min(source.order, target.order)}"
            )
        if (inv.m0, inv.alpha0, inv.mu0, inv.ell) != (
            inv2.m0,
            inv2.alpha0,
            inv2.mu0,
            inv2.ell,
        ):
            raise InconsistentJet(
                "source and target disagree on the vanishing invariants: "
                f"{(inv.m0, inv.alpha0, inv.mu0, inv.ell)} vs "
                f"{(inv2.m0, inv2.alpha0, inv2.mu0, inv2.ell)}"
            )
        self.m0, self.alpha0, self.mu0, self.ell = inv.m0, inv.alpha0, inv.mu0, inv.ell
        self.k = k
        self.jet = jet
        self.exact = self.ell == 1 and not force_float
        self.work = min(source.order, target.order)
        self.series_tol = None if self.exact else 1e-13
        if self.exact:
            self.q_src = source.q
            self.q_tgt = target.q
        else:
            self.q_src = to_float(source.q, self.series_tol)
            self.q_tgt = to_float(target.q, self.series_tol)
        self.q_fn_src = self._backendize(source.q_function(self.alpha0, self.mu0))
        self.q_fn_tgt = self._backendize(target.q_function(self.alpha0, self.mu0))
        self.q10_src = self._backendize(source.q_function(1, 0))
        # order-m0 entry of G must vanish for any map between these surfaces
        if self.alpha0 + self.mu0 <= jet.k:
            if not jet.entry("mu", self.alpha0, self.mu0).is_zero:
                raise InconsistentJet(
                    f"G derivative ({self.alpha0},{self.mu0}) must vanish"
                )
        self.us: list[TruncatedSeries] = []
        self.vs: list[TruncatedSeries] = []

    # -- backend helpers ------------------------------------------------

    def _backendize(self, series):
        return series if self.exact else to_float(series, self.series_tol)

    def scal(self, value: CR):
        return value if self.exact else value.to_complex()

    def _is_small(self, value) -> bool:
        if self.exact:
            return value.is_zero
        return abs(value) <= self.tolerance

    def lam_taylor(self, i, j):
        return self.scal(self.jet.entry("lam", i, j)) / (factorial(i) * factorial(j))

    def mu_taylor(self, i, j):
        return self.scal(self.jet.entry("mu", i, j)) / (factorial(i) * factorial(j))

    # -- step 0: F along the axis ---------------------------------------

    def solve_axis_f(self) -> TruncatedSeries:
        ell = self.ell
        root_s = self.q_fn_src if ell == 1 else kth_root(self.q_fn_src, ell)
        root_t = self.q_fn_tgt if ell == 1 else kth_root(self.q_fn_tgt, ell)
        lin_s = root_s.coefficient((1,))
        lin_t = root_t.coefficient((1,))
        lam10 = self.jet.entry("lam", 1, 0)
        branch_const = lin_t * self.scal(lam10.conjugate()) / lin_s
        if self.m0 == 1:
            lam01 = self.jet.entry("lam", 0, 1)
            ratio = self.scal(lam01 / lam10)
            unit = (1 + self.q10_src * ratio).inverse()
            gauge = unit if ell == 1 else kth_root(unit, ell)
            rhs = root_s * gauge * branch_const
        else:
            rhs = root_s * branch_const
        return solve_composition(root_t, rhs)

    # -- embeddings ------------------------------------------------------

    def _stack(self, entries, variables, t_index):
        """sum_r entries[r] * t^r inside the given variable space."""
        acc = TruncatedSeries.zero(variables, self.work, self.series_tol)
        for r, series in enumerate(entries):
            if series is None or series.is_zero:
                continue
            shift = tuple(r if i == t_index else 0 for i in range(len(variables)))
            acc = acc + series.lift(variables).shift_up(shift)
        return acc

    # -- conjugated G derivatives ----------------------------------------

    def solve_v(self, t: int) -> TruncatedSeries:
        variables = ("x", "t")
        a_coeffs = {
            (0, j): self.lam_taylor(0, j)
            for j in range(1, min(t, self.jet.k) + 1)
        }
        a_fn = TruncatedSeries(variables, self.work, a_coeffs, self.series_tol)
        u_fn = self._stack(self.us, variables, t_index=1)
        v_fn = self._stack(self.vs, variables, t_index=1)
        composed = self.q_tgt.compose({"z": a_fn, "x": u_fn, "t": v_fn})
        rhs = composed.extract({"t": t}, keep=("x",))
        lhs = TruncatedSeries.constant(
            self.mu_taylor(0, t), ("x",), rhs.order, self.series_tol
        )
        return lhs - rhs

    # -- conjugated F derivatives ----------------------------------------

    def solve_u(self, s: int) -> TruncatedSeries:
        variables = ("z", "x", "t")
        zg = TruncatedSeries.variable("z", variables, self.work, self.series_tol)
        q = self.q_src
        g_hat = TruncatedSeries(
            MAP_VARS,
            self.work,
            {
                (i, j): self.mu_taylor(i, j)
                for i in range(0, self.jet.k + 1)
                for j in range(0, self.jet.k + 1 - i)
                if i + j >= 1
            },
            self.series_tol,
        )
        f_hat = TruncatedSeries(
            MAP_VARS,
            self.work,
            {
                (i, j): self.lam_taylor(i, j)
                for i in range(0, self.jet.k + 1)
                for j in range(0, self.jet.k + 1 - i)
                if i + j >= 1
            },
            self.series_tol,
        )
        slot = {"z": self.alpha0, "t": self.mu0 + s}
        w_lhs = g_hat.compose({"z": zg, "w": q}).extract(slot, keep=("x",))
        f_comp = f_hat.compose({"z": zg, "w": q})
        v_fn = self._stack(self.vs, variables, t_index=2)

        def rhs_with(u_s):
            u_fn = self._stack(self.us + [u_s], variables, t_index=2)
            composed = self.q_tgt.compose({"z": f_comp, "x": u_fn, "t": v_fn})
            return composed.extract(slot, keep=("x",))

        zero_u = TruncatedSeries.zero(("x",), self.work, self.series_tol)
        one_u = TruncatedSeries.constant(
            self.scal(CR(1)), ("x",), self.work, self.series_tol
        )
        r0 = rhs_with(zero_u)
        r1 = rhs_with(one_u)
        gain = r1 - r0
        if gain.is_zero:
            raise DivisibilityObstruction(
                f"coefficient of the order-{s} unknown vanishes to working order"
            )
        ubar = self.scal(self.jet.entry("lam", 0, s).conjugate()) / factorial(s)
        known = w_lhs - r0
        if self.m0 + s <= self.jet.k:
            top = self._zero_scalar()
        else:
            # the jet does not carry the top coefficient; pin it at the origin
            top = r0.coefficient((0,)) + gain.coefficient((0,)) * ubar - w_lhs.coefficient((0,))
        dividend = known + top
        nu = gain.vanishing_order()
        if isinstance(nu, UnknownOrder):
            raise DivisibilityObstruction("unknown coefficient order at truncation")
        low = {
            mi: c for mi, c in dividend.coefficients.items() if mi[0] < nu
        }
        for mi, c in low.items():
            if not self._is_small(c):
                raise DivisibilityObstruction(
                    f"known side has order-{mi[0]} content below the required "
                    f"vanishing order {nu}: jet not realizable"
                )
        trimmed = TruncatedSeries(
            ("x",),
            dividend.order,
            {mi: c for mi, c in dividend.coefficients.items() if mi[0] >= nu},
            self.series_tol,
        )
        u_s = trimmed / gain
        u_s0 = u_s.coefficient((0,))
        if not self._is_small(u_s0 - ubar):
            raise InconsistentJet(
                f"order-{s} value at the origin disagrees with the supplied jet"
            )
        return u_s

    def _zero_scalar(self):
        return CR(0) if self.exact else 0j

    # -- driver -----------------------------------------------------------

    def run(self) -> SegreJetResult:
        self.us.append(self.solve_axis_f())
        self.vs.append(TruncatedSeries.zero(("x",), self.work, self.series_tol))
        ahead = 1 if self.mu0 >= 1 else 0
        for s in range(1, self.k + 1):
            while len(self.vs) <= s + ahead:
                self.vs.append(self.solve_v(len(self.vs)))
            self.us.append(self.solve_u(s))
        k = self.k
        f_wk = self.us[k].conjugate().with_variables(("z",)) * factorial(k)
        if k == 0:
            g_wk = TruncatedSeries.zero(("z",), self.work, self.series_tol)
        else:
            while len(self.vs) <= k:
                self.vs.append(self.solve_v(len(self.vs)))
            g_wk = self.vs[k].conjugate().with_variables(("z",)) * factorial(k)
        return SegreJetResult(k, f_wk, g_wk, "reconstructed")


def segre_jet_reconstruct(
    source: NormalFormSurface,
    target: NormalFormSurface,
    jet: MapJet,
    k: int,
    tolerance: float = 1e-9,
    force_float: bool = False,
) -> SegreJetResult:
    """Recover H_{w^k}(z, 0) from the (k+1)-jet of H at the origin.

    Exact on the rational backend when no root extraction is needed
    (ell = 1); otherwise runs on floats with principal branches, with
    ``tolerance`` governing the realizability checks.
    """
    if k < 0:
        raise JetArityError("derivative order must be nonnegative")
    if jet.k < k + 1:
        raise JetArityError(
            f"reconstructing order {k} consumes a jet of order {k + 1}, got {jet.k}"
        )
    return _Reconstruction(source, target, jet, k, tolerance, force_float).run()


# ----------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class InvarianceReport:
    residual_zero: bool
    invariants_match: bool
    mismatches: tuple
    beta_identity_holds: bool | None

    @property
    def passed(self) -> bool:
        return (
            self.residual_zero
            and self.invariants_match
            and self.beta_identity_holds is not False
        )


def invariance_check(
    source: NormalFormSurface, target: NormalFormSurface, h: MapGerm
) -> InvarianceReport:
    residual = verify_mapping(source, target, h)
    inv = source.compute_invariants()
    inv2 = target.compute_invariants()
    mismatches = []
    for name in ("m0", "alpha0", "mu0", "ell", "beta0"):
        a, b = getattr(inv, name), getattr(inv2, name)
        if a != b:
            mismatches.append((name, a, b))
    beta_identity = None
    if residual.is_zero and not mismatches and inv.beta0 is not None:
        beta0 = inv.beta0
        lam10 = h.f.coefficient((1, 0))
        lam01 = h.f.coefficient((0, 1))
        mu01 = h.g.coefficient((0, 1))
        fbar_axis = (
            h.f.extract({"w": 0}, keep=("z",)).conjugate().with_variables(("x",))
        )
        r_src = source.r_function(beta0)
        r_tgt = target.r_function(beta0)
        r1 = source.r_function(1)
        chain = r1 * lam01 + lam10
        lhs = r_src * mu01
        rhs = r_tgt.compose({"x": fbar_axis}) * chain.pow(beta0)
        order = min(lhs.order, rhs.order)
        beta_identity = lhs.truncate(order) == rhs.truncate(order)
    return InvarianceReport(
        residual_zero=residual.is_zero,
        invariants_match=not mismatches,
        mismatches=tuple(mismatches),
        beta_identity_holds=beta_identity,
    )


@dataclass(frozen=True)
class DeterminationVerdict:
    jet_order: int
    jets_agree: bool
    maps_agree: bool | None
    first_difference: tuple | None

    @property
    def vacuous(self) -> bool:
        return not self.jets_agree

    @property
    def passed(self) -> bool:
        return self.vacuous or bool(self.maps_agree)


def determination_experiment(
    surface: NormalFormSurface, h1: MapGerm, h2: MapGerm, k: int
) -> DeterminationVerdict:
    """Same k-jet forces the same germ (through the stored order)."""
    for h in (h1, h2):
        if not verify_mapping(surface, surface, h).is_zero:
            raise PreconditionError("map does not preserve the surface")
    jets_agree = h1.jet(k) == h2.jet(k)
    if not jets_agree:
        return DeterminationVerdict(k, False, None, None)
    diff_f = h1.f - h2.f
    diff_g = h1.g - h2.g
    witness = None
    for name, diff in (("F", diff_f), ("G", diff_g)):
        for mi, c in diff.terms():
            entry = (name, mi, c)
            if witness is None or (sum(mi), mi) < (sum(witness[1]), witness[1]):
                witness = entry
            break
    return DeterminationVerdict(k, True, witness is None, witness)


@dataclass(frozen=True)
class DynamicsVerdict:
    reconstructed_fixes_axis: bool
    stored_fixes_axis: bool

    @property
    def passed(self) -> bool:
        return self.reconstructed_fixes_axis and self.stored_fixes_axis


def dynamics_check(surface: NormalFormSurface, h: MapGerm) -> DynamicsVerdict:
    """A self-map tangent to the identity fixes the curve {w = 0} pointwise."""
    if not verify_mapping(surface, surface, h).is_zero:
        raise PreconditionError("map does not preserve the surface")
    jet1 = h.jet(1)
    tangent = (
        jet1.entry("lam", 1, 0) == CR(1)
        and jet1.entry("lam", 0, 1).is_zero
        and jet1.entry("mu", 0, 1) == CR(1)
    )
    if not tangent:
        raise PreconditionError("map is not tangent to the identity")
    inv = surface.compute_invariants()
    if isinstance(inv.m0, InfiniteUpTo):
        raise PreconditionError("surface has no nonvanishing derivative data")
    recon = segre_jet_reconstruct(surface, surface, h.jet(1), 0)
    zg = TruncatedSeries.variable("z", ("z",), recon.f_wk.order)
    if recon.f_wk.is_exact:
        recon_ok = recon.f_wk == zg and recon.g_wk.is_zero
    else:
        recon_ok = (
            max_coefficient_difference(recon.f_wk, zg) < 1e-9 and recon.g_wk.is_zero
        )
    f_axis, g_axis = h.on_axis()
    zg_full = TruncatedSeries.variable("z", ("z",), f_axis.order)
    stored_ok = f_axis == zg_full and g_axis.is_zero
    return DynamicsVerdict(recon_ok, stored_ok)
