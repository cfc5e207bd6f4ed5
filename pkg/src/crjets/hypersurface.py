"""Hypersurface germs in normal form and their vanishing-pattern invariants.

A surface is stored through its complex defining series Q(z, x, t), where x
stands for the conjugated z-variable and t for the conjugated w-variable:
points satisfy w = Q(z, zbar, wbar).  Normal form means Q(z,0,t) = Q(0,x,t) = t,
and the reality identity Q(z, x, Qbar(x, z, w)) = w must hold.

All verdicts of the form "identically zero" are certified only through the
stored truncation order and every report records that order.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

from .rational import ComplexRational as CR
from .series import TruncatedSeries, UnknownOrder, implicit_solve

SURFACE_VARS = ("z", "x", "t")
GRAPH_VARS = ("z", "x", "s")


@dataclass(frozen=True)
class InfiniteUpTo:
    """No finite witness below the truncation: the value exceeds it or is infinite."""

    order: int


@dataclass(frozen=True)
class UnknownAbove:
    """Verdict not decidable from a truncation at this order."""

    order: int


class SurfaceError(Exception):
    pass


@dataclass(frozen=True)
class RealGraph:
    """Graph form Im w = phi(z, zbar, Re w), with x for zbar and s for Re w."""

    phi: TruncatedSeries

    def __post_init__(self):
        if self.phi.variables != GRAPH_VARS:
            raise SurfaceError(f"graph series must use variables {GRAPH_VARS}")

    @property
    def order(self) -> int:
        return self.phi.order

    def check(self) -> list[str]:
        """Violations of reality and of the normality identities."""
        problems = []
        swapped = self.phi.conjugate().rename_variables({"z": "x", "x": "z"})
        if swapped != self.phi:
            problems.append("phi is not real-valued (conjugate-swap mismatch)")
        if not self.phi.zero_out("x").is_zero:
            problems.append("phi(z, 0, s) does not vanish")
        if not self.phi.zero_out("z").is_zero:
            problems.append("phi(0, x, s) does not vanish")
        return problems


@dataclass(frozen=True)
class NormalityReport:
    violations: tuple
    order: int

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class RealityReport:
    residual: TruncatedSeries
    order: int

    @property
    def passed(self) -> bool:
        return self.residual.is_zero


@dataclass(frozen=True)
class InvariantReport:
    m0: object  # int | InfiniteUpTo
    alpha0: int | None
    mu0: int | None
    ell: int | None
    beta0: int | None
    finite_type: bool
    levi_flat: object  # False | UnknownAbove
    certified_order: int
    ell_below_alpha0: bool = False  # recorded as a warning, never an error

    def tuple(self):
        return (self.m0, self.alpha0, self.mu0, self.ell, self.beta0)


class NormalFormSurface:
    """A germ stored as its normal-form defining series Q(z, x, t)."""

    def __init__(self, q: TruncatedSeries):
        if q.variables != SURFACE_VARS:
            raise SurfaceError(f"surface series must use variables {SURFACE_VARS}")
        self.q = q
        self.order = q.order

    def __eq__(self, other):
        return isinstance(other, NormalFormSurface) and self.q == other.q

    def __repr__(self):
        return f"<surface order={self.order} Q={self.q}>"

    # ------------------------------------------------------------------

    def check_normal(self) -> NormalityReport:
        """Q(z,0,t) = t and Q(0,x,t) = t; lists every violating monomial."""
        t = TruncatedSeries.variable("t", SURFACE_VARS, self.order)
        violations = []
        for name, restricted in (("x", self.q.zero_out("x")), ("z", self.q.zero_out("z"))):
            residual = restricted - t
            for mi, c in residual.terms():
                violations.append((name, mi, c))
        return NormalityReport(tuple(violations), self.order)

    def check_reality(self) -> RealityReport:
        """Residual of Q(z, x, Qbar(x, z, w)) - w; zero iff the germ is real."""
        vars_w = ("z", "x", "w")
        zg = TruncatedSeries.variable("z", vars_w, self.order)
        xg = TruncatedSeries.variable("x", vars_w, self.order)
        wg = TruncatedSeries.variable("w", vars_w, self.order)
        inner = self.q.conjugate().compose({"z": xg, "x": zg, "t": wg})
        outer = self.q.compose({"z": zg, "x": xg, "t": inner})
        return RealityReport(outer - wg, self.order)

    def validate(self):
        normal = self.check_normal()
        reality = self.check_reality()
        if not normal.passed:
            raise SurfaceError(f"normal-form identities fail: {normal.violations[:3]}")
        if not reality.passed:
            raise SurfaceError("reality identity fails")

    # ------------------------------------------------------------------
    # derivative data along {z = 0, t = 0}

    def q_function(self, alpha: int, mu: int) -> TruncatedSeries:
        """Derivative d_z^alpha d_t^mu Q at (0, x, 0) as a series in x, alpha >= 1."""
        if alpha < 1:
            raise SurfaceError("q functions are defined for alpha >= 1 only")
        raw = self.q.extract({"z": alpha, "t": mu}, keep=("x",))
        return raw * (factorial(alpha) * factorial(mu))

    def q_table(self, max_m: int) -> dict[tuple[int, int], TruncatedSeries]:
        """All q functions with 1 <= alpha, alpha + mu <= max_m."""
        if max_m > self.order:
            raise SurfaceError("q_table beyond the certified order")
        table = {}
        for m in range(1, max_m + 1):
            for mu in range(0, m):
                table[(m - mu, mu)] = self.q_function(m - mu, mu)
        return table

    def r_function(self, beta: int) -> TruncatedSeries:
        """Coefficient series of z^beta at t = 0 in Q (Taylor-normalized)."""
        return self.q.extract({"z": beta, "t": 0}, keep=("x",))

    # ------------------------------------------------------------------

    def compute_invariants(self) -> InvariantReport:
        self.validate()
        n = self.order
        m0 = None
        alpha0 = mu0 = None
        for m in range(1, n + 1):
            for mu in range(0, m):  # ties resolved by minimal mu
                alpha = m - mu
                if not self.q_function(alpha, mu).is_zero:
                    m0, alpha0, mu0 = m, alpha, mu
                    break
            if m0 is not None:
                break

        ell = None
        if m0 is not None:
            v = self.q_function(alpha0, mu0).vanishing_order("x")
            ell = v if not isinstance(v, UnknownOrder) else None

        beta0 = None
        for beta in range(1, n + 1):
            if not self.r_function(beta).is_zero:
                beta0 = beta
                break

        if m0 is None:
            return InvariantReport(
                m0=InfiniteUpTo(n),
                alpha0=None,
                mu0=None,
                ell=None,
                beta0=beta0,
                finite_type=beta0 is not None,
                levi_flat=UnknownAbove(n),
                certified_order=n,
            )
        return InvariantReport(
            m0=m0,
            alpha0=alpha0,
            mu0=mu0,
            ell=ell,
            beta0=beta0,
            finite_type=beta0 is not None,
            levi_flat=False,
            certified_order=n,
            ell_below_alpha0=(ell is not None and ell < alpha0),
        )


def from_real_graph(graph: RealGraph) -> NormalFormSurface:
    """Complex defining series from the graph form.

    Solves w = wbar + 2i * phi(z, x, (w + wbar)/2) for w as a series in
    (z, x, t), t standing for wbar; the solution satisfies the normal-form
    and reality identities exactly at the stored order.
    """
    problems = graph.check()
    if problems:
        raise SurfaceError("; ".join(problems))
    n = graph.order
    solve_vars = ("z", "x", "t", "w")
    zg = TruncatedSeries.variable("z", solve_vars, n)
    xg = TruncatedSeries.variable("x", solve_vars, n)
    tg = TruncatedSeries.variable("t", solve_vars, n)
    wg = TruncatedSeries.variable("w", solve_vars, n)
    half = CR(1) / CR(2)
    substituted = graph.phi.compose({"z": zg, "x": xg, "s": (wg + tg) * half})
    rhs = tg + substituted * CR(0, 2)
    q = implicit_solve(rhs, "w")
    surface = NormalFormSurface(q)
    surface.validate()
    return surface


# ----------------------------------------------------------------------
# corpus models


def heisenberg(order: int = 12) -> NormalFormSurface:
    """Im w = |z|^2: the nondegenerate quadric."""
    return NormalFormSurface(
        TruncatedSeries(SURFACE_VARS, order, {(0, 0, 1): 1, (1, 1, 0): CR(0, 2)})
    )


def quartic_model(order: int = 12) -> NormalFormSurface:
    """Im w = |z|^4: finite type with a degenerate Levi form."""
    return NormalFormSurface(
        TruncatedSeries(SURFACE_VARS, order, {(0, 0, 1): 1, (2, 2, 0): CR(0, 2)})
    )


def infinite_type_model(order: int = 12) -> NormalFormSurface:
    """Q = t (1 + i z x) / (1 - i z x): contains the curve {w = 0}."""
    izx = TruncatedSeries(SURFACE_VARS, order, {(1, 1, 0): CR(0, 1)})
    t = TruncatedSeries.variable("t", SURFACE_VARS, order)
    return NormalFormSurface((t * (1 + izx)) / (1 - izx))


def levi_flat_model(order: int = 12) -> NormalFormSurface:
    """Im w = 0."""
    return NormalFormSurface(TruncatedSeries.variable("t", SURFACE_VARS, order))
