"""Formal power-series solutions of x^(gamma+1) y' = p(x, y)/q(x, y).

Coefficients are matched order by order after clearing the denominator:
the x^m coefficient of q(x,y) x^(gamma+1) y' - p(x,y) couples the frontier
unknown vectors a_{m-gamma} and a_m linearly, with everything lower-order
entering polynomially.  Unknown coefficients are tracked as affine forms in
deferred scalar symbols and the accumulated equations are row-reduced
incrementally, so a coefficient skipped at its own order (a resonance, or a
singular frontier block) is revisited automatically when later equations
constrain it.  Coefficients that no equation ever pins are reported free.

Products of two still-deferred symbols would leave the linear regime; such
an equation is recorded as opaque and not used.  The linear test corpus
never produces one.

Coefficients are stored Taylor-normalized (a_s = y^(s)(0)/s!), which keeps
the integers small and absorbs the binomial bookkeeping of the derivative
formulation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from . import linalg
from .rational import ComplexRational as CR
from .series import TruncatedSeries


class OdeError(Exception):
    pass


class WrongGamma(OdeError):
    pass


class InconsistentSeed(OdeError):
    def __init__(self, order, message=""):
        super().__init__(f"no formal solution extends the seed (order {order}){message}")
        self.order = order


@dataclass(frozen=True)
class Undetermined:
    order: int


class SingularODE:
    """Data (gamma, p, q) with any parameters already substituted.

    ``p`` is a list of series, one per unknown component, in variables
    (x, y1, ..., yn); ``q`` is a scalar series in the same variables with
    q(0, 0) != 0.  ``theta`` records the substituted parameter values.
    """

    def __init__(self, gamma: int, p, q: TruncatedSeries, theta=()):
        if gamma < 0:
            raise OdeError("gamma must be nonnegative")
        self.gamma = gamma
        self.p = list(p)
        self.q = q
        self.theta = tuple(Fraction(t) for t in theta)
        if not self.p:
            raise OdeError("empty right-hand side")
        variables = self.p[0].variables
        for comp in self.p:
            if comp.variables != variables:
                raise OdeError("p components disagree on variables")
        if q.variables != variables:
            raise OdeError("q disagrees with p on variables")
        if len(self.p) != len(variables) - 1:
            raise OdeError("p needs one component per unknown")
        orders = {comp.order for comp in self.p} | {q.order}
        if len(orders) != 1:
            raise OdeError("p and q truncation orders must be equal")
        if q.constant_term().is_zero:
            raise OdeError("q(0, 0) must be nonzero")
        self.variables = variables
        self.n = len(variables) - 1
        self.order = q.order


# ----------------------------------------------------------------------
# affine scalars over deferred symbols


class _Aff:
    __slots__ = ("const", "lin", "opaque")

    def __init__(self, const=CR(0), lin=None, opaque=False):
        self.const = const
        self.lin = lin or {}
        self.opaque = opaque

    @classmethod
    def symbol(cls, sym):
        return cls(CR(0), {sym: CR(1)})

    def add(self, other):
        if self.opaque or other.opaque:
            return _Aff(opaque=True)
        lin = dict(self.lin)
        for s, c in other.lin.items():
            acc = lin.get(s, CR(0)) + c
            if acc.is_zero:
                lin.pop(s, None)
            else:
                lin[s] = acc
        return _Aff(self.const + other.const, lin)

    def scale(self, c: CR):
        if self.opaque:
            return _Aff(opaque=True) if not c.is_zero else _Aff()
        if c.is_zero:
            return _Aff()
        return _Aff(self.const * c, {s: v * c for s, v in self.lin.items()})

    def mul(self, other):
        if self.opaque or other.opaque:
            return _Aff(opaque=True)
        if self.lin and other.lin:
            return _Aff(opaque=True)
        if other.lin:
            return other.scale(self.const)
        return self.scale(other.const)

    @property
    def is_zero(self):
        return not self.opaque and self.const.is_zero and not self.lin


def _poly_add(a, b):
    return [x.add(y) for x, y in zip(a, b)]


def _poly_mul(a, b, n_max):
    out = [_Aff() for _ in range(n_max + 1)]
    for i, x in enumerate(a):
        if x.is_zero:
            continue
        for j, y in enumerate(b):
            if i + j > n_max:
                break
            if y.is_zero:
                continue
            out[i + j] = out[i + j].add(x.mul(y))
    return out


def _eval_series(series: TruncatedSeries, y_polys, n_max):
    """x-coefficient list of series(x, y(x)) with affine y coefficients."""
    zero = [_Aff() for _ in range(n_max + 1)]
    acc = list(zero)
    power_cache: list[dict[int, list]] = [{1: poly} for poly in y_polys]

    def power_of(idx, d):
        cache = power_cache[idx]
        if d not in cache:
            k = max(key for key in cache if key <= d)
            current = cache[k]
            while k < d:
                current = _poly_mul(current, y_polys[idx], n_max)
                k += 1
                cache[k] = current
        return cache[d]

    for mi, c in series.coefficients.items():
        e_x = mi[0]
        if e_x > n_max:
            continue
        term = list(zero)
        term[e_x] = _Aff(c)
        for idx, d in enumerate(mi[1:]):
            if d == 0:
                continue
            term = _poly_mul(term, power_of(idx, d), n_max)
        acc = _poly_add(acc, term)
    return acc


class _LinearSolver:
    """Incremental exact row reduction with eager back-substitution.

    Pivot rows never reference pivot symbols, so resolving a value is a
    single substitution pass.
    """

    def __init__(self):
        self.pivots: dict[int, _Aff] = {}

    def reduce(self, aff: _Aff) -> _Aff:
        if aff.opaque:
            return aff
        out = _Aff(aff.const, {})
        for sym, c in aff.lin.items():
            expr = self.pivots.get(sym)
            if expr is None:
                out = out.add(_Aff(CR(0), {sym: c}))
            else:
                out = out.add(expr.scale(c))
        return out

    def add_equation(self, aff: _Aff):
        aff = self.reduce(aff)
        if not aff.lin:
            return "redundant" if aff.const.is_zero else "inconsistent"
        sym = max(aff.lin)
        coeff = aff.lin[sym]
        inv = CR(-1) / coeff
        expr = _Aff(
            aff.const * inv, {s: c * inv for s, c in aff.lin.items() if s != sym}
        )
        for other, row in self.pivots.items():
            if sym in row.lin:
                c = row.lin.pop(sym)
                self.pivots[other] = row.add(expr.scale(c))
        self.pivots[sym] = expr
        return ("pivot", sym)

    def value(self, aff: _Aff):
        """Numeric value if fully determined, else None."""
        red = self.reduce(aff)
        if red.opaque or red.lin:
            return None
        return red.const


# ----------------------------------------------------------------------
# results


@dataclass(frozen=True)
class LedgerEntry:
    order: int
    rank: int
    kernel_dim: int
    status: str  # resolved | deferred | free


@dataclass(frozen=True)
class JetRecursionResult:
    coefficients: dict  # s -> tuple of CR, fully determined entries only
    free_orders: tuple
    obstruction_ledger: tuple
    n_target: int
    opaque_orders: tuple = ()
    determination: object = None  # int | Undetermined | None

    @property
    def fully_determined(self) -> bool:
        return not self.free_orders

    def vector(self, s):
        return self.coefficients.get(s)


def formal_coefficients(ode: SingularODE, seed, n_target: int) -> JetRecursionResult:
    """Extend a seed to a formal solution table through order ``n_target``.

    ``seed`` maps orders to coefficient vectors (Taylor-normalized); order 0
    defaults to the zero vector and must be zero when given.
    """
    n, gamma = ode.n, ode.gamma
    seed = {s: [CR.coerce(x) for x in vec] for s, vec in seed.items()}
    zero_vec = [CR(0)] * n
    if 0 in seed and any(not x.is_zero for x in seed[0]):
        raise OdeError("solutions are germs with y(0) = 0")
    seed.setdefault(0, zero_vec)
    n_eq = min(ode.order, n_target + gamma + n * gamma + 4)

    sym_ids = {}
    a: dict[int, list[_Aff]] = {}
    next_sym = 0
    for s in range(0, n_eq + 1):
        if s in seed:
            a[s] = [_Aff(c) for c in seed[s]]
        else:
            row = []
            for i in range(n):
                sym_ids[next_sym] = (s, i)
                row.append(_Aff.symbol(next_sym))
                next_sym += 1
            a[s] = row

    y_polys = [[a[s][i] for s in range(n_eq + 1)] for i in range(n)]
    # x^(gamma+1) y'_i has coefficient (m - gamma) a_{m-gamma} at x^m
    dy_shifted = []
    for i in range(n):
        poly = [_Aff() for _ in range(n_eq + 1)]
        for m in range(gamma + 1, n_eq + 1):
            poly[m] = a[m - gamma][i].scale(CR(m - gamma))
        dy_shifted.append(poly)

    q_poly = _eval_series(ode.q, y_polys, n_eq)
    equations = []
    for i in range(n):
        p_poly = _eval_series(ode.p[i], y_polys, n_eq)
        lhs = _poly_mul(q_poly, dy_shifted[i], n_eq)
        equations.append([l.add(r.scale(CR(-1))) for l, r in zip(lhs, p_poly)])

    solver = _LinearSolver()
    opaque_orders = set()
    frontier_kernel: dict[int, int] = {}
    for m in range(0, n_eq + 1):
        for i in range(n):
            eq = equations[i][m]
            if eq.opaque:
                opaque_orders.add(m)
                continue
            status = solver.add_equation(eq)
            if status == "inconsistent":
                raise InconsistentSeed(m)
        s = m - gamma
        if 0 <= s <= n_target and s not in seed:
            unpinned = sum(
                1
                for aff in a[s]
                if solver.value(aff) is None
            )
            frontier_kernel[s] = unpinned

    coefficients = {}
    free_orders = []
    ledger = []
    for s in range(0, n_target + 1):
        values = [solver.value(aff) for aff in a[s]]
        numeric = all(v is not None for v in values)
        if numeric:
            coefficients[s] = tuple(values)
        else:
            free_orders.append(s)
        if s in seed:
            continue
        kernel = frontier_kernel.get(s, n)
        if kernel == 0:
            status = "resolved"
        elif numeric:
            status = "deferred"
        else:
            status = "free"
        ledger.append(LedgerEntry(order=s, rank=n - kernel, kernel_dim=kernel, status=status))

    return JetRecursionResult(
        coefficients=coefficients,
        free_orders=tuple(free_orders),
        obstruction_ledger=tuple(ledger),
        n_target=n_target,
        opaque_orders=tuple(sorted(opaque_orders)),
    )


# ----------------------------------------------------------------------
# plain-series helpers


def _table_to_series(ode: SingularODE, table, order: int):
    out = []
    for i in range(ode.n):
        coeffs = {}
        for s, vec in table.items():
            if s <= order and not CR.coerce(vec[i]).is_zero:
                coeffs[(s,)] = CR.coerce(vec[i])
        out.append(TruncatedSeries(("x",), order, coeffs))
    return out


def rhs_jet(ode: SingularODE, table) -> TruncatedSeries:
    """Taylor expansion in x of p(x, y(x)) / q(x, y(x)) for a coefficient table."""
    if ode.n != 1:
        raise OdeError("rhs_jet is scalar; use rhs_jet_vector for systems")
    return rhs_jet_vector(ode, table)[0]


def rhs_jet_vector(ode: SingularODE, table):
    k0 = max(table) if table else 0
    order = min(ode.order, k0 if table else 0)
    order = max(order, 0)
    ys = _table_to_series(ode, table, order)
    xg = TruncatedSeries.variable("x", ("x",), order)
    subs = {"x": xg}
    for name, y in zip(ode.variables[1:], ys):
        subs[name] = y
    q_comp = ode.q.compose(subs)
    return [ode.p[i].compose(subs) / q_comp for i in range(ode.n)]


def residual(ode: SingularODE, result: JetRecursionResult) -> list[TruncatedSeries]:
    """Back-substitution residual x^(gamma+1) y' - p/q through n_target - gamma - 1."""
    order = result.n_target
    ys = _table_to_series(ode, result.coefficients, order)
    xg = TruncatedSeries.variable("x", ("x",), order)
    subs = {"x": xg}
    for name, y in zip(ode.variables[1:], ys):
        subs[name] = y
    q_comp = ode.q.compose(subs)
    check_order = order - ode.gamma - 1
    out = []
    for i in range(ode.n):
        dy = ys[i].partial_derivative("x").shift_up((ode.gamma + 1,))
        rhs = ode.p[i].compose(subs) / q_comp
        out.append((dy - rhs).truncate(check_order))
    return out


# ----------------------------------------------------------------------
# resonances (gamma = 0)


def linearization_at_origin(ode: SingularODE):
    """f_y(0, 0) for f = p/q, an exact n x n matrix."""
    q0 = ode.q.constant_term()
    mi_zero = (0,) * len(ode.variables)
    rows = []
    for i in range(ode.n):
        p0 = ode.p[i].coefficient(mi_zero)
        row = []
        for j in range(ode.n):
            mi = tuple(1 if k == j + 1 else 0 for k in range(len(ode.variables)))
            py = ode.p[i].coefficient(mi)
            qy = ode.q.coefficient(mi)
            row.append((py * q0 - p0 * qy) / (q0 * q0))
        rows.append(row)
    return rows


def resonance_set(ode: SingularODE, n_max: int) -> set[int]:
    """Positive integers k <= n_max that are eigenvalues of f_y(0, 0)."""
    if ode.gamma != 0:
        raise WrongGamma("resonance analysis applies to gamma = 0")
    m = linearization_at_origin(ode)
    out = set()
    for k in range(1, n_max + 1):
        shifted = [
            [m[i][j] - (CR(k) if i == j else CR(0)) for j in range(ode.n)]
            for i in range(ode.n)
        ]
        if linalg.det(shifted).is_zero:
            out.add(k)
    return out


# ----------------------------------------------------------------------
# determination order


def determination_order(ode: SingularODE, base: JetRecursionResult, n_max: int):
    """Minimal k such that seeding with the base solution through order k
    pins every coefficient through n_max to the base values."""
    if base.free_orders:
        raise OdeError("base solution is not fully determined")
    for s in range(0, n_max + 1):
        if s not in base.coefficients:
            raise OdeError("base solution table is incomplete")
    for k in range(0, n_max + 1):
        seed = {s: base.coefficients[s] for s in range(0, k + 1)}
        run = formal_coefficients(ode, seed, n_max)
        if run.free_orders:
            continue
        if all(run.coefficients[s] == base.coefficients[s] for s in range(n_max + 1)):
            return k
    return Undetermined(n_max)


def zero_solution(ode: SingularODE, n_target: int) -> JetRecursionResult:
    """The zero coefficient table, validated as a formal solution."""
    for comp in ode.p:
        if not comp.zero_out(*ode.variables[1:]).is_zero:
            raise OdeError("y = 0 does not solve the equation: p(x, 0) != 0")
    table = {s: tuple([CR(0)] * ode.n) for s in range(n_target + 1)}
    return JetRecursionResult(
        coefficients=table,
        free_orders=(),
        obstruction_ledger=(),
        n_target=n_target,
    )


# ----------------------------------------------------------------------
# kernel chain diagnostics (gamma >= 1)


@dataclass(frozen=True)
class ChainRow:
    r: int
    dims: tuple  # (dim ker Q0, dim of step-1 and step-2 intersections) as available
    terminated_at: object  # step index or None
    notes: tuple = ()


@dataclass(frozen=True)
class ChainReport:
    rows: tuple
    ker_q0_dim: int
    bound: int  # n * gamma, the termination bound

    @property
    def terminated(self) -> bool:
        return all(row.terminated_at is not None for row in self.rows)


def _phi_series(ode: SingularODE, table, order: int):
    """Matrix x-series of f_y(x, y(x)) composed with the base solution."""
    ys = _table_to_series(ode, table, order)
    xg = TruncatedSeries.variable("x", ("x",), order)
    subs = {"x": xg}
    for name, y in zip(ode.variables[1:], ys):
        subs[name] = y
    q_comp = ode.q.compose(subs)
    entries = []
    for i in range(ode.n):
        p_comp = ode.p[i].compose(subs)
        row = []
        for j in range(ode.n):
            name = ode.variables[j + 1]
            py = ode.p[i].partial_derivative(name).compose(subs)
            qy = ode.q.partial_derivative(name).compose(subs)
            row.append((py * q_comp - p_comp * qy) / (q_comp * q_comp))
        entries.append(row)
    return entries


def _phi_coefficient(entries, d: int, n: int):
    return [[entries[i][j].coefficient((d,)) for j in range(n)] for i in range(n)]


def _q_block(entries, j: int, gamma: int, n: int, l_order: int):
    """gamma*n square block: d! * Phi_d at offset d = j*gamma + i - i'."""
    from math import factorial

    size = gamma * n
    block = [[CR(0)] * size for _ in range(size)]
    for i in range(1, gamma + 1):
        for ip in range(1, gamma + 1):
            d = j * gamma + i - ip
            if d < 0 or d > l_order - 1:
                continue
            phi = _phi_coefficient(entries, d, n)
            fac = factorial(d)
            for bi in range(n):
                for bj in range(n):
                    block[(i - 1) * n + bi][(ip - 1) * n + bj] = phi[bi][bj] * fac
    return block


def _c_matrix(r: int, gamma: int, n: int):
    size = gamma * n
    out = [[CR(0)] * size for _ in range(size)]
    for i in range(1, gamma + 1):
        c = CR(comb(r * gamma + i, gamma + 1))
        for bi in range(n):
            out[(i - 1) * n + bi][(i - 1) * n + bi] = c
    return out


def kernel_chain_diagnostic(
    ode: SingularODE, base_table, r_max: int = 8
) -> ChainReport:
    """Kernel/image chain dimensions for the block systems at gamma >= 1.

    ``base_table`` maps orders to coefficient vectors of the reference
    solution (only low orders are consumed).  For each r the report lists
    dim ker Q0 and the intersection dimensions after one and two elimination
    steps, stopping at the step where the intersection dies.
    """
    if ode.gamma < 1:
        raise WrongGamma("kernel chain analysis applies to gamma >= 1")
    gamma, n = ode.gamma, ode.n
    l_order = 3 * gamma  # enough derivative data for blocks Q0, Q1, Q2
    entries = _phi_series(ode, base_table, min(ode.order, l_order))
    q0 = _q_block(entries, 0, gamma, n, l_order)
    q1 = _q_block(entries, 1, gamma, n, l_order)
    q2 = _q_block(entries, 2, gamma, n, l_order)
    ker = linalg.kernel_basis(q0)
    ker_dim = len(ker)
    rows = []
    for r in range(1, r_max + 1):
        notes = []
        if ker_dim == 0:
            rows.append(ChainRow(r, (0,), terminated_at=0))
            continue
        dims = [ker_dim]
        a1_next = linalg.invert(linalg.mat_sub(_c_matrix(r + 1, gamma, n), q1))
        if a1_next is None:
            rows.append(
                ChainRow(r, tuple(dims), None, notes=("step-1 matrix singular",))
            )
            continue
        im_q0 = linalg.image_basis(q0)
        v1_r = [linalg.mat_vec(a1_next, v) for v in im_q0]
        inter1 = linalg.span_intersection(ker, v1_r)
        dims.append(len(inter1))
        if not inter1:
            rows.append(ChainRow(r, tuple(dims), terminated_at=1))
            continue
        a1_next2 = linalg.invert(linalg.mat_sub(_c_matrix(r + 2, gamma, n), q1))
        if a1_next2 is None:
            rows.append(
                ChainRow(r, tuple(dims), None, notes=("step-2 shift singular",))
            )
            continue
        d2 = linalg.mat_sub(
            linalg.mat_sub(_c_matrix(r + 1, gamma, n), q1),
            linalg.mat_mul(linalg.mat_mul(q0, a1_next2), q2),
        )
        a2 = linalg.invert(d2)
        if a2 is None:
            rows.append(
                ChainRow(r, tuple(dims), None, notes=("step-2 matrix singular",))
            )
            continue
        v1_r1 = [linalg.mat_vec(a1_next2, v) for v in im_q0]
        v2_r = [linalg.mat_vec(a2, linalg.mat_vec(q0, v)) for v in v1_r1]
        inter2 = linalg.span_intersection(ker, v2_r)
        dims.append(len(inter2))
        rows.append(
            ChainRow(
                r,
                tuple(dims),
                terminated_at=2 if not inter2 else None,
            )
        )
    return ChainReport(rows=tuple(rows), ker_q0_dim=ker_dim, bound=n * gamma)
