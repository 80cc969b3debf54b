"""Quantum-group matrix engine behind the exclusion generators.

Builds the weight-basis matrices of the rank-n q-deformed gl algebra on the
finite modules V_m^(n), their tensor products over a chain, the Casimir
element, the *-structure and inner product, the diagonal ground-state
transform, nilpotent q-exponentials, and the unitary symmetry built from
them.  The bridge functions at the bottom translate tensor-basis states to
lattice configurations (slot i = species i for i < n, slot n = holes) and
assemble the matching Markov generator, which is what the conjugation and
duality checks run against.

All matrices are numpy object arrays over exact scalars unless stated
otherwise.  Column convention throughout: entry (r, c) is the coefficient
of basis vector r in the image of basis vector c.
"""

import itertools
import warnings
from fractions import Fraction
from functools import reduce
from math import comb

import numpy as np

from . import lattice, models
from .errors import DomainError
from .lattice import ResourceError
from .qcalc import brace_fact, q_int, q_poch
from .scalars import exact_sqrt, to_mpf

TENSOR_DIM_CAP = 10_000


# ---------------------------------------------------------------------------
# bases


class RepBasis:
    """Weight basis of V_m^(n): all (n+1)-tuples of nonnegative ints summing
    to m, enumerated with the leading slot descending."""

    __slots__ = ("n", "m", "states", "index")

    def __init__(self, n, m):
        assert n >= 1 and m >= 0
        states = []

        def fill(prefix, left, slots):
            if slots == 1:
                states.append(prefix + (left,))
                return
            for c in range(left, -1, -1):
                fill(prefix + (c,), left - c, slots - 1)

        fill((), m, n + 1)
        assert len(states) == comb(m + n, n)
        self.n = n
        self.m = m
        self.states = tuple(states)
        self.index = {mu: k for k, mu in enumerate(states)}

    def __len__(self):
        return len(self.states)

    def __repr__(self):
        return "RepBasis(n=%d, m=%d, dim=%d)" % (self.n, self.m, len(self))


class TensorBasis:
    """Ordered tensor product of per-site weight bases (site x gets V_{theta^x}).

    States are L-tuples of (n+1)-tuples; kron index order matches
    itertools.product over the legs.
    """

    __slots__ = ("n", "theta", "legs", "states", "index")

    def __init__(self, n, theta):
        theta = tuple(int(t) for t in theta)
        assert len(theta) >= 1 and all(t >= 1 for t in theta)
        legs = [RepBasis(n, m) for m in theta]
        dim = 1
        for leg in legs:
            dim *= len(leg)
        if dim > TENSOR_DIM_CAP:
            raise ResourceError("tensor dimension %d exceeds cap %d"
                                % (dim, TENSOR_DIM_CAP))
        self.n = n
        self.theta = theta
        self.legs = tuple(legs)
        self.states = tuple(itertools.product(*(leg.states for leg in legs)))
        self.index = {st: k for k, st in enumerate(self.states)}

    @property
    def L(self):
        return len(self.legs)

    def __len__(self):
        return len(self.states)

    def slot_total(self, state, i):
        return sum(mu[i] for mu in state)

    def sector_key(self, state):
        return tuple(self.slot_total(state, i) for i in range(self.n + 1))

    def sectors(self):
        """Map sector key -> list of state indices, in enumeration order."""
        groups = {}
        for k, st in enumerate(self.states):
            groups.setdefault(self.sector_key(st), []).append(k)
        return groups

    def __repr__(self):
        return "TensorBasis(n=%d, theta=%s, dim=%d)" % (
            self.n, self.theta, len(self))


# ---------------------------------------------------------------------------
# object-matrix helpers


def zeros(nrows, ncols=None):
    M = np.empty((nrows, nrows if ncols is None else ncols), dtype=object)
    M[:] = Fraction(0)
    return M


def eye(nrows):
    M = zeros(nrows)
    for i in range(nrows):
        M[i, i] = Fraction(1)
    return M


def kron_all(mats):
    return reduce(np.kron, mats)


def is_zero_matrix(M):
    return all(not bool(v) for v in M.flat)


# ---------------------------------------------------------------------------
# single-module generator action

_KINDS = ("raise", "lower", "weight")


def generator_matrix(kind, i, basis, q):
    """Matrix of one Chevalley generator on a RepBasis.

    kind "raise": moves one unit from slot i+1 to slot i, coefficient
    [mu_{i+1}]_q.  kind "lower": slot i to i+1, coefficient [mu_i]_q.
    kind "weight": diagonal q^{mu_i}.
    """
    assert kind in _KINDS, kind
    if kind == "weight":
        assert 0 <= i <= basis.n, "weight index out of range"
    else:
        assert 0 <= i < basis.n, "ladder index out of range"
    N = len(basis)
    M = zeros(N)
    for k, mu in enumerate(basis.states):
        if kind == "weight":
            M[k, k] = q ** mu[i]
            continue
        src, dst = (i + 1, i) if kind == "raise" else (i, i + 1)
        if mu[src] > 0:
            tgt = list(mu)
            tgt[src] -= 1
            tgt[dst] += 1
            M[basis.index[tuple(tgt)], k] = q_int(mu[src], q)
    return M


def weight_matrix(i, basis, q, power=1):
    """Diagonal q^{power * mu_i}."""
    N = len(basis)
    M = zeros(N)
    for k, mu in enumerate(basis.states):
        M[k, k] = q ** (power * mu[i])
    return M


def root_vector(i, j, basis, q, k=None):
    """Off-diagonal algebra element E_{ij} via the nested q-commutator
    E_{ij} = E_{ik}E_{kj} - q^{-1} E_{kj}E_{ik}; k defaults to the neighbor
    of i toward j.  The result is independent of the chain of intermediates.
    """
    assert 0 <= i <= basis.n and 0 <= j <= basis.n and i != j
    if j == i + 1:
        return generator_matrix("raise", i, basis, q)
    if j == i - 1:
        return generator_matrix("lower", j, basis, q)
    if k is None:
        k = i + 1 if i < j else i - 1
    assert (i < k < j) or (i > k > j), "intermediate must sit between i and j"
    A = root_vector(i, k, basis, q)
    B = root_vector(k, j, basis, q)
    return A @ B - (1 / q) * (B @ A)


def root_vector_closed(i, j, basis, q):
    """Same element from the closed-form action: for i < j the matrix sends
    mu to mu with one unit moved j -> i, coefficient
    q^{mu_{i+1}+...+mu_{j-1}} [mu_j]_q (and symmetrically for i > j)."""
    assert 0 <= i <= basis.n and 0 <= j <= basis.n and i != j
    lo, hi = (i, j) if i < j else (j, i)
    # one unit moves slot j -> slot i; the q-power runs over the slots
    # strictly between them
    src, dst = j, i
    N = len(basis)
    M = zeros(N)
    for kk, mu in enumerate(basis.states):
        if mu[src] == 0:
            continue
        tgt = list(mu)
        tgt[src] -= 1
        tgt[dst] += 1
        coeff = q ** sum(mu[lo + 1:hi]) * q_int(mu[src], q)
        M[basis.index[tuple(tgt)], kk] = coeff
    return M


# ---------------------------------------------------------------------------
# coproduct on a chain


def coproduct_apply(kind, i, tbasis, q):
    """Iterated coproduct of one generator on the full chain.

    raise: sum over legs x of (K_i K_{i+1}^{-1}) on legs y<x, the raise
    matrix at x, identity on y>x.  lower: identity left, lower at x,
    (K_i^{-1} K_{i+1}) right.  weight: q^{E_ii} on every leg.
    """
    assert kind in _KINDS, kind
    legs = tbasis.legs
    if kind == "weight":
        return kron_all([weight_matrix(i, leg, q) for leg in legs])
    total = None
    for x in range(len(legs)):
        factors = []
        for y, leg in enumerate(legs):
            if y == x:
                factors.append(generator_matrix(kind, i, leg, q))
            elif (y < x) == (kind == "raise"):
                sign = 1 if kind == "raise" else -1
                factors.append(weight_matrix(i, leg, q, power=sign)
                               @ weight_matrix(i + 1, leg, q, power=-sign))
            else:
                factors.append(eye(len(leg)))
        term = kron_all(factors)
        total = term if total is None else total + term
    return total


def coproduct_weight(i, tbasis, q, power=1):
    """Diagonal q^{power * sum_x mu_i^x} on the chain."""
    return kron_all([weight_matrix(i, leg, q, power=power)
                     for leg in tbasis.legs])


# ---------------------------------------------------------------------------
# Casimir


def _casimir_from_ops(n, E, F, K, q, dim):
    """First-order Casimir from generator dictionaries.

    E[i], F[i] are the (co)product raise/lower matrices, K[i] the weight
    diagonals.  Root vectors are rebuilt with the same nested commutator as
    root_vector, so the formula applies verbatim on tensor legs.
    """

    def rv(i, j):
        if j == i + 1:
            return E[i]
        if i == j + 1:
            return F[j]
        k = i + 1 if i < j else i - 1
        A = rv(i, k)
        B = rv(k, j)
        return A @ B - (1 / q) * (B @ A)

    C = zeros(dim)
    for i in range(n + 1):
        C = C + q ** (2 * i - 2 * n - 1) * (K[i] @ K[i])
    coeff = (q - 1 / q) ** 2
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            C = C + (coeff * q ** (2 * j - 2 * n - 2)) * (
                K[i] @ K[j] @ rv(i, j) @ rv(j, i))
    return C


def casimir_c1(basis, q):
    """Casimir matrix: scalar on a RepBasis, and the SUM of bond-embedded
    two-site coproduct Casimirs on a TensorBasis.

    The bond sum is the operative chain element: the full iterated coproduct
    of the Casimir is not nearest-neighbor, while each bond embedding is, and
    the sum still commutes with every iterated-coproduct generator.
    """
    if isinstance(basis, RepBasis):
        n = basis.n
        E = {i: generator_matrix("raise", i, basis, q) for i in range(n)}
        F = {i: generator_matrix("lower", i, basis, q) for i in range(n)}
        K = {i: weight_matrix(i, basis, q) for i in range(n + 1)}
        return _casimir_from_ops(n, E, F, K, q, len(basis))
    assert isinstance(basis, TensorBasis)
    if basis.L == 1:
        return casimir_c1(basis.legs[0], q)
    total = None
    for x in range(basis.L - 1):
        term = bond_casimir(basis, x, q)
        total = term if total is None else total + term
    return total


def bond_casimir(tbasis, x, q):
    """Two-site coproduct Casimir on legs (x, x+1), identity elsewhere."""
    assert 0 <= x < tbasis.L - 1
    n = tbasis.n
    pair = TensorBasis(n, (tbasis.theta[x], tbasis.theta[x + 1]))
    E = {i: coproduct_apply("raise", i, pair, q) for i in range(n)}
    F = {i: coproduct_apply("lower", i, pair, q) for i in range(n)}
    K = {i: coproduct_weight(i, pair, q) for i in range(n + 1)}
    C2 = _casimir_from_ops(n, E, F, K, q, len(pair))
    mats = []
    y = 0
    while y < tbasis.L:
        if y == x:
            mats.append(C2)
            y += 2
        else:
            mats.append(eye(len(tbasis.legs[y])))
            y += 1
    return kron_all(mats)


def casimir_scalar(n, m, q):
    """Eigenvalue of the Casimir on the irreducible V_m^(n).

    Evaluated on the lowest-weight vector mu = (0, ..., 0, m): every product
    E_{ij} E_{ji} (i < j) applies the slot i -> j mover first, which kills a
    state with nothing in slots < n, so only the diagonal part survives.
    """
    mu = (0,) * n + (m,)
    val = sum(q ** (2 * i - 2 * n - 1) * q ** (2 * mu[i]) for i in range(n + 1))
    return val


# ---------------------------------------------------------------------------
# inner product and *-structure


def _leg_weight(mu, q):
    val = q ** (-sum(i * c for i, c in enumerate(mu)))
    for c in mu:
        val = val * brace_fact(c, q)
    return val


def inner_product(basis, q):
    """Diagonal inner-product weights <v, v> per basis vector.

    Radical-free normalization: per leg q^{-sum_i i*mu_i} times the product
    of curly factorials; this differs from the q^{sum mu_i^2 / 2} form by a
    constant factor per module, which drops out of every adjointness and
    star computation.
    """
    if isinstance(basis, RepBasis):
        states = [(mu,) for mu in basis.states]
    else:
        states = basis.states
    out = []
    for st in states:
        val = Fraction(1)
        for mu in st:
            val = val * _leg_weight(mu, q)
        out.append(val)
    assert all(v > 0 for v in out), "inner product must be positive definite"
    return out


def star_transform(M, basis, q):
    """Matrix of the *-image: weighted transpose w.r.t. the inner product,
    star(M)[r, c] = M[c, r] w_c / w_r."""
    w = inner_product(basis, q)
    N = M.shape[0]
    assert N == len(w), "matrix does not match basis"
    out = zeros(N)
    for r in range(N):
        for c in range(N):
            if bool(M[c, r]):
                out[r, c] = M[c, r] * w[c] / w[r]
    return out


# ---------------------------------------------------------------------------
# ground-state transform


def inversion_exponent(state):
    """Number of ordered slot pairs i<j with the slot-i unit left of the
    slot-j unit: sum over site pairs y<x of mu_i^y mu_j^x."""
    L = len(state)
    nslots = len(state[0])
    expo = 0
    for y in range(L):
        for x in range(y + 1, L):
            muy, mux = state[y], state[x]
            for i in range(nslots):
                for j in range(i + 1, nslots):
                    expo += muy[i] * mux[j]
    return expo


def ground_state_G(tbasis, q, theta=None):
    """Diagonal entries of the gauge that turns the chain Casimir into the
    exclusion generator: g(state) = q^{-inversion_exponent(state)}.

    Normalized so the cross-site exponent carries everything; any per-sector
    constant would cancel in the conjugation.  Returns a list aligned with
    tbasis.states; entries are exact for exact q.
    """
    if theta is not None:
        assert tuple(theta) == tbasis.theta, "theta disagrees with basis"
    return [q ** (-inversion_exponent(st)) for st in tbasis.states]


def conjugate_diag(g, M, h=None):
    """diag(g)^-1 M diag(h) entrywise (h defaults to g)."""
    if h is None:
        h = g
    N = M.shape[0]
    out = zeros(N)
    for r in range(N):
        for c in range(N):
            if bool(M[r, c]):
                out[r, c] = M[r, c] * h[c] / g[r]
    return out


# ---------------------------------------------------------------------------
# nilpotent q-exponentials


def nilpotent_q_exp(M, qsq, variant="e", nilcap=None):
    """Finite q-exponential of a nilpotent matrix, base qsq.

    variant "e": sum_k M^k / ((qsq;qsq)_k normalization written as the
    running product of (1 - qsq^j)); variant "E" carries the extra
    qsq^{k(k-1)/2}.  Nilpotency is checked by the series terminating within
    nilcap steps (default: matrix dimension).
    """
    assert variant in ("e", "E")
    N = M.shape[0]
    if nilcap is None:
        nilcap = N
    total = eye(N)
    term = eye(N)
    denom = 1
    for k in range(1, nilcap + 2):
        term = term @ M
        if is_zero_matrix(term):
            return total
        denom = denom * (1 - qsq ** k)
        scale = (qsq ** (k * (k - 1) // 2)) if variant == "E" else 1
        total = total + (scale / denom) * term
    raise DomainError("matrix is not nilpotent within the cap")


def diagonal_q_exp(diag_entries, qsq, variant="e"):
    """Scalar q-exponential applied entrywise to a diagonal (float backend:
    the series is infinite for nonzero entries)."""
    from .qcalc import q_exp_e, q_exp_E
    fn = q_exp_e if variant == "e" else q_exp_E
    return [fn(to_mpf(z), to_mpf(qsq)) for z in diag_entries]


# ---------------------------------------------------------------------------
# the unitary symmetry


def gamma_from_lambda(lam, q):
    """Invert lambda = gamma (1-q^2)(q - q^{-1})."""
    return lam / ((1 - q ** 2) * (q - 1 / q))


def unitary_U(i, lam, tbasis, q, gamma=None, half_powers=False):
    """Unitary symmetry for species slot pair (i, i+1) at coupling lam.

    Core product: e_{q^2}(lam * M_lower K_i) E_{q^2}(-lam * K_{i+1} M_raise)
    on the chain coproduct matrices.  half_powers=False returns this exact
    core; unitarity then holds against the inner product twisted by the
    Pochhammer diagonals (z; q^2)_{k_i}, z = -gamma*lam, which is what the
    omitted half-power factors square to.  half_powers=True multiplies the
    float-backend diagonal square roots back in, giving a fully unitary
    matrix at working precision.
    """
    if gamma is None:
        gamma = gamma_from_lambda(lam, q)
    else:
        assert lam == gamma * (1 - q ** 2) * (q - 1 / q), \
            "lam and gamma must satisfy the coupling relation"
    MF = coproduct_apply("lower", i, tbasis, q) @ coproduct_weight(i, tbasis, q)
    ME = coproduct_weight(i + 1, tbasis, q) @ coproduct_apply("raise", i, tbasis, q)
    cap = sum(tbasis.theta) + 1
    U = nilpotent_q_exp(lam * MF, q ** 2, "e", nilcap=cap) \
        @ nilpotent_q_exp(-lam * ME, q ** 2, "E", nilcap=cap)
    if not half_powers:
        return U
    # dressed variant: sqrt of the scalar q-exponentials of the weight
    # diagonals, applied on the float backend
    import mpmath
    z = -gamma * lam
    left, right = [], []
    for st in tbasis.states:
        ki = sum(mu[i] for mu in st)
        ki1 = sum(mu[i + 1] for mu in st)
        left.append(mpmath.sqrt(to_mpf(q_poch(z, q ** 2, ki))
                                / _poch_inf(z, q)))
        right.append(mpmath.sqrt(_poch_inf(z, q)
                                 / to_mpf(q_poch(z, q ** 2, ki1))))
    N = len(tbasis)
    out = np.empty((N, N), dtype=object)
    for r in range(N):
        for c in range(N):
            out[r, c] = left[r] * to_mpf(U[r, c]) * right[c]
    return out


def _poch_inf(z, q):
    from .qcalc import q_poch, INF
    return to_mpf(q_poch(to_mpf(z), to_mpf(q) ** 2, INF))


def unitarity_twist(i, lam, tbasis, q, gamma=None):
    """Pochhammer diagonals (start, end) that make the core U exactly
    unitary: star(U) diag(start) U = diag(end)."""
    if gamma is None:
        gamma = gamma_from_lambda(lam, q)
    z = -gamma * lam
    start, end = [], []
    for st in tbasis.states:
        start.append(q_poch(z, q ** 2, sum(mu[i] for mu in st)))
        end.append(q_poch(z, q ** 2, sum(mu[i + 1] for mu in st)))
    return start, end


# ---------------------------------------------------------------------------
# lattice bridges


def state_config(state, theta):
    """Tensor-basis state -> capacity-mode configuration; slot i is species
    row i (i < n), slot n is the hole row."""
    rows = [[mu[i] for mu in state] for i in range(len(state[0]))]
    return lattice.Config(rows, theta=tuple(theta))


def chain_generator(tbasis, q):
    """Exclusion generator on the full tensor basis, assembled per sector
    through the models module (column convention)."""
    N = len(tbasis)
    Lm = zeros(N)
    for key, idxs in tbasis.sectors().items():
        sector = lattice.Sector(key, tbasis.theta)
        gen = models.asep_generator(sector, q)
        cfgs = [state_config(tbasis.states[k], tbasis.theta) for k in idxs]
        for a, ra in enumerate(idxs):
            for b, rb in enumerate(idxs):
                Lm[ra, rb] = gen.rate(cfgs[b], cfgs[a])
    return Lm


def reversible_vector(tbasis, q):
    """Reversible-measure weights per tensor state (sector-wise measure)."""
    return [models.reversible_measure(state_config(st, tbasis.theta), q)
            for st in tbasis.states]


# ---------------------------------------------------------------------------
# algebraic duality


def duality_lambda(alpha, theta, q, shift=0):
    """Coupling for one species: sqrt(alpha) (1-q^2) q^{-(N(theta)-shift)},
    N(theta) = total capacity.  Non-square alpha falls back to the float
    backend with a warning."""
    root = exact_sqrt(alpha)
    if root is None:
        warnings.warn("alpha=%r is not an exact square; float backend" % (alpha,))
        import mpmath
        root = mpmath.sqrt(to_mpf(alpha))
        return root * to_mpf((1 - q ** 2)) * to_mpf(q) ** (-(sum(theta) - shift))
    return root * (1 - q ** 2) * q ** (-(sum(theta) - shift))


class AlgebraicDuality:
    """Duality matrix assembled from the unitary symmetry, plus the exact
    diagonal weights of its orthogonality identity."""

    __slots__ = ("tbasis", "entries", "lambdas", "left_weight", "right_weight")

    def __init__(self, tbasis, entries, lambdas, left_weight, right_weight):
        self.tbasis = tbasis
        self.entries = entries
        self.lambdas = tuple(lambdas)
        self.left_weight = left_weight
        self.right_weight = right_weight

    def sector_block(self, row_key, col_key):
        groups = self.tbasis.sectors()
        rows = groups[row_key]
        cols = groups[col_key]
        return self.entries[np.ix_(rows, cols)]


def algebraic_duality(lambdas, tbasis, q, A=None):
    """Duality matrix diag(A/mu) G^-1 M_U G diag(A), with M_U the product of
    per-species unitaries (descending species order) and G the ground-state
    gauge.

    Satisfies L^T D = D L exactly, and the orthogonality identity
    D^T diag(left_weight) D = diag(right_weight) with the returned exact
    diagonals (mu times sector constants times the unitarity Pochhammers).
    A, if given, must be a sector-constant positive diagonal (list aligned
    with tbasis.states); it transforms both weights accordingly.
    """
    n = tbasis.n
    lambdas = list(lambdas)
    assert len(lambdas) == n, "one coupling per species"
    N = len(tbasis)
    MU = eye(N)
    for i in range(n):
        MU = unitary_U(i, lambdas[i], tbasis, q) @ MU
    g = gauge_vector(tbasis, q)
    mu = reversible_vector(tbasis, q)
    if A is None:
        A = [Fraction(1)] * N
    else:
        _assert_sector_constant(A, tbasis, "A")
    D = zeros(N)
    for r in range(N):
        for c in range(N):
            if bool(MU[r, c]):
                D[r, c] = A[r] * MU[r, c] * g[c] * A[c] / (g[r] * mu[r])
    w = inner_product(tbasis, q)
    start = [Fraction(1)] * N
    end = [Fraction(1)] * N
    for i in range(n):
        s_i, e_i = unitarity_twist(i, lambdas[i], tbasis, q)
        start = [a * b for a, b in zip(start, s_i)]
        end = [a * b for a, b in zip(end, e_i)]
    left = [mu[k] ** 2 * g[k] ** 2 * w[k] * start[k] / (A[k] ** 2)
            for k in range(N)]
    right = [g[k] ** 2 * w[k] * end[k] * A[k] ** 2 for k in range(N)]
    return AlgebraicDuality(tbasis, D, lambdas, left, right)


def gauge_vector(tbasis, q):
    """Alias for ground_state_G without the theta cross-check."""
    return ground_state_G(tbasis, q)


def _assert_sector_constant(vec, tbasis, name):
    for key, idxs in tbasis.sectors().items():
        vals = {vec[k] for k in idxs}
        assert len(vals) == 1, "%s must be constant on sector %s" % (name, key)
