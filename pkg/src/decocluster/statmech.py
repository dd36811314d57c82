"""Effective statistical-mechanics models for decohered cluster states.

1D: the ferromagnetic Ising ring behind the fidelity correlator, plus two
non-Hermitian chains behind the partial-transpose trace norm — one for on-site
X noise (next-nearest couplings, imaginary nearest-neighbor couplings and an
imaginary field) and one for on-site Z noise (imaginary couplings and a complex
field). Both are evaluated by small transfer matrices with diagonal sign
insertions; all scalars are kept in log-magnitude form with phases tracked
exactly where they are multiples of pi/2.

2D: the plaquette Ising model (PIM) on a cylinder — four-spin couplings on
elementary squares, optional two-spin boundary couplings on the open rows —
with a brute-force enumerator, a row-transfer evaluator, and the exact
change of variables that maps the open-boundary model onto decoupled 1D rings.

The inverse temperature is beta(p) = -log(1-2p)/2, so tanh(beta) = p/(1-p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

LOG2 = math.log(2.0)


# ---------------------------------------------------------------------------
# Parameters and 1D Ising closed forms
# ---------------------------------------------------------------------------


def beta_from_p(p: float) -> float:
    """Inverse temperature of the effective model; +inf at p = 1/2."""
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"rate must lie in [0, 1/2], got {p}")
    if p == 0.5:
        return math.inf
    return -0.5 * math.log1p(-2.0 * p)

def p_from_beta(beta: float) -> float:
    if beta == math.inf:
        return 0.5
    return 0.5 * (1.0 - math.exp(-2.0 * beta))


def log_tanh_beta(beta: float) -> float:
    """log tanh(beta), equal to log[p/(1-p)]; -inf at beta = 0."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if beta == 0.0:
        return -math.inf
    if beta == math.inf:
        return 0.0
    # log tanh b = log(1 - e^{-2b}) - log(1 + e^{-2b})
    e = math.exp(-2.0 * beta)
    return math.log1p(-e) - math.log1p(e)


def ising_correlator_closed(n_sites: int, beta: float, e_weight: int) -> float:
    """Multi-spin correlator of the periodic Ising ring in domain-wall form.

    [t^{N-k} + t^k] / (1 + t^N) with t = tanh(beta) and k the domain-wall
    weight. Covers both the syndrome correlator (k = error weight) and the
    multi-point spin correlator (k = alternating gap sum).
    """
    if not 0 <= e_weight <= n_sites:
        raise ValueError("weight out of range")
    if beta == math.inf:
        return 1.0
    if beta == 0.0:
        return 1.0 if e_weight in (0, n_sites) else 0.0
    lt = log_tanh_beta(beta)
    num = np.logaddexp((n_sites - e_weight) * lt, e_weight * lt)
    den = np.logaddexp(0.0, n_sites * lt)
    return float(np.exp(num - den))


def ising_multispin_closed(n_sites: int, beta: float, positions) -> float:
    """<prod_{x in positions} sigma_x> on the periodic ring, by gap counting.

    Zero for an odd number of insertions; otherwise the domain-wall weight is
    the sum of every other gap around the ring.
    """
    pos = sorted(int(x) % n_sites for x in positions)
    if len(pos) != len(set(pos)):
        # repeated spins square to one
        from collections import Counter

        pos = sorted(x for x, c in Counter(pos).items() if c % 2)
    if not pos:
        return 1.0
    if len(pos) % 2:
        return 0.0
    gaps = [pos[i + 1] - pos[i] for i in range(len(pos) - 1)]
    gaps.append(n_sites - pos[-1] + pos[0])
    d = sum(gaps[0::2])
    return ising_correlator_closed(n_sites, beta, d)


def log_partition_ising(n_sites: int, beta: float) -> float:
    """log Z of the periodic Ising ring: Z = 2^N [(sinh b)^N + (cosh b)^N]."""
    if beta == math.inf:
        raise ValueError("infinite beta has no finite log partition function")
    if beta == 0.0:
        return n_sites * LOG2
    ls, lc = math.log(math.sinh(beta)), math.log(math.cosh(beta))
    return n_sites * LOG2 + float(np.logaddexp(n_sites * ls, n_sites * lc))


# ---------------------------------------------------------------------------
# Non-Hermitian transfer matrices (trace-norm models)
# ---------------------------------------------------------------------------

# Basis ordering for the 4-dim X-noise step: index 2*b1 + b2 encodes the spin
# pair (s1, s2) with b = 0 meaning s = +1. A step maps (s_i, s_{i+1}) to
# (s_{i+1}, s_{i+2}) and carries exp[beta*s_i*s_{i+2} + i(pi/8)(s_i s_{i+1}
# + s_{i+1} s_{i+2}) - i(pi/2) s_{i+1}]: the full chain weight per site is
# then an imaginary pi/4 nearest-neighbor coupling, a real next-nearest
# coupling, and an imaginary pi/2 field.
INSERT_X = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
INSERT_Z = np.diag([1.0, -1.0]).astype(complex)


def transfer_step_x(beta: float) -> np.ndarray:
    t = np.zeros((4, 4), dtype=complex)
    for b1 in (0, 1):
        s1 = 1 - 2 * b1
        for b2 in (0, 1):
            s2 = 1 - 2 * b2
            for b3 in (0, 1):
                s3 = 1 - 2 * b3
                w = np.exp(
                    beta * s1 * s3
                    + 1j * (np.pi / 8) * (s1 * s2 + s2 * s3)
                    - 1j * (np.pi / 2) * s2
                )
                t[2 * b1 + b2, 2 * b2 + b3] = w
    return t


def transfer_step_z(beta: float) -> np.ndarray:
    """Per-site 2x2 step for Z noise, up to a constant phase that cancels in
    every correlator ratio: [[e^b, 1], [1, -e^{-b}]]."""
    return np.array([[np.exp(beta), 1.0], [1.0, -np.exp(-beta)]], dtype=complex)


@dataclass(frozen=True)
class TransferOperator:
    kind: str  # "ising" | "nonhermitian_X" | "nonhermitian_Z"
    matrix: np.ndarray
    insertion: np.ndarray


def transfer_operator(kind: str, beta: float) -> TransferOperator:
    if kind == "ising":
        m = np.array(
            [[np.exp(beta), np.exp(-beta)], [np.exp(-beta), np.exp(beta)]],
            dtype=complex,
        )
        return TransferOperator(kind, m, INSERT_Z.copy())
    if kind == "nonhermitian_X":
        return TransferOperator(kind, transfer_step_x(beta), INSERT_X.copy())
    if kind == "nonhermitian_Z":
        return TransferOperator(kind, transfer_step_z(beta), INSERT_Z.copy())
    raise ValueError(f"unknown transfer kind {kind!r}")


def site_betas(two_n: int, beta_even: float, beta_odd: float) -> np.ndarray:
    """Per-site inverse temperatures on the ring (even-index, odd-index)."""
    betas = np.empty(two_n)
    betas[0::2] = beta_even
    betas[1::2] = beta_odd
    return betas


def _step_sequence_x(two_n: int, beta_even: float, beta_odd: float) -> np.ndarray:
    """(2N, 4, 4) step matrices; step i carries the coupling of site i+1.

    The next-nearest coupling s_i s_{i+2} inside step i is the interaction
    generated by noise on site (i+1) mod 2N, so mixed sublattice rates
    alternate with that offset.
    """
    betas = site_betas(two_n, beta_even, beta_odd)
    steps = np.empty((two_n, 4, 4), dtype=complex)
    for i in range(two_n):
        steps[i] = transfer_step_x(betas[(i + 1) % two_n])
    return steps


def _scaled_trace(mats: np.ndarray, insert: np.ndarray | None = None,
                  s_bits: np.ndarray | None = None) -> tuple[complex, float]:
    """Trace of an ordered product with per-step rescaling.

    Returns (trace_of_scaled_product, log_scale); the true trace is
    trace * exp(log_scale). Insertions multiply step i on the left when
    s_bits[i] is set.
    """
    n = mats.shape[0]
    d = mats.shape[1]
    acc = np.eye(d, dtype=complex)
    log_scale = 0.0
    for i in range(n):
        m = mats[i]
        if s_bits is not None and s_bits[i]:
            m = insert @ m
        acc = acc @ m
        mx = np.abs(acc).max()
        if mx == 0.0:
            return 0.0 + 0.0j, -math.inf
        acc /= mx
        log_scale += math.log(mx)
    return complex(np.trace(acc)), log_scale


def nonhermitian_correlator(two_n: int, S, kind: str, beta: float | None = None,
                            beta_even: float | None = None,
                            beta_odd: float | None = None) -> float:
    """<prod_{i in S} sigma_i> under the non-Hermitian chain of the given kind.

    kind "X" or "Z" uses a uniform beta; kind "mixed" alternates the X-type
    coupling between the two sublattices (beta_even, beta_odd). Evaluated as a
    ratio of transfer-matrix traces with diagonal sign insertions at the sites
    in S; the imaginary residue of the ratio is asserted small.
    """
    s_bits = np.zeros(two_n, dtype=bool)
    for i in S:
        s_bits[int(i) % two_n] ^= True
    if kind == "Z":
        steps = np.broadcast_to(transfer_step_z(beta), (two_n, 2, 2)).copy()
        insert = INSERT_Z
    elif kind == "X":
        steps = _step_sequence_x(two_n, beta, beta)
        insert = INSERT_X
    elif kind == "mixed":
        steps = _step_sequence_x(two_n, beta_even, beta_odd)
        insert = INSERT_X
    else:
        raise ValueError(f"unknown kind {kind!r}")
    tr_num, log_num = _scaled_trace(steps, insert, s_bits)
    tr_den, log_den = _scaled_trace(steps)
    if tr_num == 0.0:
        return 0.0
    val = (tr_num / tr_den) * math.exp(log_num - log_den)
    # correlators live in [-1, 1]; the residue tolerance is absolute on that scale
    if abs(val.imag) > 1e-10 * max(abs(val), 1.0):
        raise FloatingPointError(f"correlator has imaginary residue {val.imag:.3e}")
    return float(val.real)


# ---------------------------------------------------------------------------
# Closed-form partition/normalization constants (log-magnitude + exact phase)
# ---------------------------------------------------------------------------


def log_zx_closed(two_n: int, beta: float) -> tuple[float, int]:
    """Partition function of the X-noise chain on two_n = 2N sites.

    Z = 2 [ (sqrt(2 e^{4b} - 1) + 1)^{2N} + (sqrt(2 e^{4b} - 1) - 1)^{2N} ]
        / ( (2i)^N e^{2 b N} )
    returned as (log magnitude, phase exponent k) with the value equal to
    magnitude * i^k; k = -N mod 4.
    """
    n = two_n // 2
    root = math.sqrt(2.0 * math.exp(4.0 * beta) - 1.0)
    la, lb = math.log(root + 1.0), (math.log(root - 1.0) if root > 1.0 else -math.inf)
    log_mag = (
        LOG2
        + float(np.logaddexp(two_n * la, two_n * lb))
        - n * LOG2
        - 2.0 * beta * n
    )
    return log_mag, (-n) % 4


def log_zz_closed(two_n: int, beta: float) -> tuple[float, int]:
    """Partition function of the Z-noise chain: lam_pm = sinh b +- sqrt(sinh^2 b + 2),
    Z = lam_+^{2N} + lam_-^{2N} (always positive; phase exponent 0)."""
    s = math.sinh(beta)
    r = math.sqrt(s * s + 2.0)
    lp, lm = math.log(r + s), math.log(r - s)  # |lam_+|, |lam_-|
    return float(np.logaddexp(two_n * lp, two_n * lm)), 0


def log_cx_closed(two_n: int, beta: float) -> float:
    """log C_X = log[ 2^{3N-1} e^{4 b N} / ((root+1)^{2N} + (root-1)^{2N}) ]."""
    n = two_n // 2
    root = math.sqrt(2.0 * math.exp(4.0 * beta) - 1.0)
    la, lb = math.log(root + 1.0), (math.log(root - 1.0) if root > 1.0 else -math.inf)
    return (3 * n - 1) * LOG2 + 4.0 * beta * n - float(np.logaddexp(two_n * la, two_n * lb))


def log_cz_closed(two_n: int, beta: float) -> float:
    """log C_Z = log[ 2^{4N} e^{4 b N} / (mu_+^{2N} + mu_-^{2N}) ] with
    mu_pm = e^{2b} - 1 +- sqrt(e^{4b} + 6 e^{2b} + 1)."""
    n = two_n // 2
    e2 = math.exp(2.0 * beta)
    root = math.sqrt(e2 * e2 + 6.0 * e2 + 1.0)
    lp, lm = math.log(root + e2 - 1.0), math.log(root - (e2 - 1.0))
    return 4 * n * LOG2 + 4.0 * beta * n - float(np.logaddexp(two_n * lp, two_n * lm))


def log_c_mixed(two_n: int, beta_even: float, beta_odd: float) -> float:
    """Normalization of the mixed-rate model: sum_S <sigma_S> over all subsets.

    Equals 2^{2N} prod_i (T_i)_{11} / Tr prod_i T_i, evaluated numerically in
    log form; the phase is asserted to cancel exactly.
    """
    steps = _step_sequence_x(two_n, beta_even, beta_odd)
    tr, log_scale = _scaled_trace(steps)
    n = two_n // 2
    betas = site_betas(two_n, beta_even, beta_odd)
    # prod of the top-left entries e^{beta - i pi/4} over all steps
    log_num_mag = float(np.sum(betas))
    num_phase = complex(np.exp(-1j * np.pi / 4 * two_n))
    val = num_phase / tr  # the 2^{2N} factor stays in log space (large rings)
    if abs(val.imag) > 1e-10 * abs(val):
        raise FloatingPointError("mixed normalization constant has residual phase")
    if val.real <= 0:
        raise FloatingPointError("mixed normalization constant not positive")
    return math.log(val.real) + two_n * LOG2 + log_num_mag - log_scale


def trace_transfer_power(kind: str, two_n: int, beta: float) -> tuple[complex, float]:
    """Direct Tr[T^{two_n}] for cross-checking the closed forms.

    Returns (trace_of_scaled_product, log_scale) as in _scaled_trace.
    """
    if kind == "X":
        steps = _step_sequence_x(two_n, beta, beta)
    elif kind == "Z":
        steps = np.broadcast_to(transfer_step_z(beta), (two_n, 2, 2)).copy()
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return _scaled_trace(steps)


# ---------------------------------------------------------------------------
# Syndrome statistics for on-site noise
# ---------------------------------------------------------------------------


def log_error_class_prob(n_sites: int, p: float, e_weight: int) -> float:
    """log[ Pr(e) + Pr(complement of e) ] for iid Bernoulli(p) errors on a ring.

    This is the probability of the syndrome class {e, e_complement} on one
    sublattice under on-site X noise (the error pattern and its complement
    produce the same syndrome).
    """
    if p == 0.0:
        return 0.0 if e_weight == 0 else -math.inf
    if p == 1.0:
        return 0.0 if e_weight == n_sites else -math.inf
    lp, lq = math.log(p), math.log1p(-p)
    a = e_weight * lp + (n_sites - e_weight) * lq
    b = (n_sites - e_weight) * lp + e_weight * lq
    return float(np.logaddexp(a, b))


# ---------------------------------------------------------------------------
# Plaquette Ising model (2D, cylinder)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlaquetteModel:
    """Four-spin Ising model on a width x height cylinder (periodic in x).

    Couplings beta sit on all elementary squares; include_boundary adds
    two-spin couplings beta on the horizontal bonds of rows 1 and height.
    """

    width: int
    height: int
    beta: float
    include_boundary: bool = False

    def __post_init__(self):
        if self.width < 2 or self.width % 2:
            raise ValueError("width must be even and >= 2")
        if self.height < 1:
            raise ValueError("height must be positive")
        if self.width * self.height > 22:
            raise ValueError("brute-force plaquette model limited to width*height <= 22")

    def site(self, x: int, y: int) -> int:
        """Bit index of site (x, y), x mod width, y in 1..height."""
        return (y - 1) * self.width + (x % self.width)

    def plaquette_mask(self, x: int, y: int) -> int:
        """Corners of the elementary square whose lower-left site is (x, y)."""
        if not 1 <= y <= self.height - 1:
            raise ValueError("plaquette row out of range")
        return (
            (1 << self.site(x, y))
            | (1 << self.site(x + 1, y))
            | (1 << self.site(x, y + 1))
            | (1 << self.site(x + 1, y + 1))
        )

    def bond_mask(self, x: int, y: int) -> int:
        return (1 << self.site(x, y)) | (1 << self.site(x + 1, y))

    def interaction_masks(self) -> list[int]:
        masks = [
            self.plaquette_mask(x, y)
            for y in range(1, self.height)
            for x in range(self.width)
        ]
        if self.include_boundary:
            rows = {1, self.height}
            for y in sorted(rows):
                masks += [self.bond_mask(x, y) for x in range(self.width)]
        return masks


def _parity_of_and(configs: np.ndarray, mask: int) -> np.ndarray:
    """Parity of popcount(configs & mask), vectorized (0 or 1)."""
    return (np.bitwise_count(configs & np.int64(mask)) & 1).astype(np.int64)


@lru_cache(maxsize=8)
def _pim_weights(model: PlaquetteModel) -> np.ndarray:
    """Boltzmann weight of every configuration (size 2^(W*H))."""
    nbits = model.width * model.height
    configs = np.arange(1 << nbits, dtype=np.int64)
    energy = np.zeros(len(configs))
    for mask in model.interaction_masks():
        energy += model.beta * (1.0 - 2.0 * _parity_of_and(configs, mask))
    return np.exp(energy - energy.max())


def pim_brute_correlator(model: PlaquetteModel, s_mask: int) -> float:
    """Exact <sigma_S> by full configuration enumeration; S given as a bitmask."""
    w = _pim_weights(model)
    configs = np.arange(len(w), dtype=np.int64)
    chi = 1.0 - 2.0 * _parity_of_and(configs, s_mask)
    return float(np.dot(w, chi) / w.sum())


def pim_transfer_correlators(model: PlaquetteModel, s_masks) -> np.ndarray:
    """<sigma_S> for many subsets by row-to-row transfer (2^width states).

    Exact for any height; used when enumerating whole syndrome spans where the
    full-configuration route would be too slow.
    """
    W, H, beta = model.width, model.height, model.beta
    nstates = 1 << W
    states = np.arange(nstates, dtype=np.int64)
    # bond-pattern bits b_x(s) = s_x xor s_{x+1} around the ring
    rolled = ((states >> 1) | ((states & 1) << (W - 1))) & (nstates - 1)
    bonds = states ^ rolled
    nbonds = np.bitwise_count(bonds).astype(np.float64)  # number of -1 products
    # plaquette transfer between adjacent rows: sum_x s s s s =
    # W - 2*popcount(b(s) xor b(s'))
    diff = np.bitwise_count(bonds[:, None] ^ bonds[None, :]).astype(np.float64)
    T = np.exp(beta * (W - 2.0 * diff))
    bnd = np.exp(beta * (W - 2.0 * nbonds)) if model.include_boundary else np.ones(nstates)

    s_masks = list(s_masks)
    B = len(s_masks)
    row_chi = np.ones((B, H, nstates))
    for b, m in enumerate(s_masks):
        for y in range(1, H + 1):
            row_bits = (m >> ((y - 1) * W)) & (nstates - 1)
            row_chi[b, y - 1] = 1.0 - 2.0 * (
                np.bitwise_count(states & np.int64(row_bits)) & 1
            )
    # numerator and denominator propagated together; denominator is the B=1
    # all-ones mask, done separately below
    def propagate(chi):
        v = bnd[None, :] * chi[:, 0, :]
        for y in range(1, H):
            v = (v @ T) * chi[:, y, :]
        if H > 1:
            v = v * bnd[None, :]
        else:
            # single row: boundary factor must not be applied twice
            pass
        return v.sum(axis=1)

    num = propagate(row_chi)
    den = propagate(np.ones((1, H, nstates)))
    return num / den[0]


def pim_tau_factorized(model: PlaquetteModel, s_mask: int) -> float:
    """<sigma_S> of the open-boundary PIM via the exact row change of variables.

    Column-wise products tau_{x,y} = sigma_{x,y-1} sigma_{x,y} turn every
    plaquette into a nearest-neighbor bond inside one row, so rows 2..H are
    independent Ising rings and row 1 is free. The correlator factorizes into
    ring multi-spin correlators of the per-row insertion patterns; it vanishes
    iff some column has an odd number of insertions (the free row-1 spin).
    """
    if model.include_boundary:
        raise ValueError("the factorization holds only without boundary terms")
    W, H = model.width, model.height
    # suffix parity per column: c_{x,y} = parity(#{y' >= y with (x,y') in S})
    val = 1.0
    suffix = [0] * W
    per_row_positions = {y: [] for y in range(1, H + 1)}
    for y in range(H, 0, -1):
        for x in range(W):
            if (s_mask >> model.site(x, y)) & 1:
                suffix[x] ^= 1
            if suffix[x]:
                per_row_positions[y].append(x)
    if any(suffix[x] for x in range(W)):
        return 0.0  # an unpaired free spin in row 1
    for y in range(2, H + 1):
        val *= ising_multispin_closed(W, model.beta, per_row_positions[y])
    return val


def rectangle_mask(model: PlaquetteModel, x0: int, y0: int, w: int, h: int) -> int:
    """Bitmask of the four corners (x0, y0), (x0+w, y0), (x0, y0+h), (x0+w, y0+h)."""
    if not (1 <= y0 and y0 + h <= model.height):
        raise ValueError("rectangle does not fit vertically")
    return (
        (1 << model.site(x0, y0))
        | (1 << model.site(x0 + w, y0))
        | (1 << model.site(x0, y0 + h))
        | (1 << model.site(x0 + w, y0 + h))
    )
