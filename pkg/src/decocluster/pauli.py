"""Pauli-string and stabilizer-tableau algebra over GF(2).

Pauli strings are stored in the symplectic bit representation: a string on n
qubits is i^k * X^x * Z^z with x, z in GF(2)^n and k an exponent of i (mod 4).
Commutation is decided by the symplectic form x1.z2 + z1.x2 (mod 2); phases of
products are tracked exactly in the group {+1, -1, +i, -i}.

Also provides the cluster-state constructors (1D ring and 2D cylinder on the
45-degree-rotated "brick" lattice), maximal-rate dephasing at the stabilizer
level (unrecorded Pauli measurement), and the stabilizer-formalism
entanglement negativity: half the GF(2) rank of the anticommutation matrix of
region-restricted generators, in nats.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)  # i^k for k = 0..3

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class PauliOperator:
    """Pauli string i^phase_k * prod_j X_j^{x[j]} * prod_j Z_j^{z[j]}."""

    n: int
    x: np.ndarray
    z: np.ndarray
    phase_k: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.uint8) & 1
        z = np.asarray(self.z, dtype=np.uint8) & 1
        if x.shape != (self.n,) or z.shape != (self.n,):
            raise ValueError("x/z bit vectors must have length n")
        x.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase_k", int(self.phase_k) % 4)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def identity(n: int) -> "PauliOperator":
        return PauliOperator(n, np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @staticmethod
    def from_sites(n: int, sites: dict[int, str], phase_k: int = 0) -> "PauliOperator":
        """Build from a map site -> letter in {X, Y, Z} (Y = i*X*Z)."""
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        k = phase_k
        for j, letter in sites.items():
            if not 0 <= j < n:
                raise ValueError(f"site {j} out of range for n={n}")
            if letter == "X":
                x[j] = 1
            elif letter == "Z":
                z[j] = 1
            elif letter == "Y":
                x[j] = 1
                z[j] = 1
                k += 1
            else:
                raise ValueError(f"unknown Pauli letter {letter!r}")
        return PauliOperator(n, x, z, k)

    @staticmethod
    def from_label(label: str, phase_k: int = 0) -> "PauliOperator":
        sites = {j: c for j, c in enumerate(label) if c != "I"}
        return PauliOperator.from_sites(len(label), sites, phase_k)

    # -- algebra -----------------------------------------------------------

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        if self.n != other.n:
            raise ValueError("operator sizes differ")
        # moving Z^z1 through X^x2 picks up (-1)^(z1.x2)
        k = self.phase_k + other.phase_k + 2 * int(np.dot(self.z, other.x) % 2)
        return PauliOperator(self.n, self.x ^ other.x, self.z ^ other.z, k)

    def commutes(self, other: "PauliOperator") -> bool:
        s = (int(np.dot(self.x, other.z)) + int(np.dot(self.z, other.x))) % 2
        return s == 0

    def restrict(self, region) -> "PauliOperator":
        """Drop all tensor factors outside `region` (phase kept as-is)."""
        mask = np.zeros(self.n, np.uint8)
        mask[np.asarray(list(region), dtype=int)] = 1
        return PauliOperator(self.n, self.x & mask, self.z & mask, self.phase_k)

    @property
    def phase(self) -> complex:
        return PHASES[self.phase_k]

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def support(self) -> np.ndarray:
        return np.nonzero(self.x | self.z)[0]

    def is_identity_string(self) -> bool:
        return not (self.x.any() or self.z.any())

    def to_label(self) -> str:
        out = []
        for xj, zj in zip(self.x, self.z):
            out.append("IXZY"[xj + 2 * zj] if not (xj and zj) else "Y")
        return "".join(out)

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix (small n only; used for cross-checks)."""
        if self.n > 12:
            raise ValueError("dense form limited to n <= 12")
        mat = np.ones((1, 1), dtype=complex)
        for xj, zj in zip(self.x, self.z):
            f = _I2
            if xj and zj:
                f = _X @ _Z
            elif xj:
                f = _X
            elif zj:
                f = _Z
            mat = np.kron(mat, f)
        return self.phase * mat

    def __repr__(self):
        sign = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase_k]
        return f"{sign}{self.to_label()}"


@dataclass
class StabilizerTableau:
    """A list of independent, pairwise-commuting Pauli generators."""

    n: int
    gens: list[PauliOperator] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gens:
            if g.n != self.n:
                raise ValueError("generator size mismatch")

    def validate(self) -> None:
        """Check pairwise commutation and GF(2) independence; raise on failure."""
        m = len(self.gens)
        for i in range(m):
            for j in range(i + 1, m):
                if not self.gens[i].commutes(self.gens[j]):
                    raise ValueError(f"generators {i} and {j} anticommute")
        if gf2_rank(self.symplectic_matrix()) != m:
            raise ValueError("generators are dependent over GF(2)")

    def symplectic_matrix(self) -> np.ndarray:
        """(m, 2n) bit matrix [X | Z] of the generators."""
        if not self.gens:
            return np.zeros((0, 2 * self.n), np.uint8)
        return np.array([np.concatenate([g.x, g.z]) for g in self.gens], np.uint8)

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.n, list(self.gens))

    def __len__(self):
        return len(self.gens)


# ---------------------------------------------------------------------------
# GF(2) linear algebra (dense uint8; sizes here are modest)
# ---------------------------------------------------------------------------


def gf2_rank(a: np.ndarray) -> int:
    """Rank of a bit matrix by Gaussian elimination modulo 2."""
    a = (np.asarray(a, dtype=np.uint8) & 1).copy()
    m, ncols = a.shape
    r = 0
    for c in range(ncols):
        if r == m:
            break
        pivots = np.nonzero(a[r:, c])[0]
        if pivots.size == 0:
            continue
        p = r + pivots[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        hit = np.nonzero(a[:, c])[0]
        hit = hit[hit != r]
        a[hit] ^= a[r]
        r += 1
    return r


def gf2_solve(a: np.ndarray, b: np.ndarray):
    """One solution x of A x = b over GF(2), or None if inconsistent.

    A is (m, k); b is (m,). Returns x of length k (a particular solution).
    """
    a = (np.asarray(a, dtype=np.uint8) & 1).copy()
    b = (np.asarray(b, dtype=np.uint8) & 1).copy()
    m, k = a.shape
    aug = np.concatenate([a, b[:, None]], axis=1)
    r = 0
    pivot_cols = []
    for c in range(k):
        if r == m:
            break
        pivots = np.nonzero(aug[r:, c])[0]
        if pivots.size == 0:
            continue
        p = r + pivots[0]
        if p != r:
            aug[[r, p]] = aug[[p, r]]
        hit = np.nonzero(aug[:, c])[0]
        hit = hit[hit != r]
        aug[hit] ^= aug[r]
        pivot_cols.append(c)
        r += 1
    # inconsistent iff a zero row of A has b-bit 1
    if np.any((aug[r:, :k].sum(axis=1) == 0) & (aug[r:, k] == 1)):
        return None
    x = np.zeros(k, np.uint8)
    for i, c in enumerate(pivot_cols):
        x[c] = aug[i, k]
    return x


def gf2_nullspace(a: np.ndarray) -> np.ndarray:
    """Basis (rows) of the right nullspace of A over GF(2)."""
    a = (np.asarray(a, dtype=np.uint8) & 1).copy()
    m, k = a.shape
    r = 0
    pivot_cols = []
    for c in range(k):
        if r == m:
            break
        pivots = np.nonzero(a[r:, c])[0]
        if pivots.size == 0:
            continue
        p = r + pivots[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        hit = np.nonzero(a[:, c])[0]
        hit = hit[hit != r]
        a[hit] ^= a[r]
        pivot_cols.append(c)
        r += 1
    free_cols = [c for c in range(k) if c not in pivot_cols]
    basis = np.zeros((len(free_cols), k), np.uint8)
    for idx, fc in enumerate(free_cols):
        basis[idx, fc] = 1
        for i, pc in enumerate(pivot_cols):
            basis[idx, pc] = a[i, fc]
    return basis


# ---------------------------------------------------------------------------
# Cluster-state constructors
# ---------------------------------------------------------------------------


def build_cluster_1d(two_n: int) -> StabilizerTableau:
    """Periodic 1D cluster state on two_n qubits: generators Z_{j-1} X_j Z_{j+1}."""
    if two_n < 4 or two_n % 2:
        raise ValueError("two_n must be even and >= 4")
    gens = [
        PauliOperator.from_sites(
            two_n, {(j - 1) % two_n: "Z", j: "X", (j + 1) % two_n: "Z"}
        )
        for j in range(two_n)
    ]
    return StabilizerTableau(two_n, gens)


def sublattice_symmetry(two_n: int, which: str) -> PauliOperator:
    """Product of X over one sublattice of the ring: 'A' = even indices, 'B' = odd."""
    start = 0 if which == "A" else 1
    return PauliOperator.from_sites(two_n, {j: "X" for j in range(start, two_n, 2)})


def cylinder_site_index(width: int, x: int, y: int) -> int:
    """Flat index of site (x, y) on the cylinder; rows y = 1..H, x mod width."""
    return (y - 1) * width + (x % width)


def cylinder_neighbors(width: int, height: int, x: int, y: int) -> list[tuple[int, int]]:
    """Neighbors of (x, y) on the brick lattice (periodic in x, open in y).

    Odd rows connect upward to (x, y+1) and (x+1, y+1); even rows to
    (x, y+1) and (x-1, y+1). The downward links mirror these so that
    adjacency is symmetric.
    """
    out = []
    if y + 1 <= height:
        dxs = (0, 1) if y % 2 == 1 else (0, -1)
        out += [((x + dx) % width, y + 1) for dx in dxs]
    if y - 1 >= 1:
        dxs = (0, -1) if (y - 1) % 2 == 1 else (0, 1)
        out += [((x + dx) % width, y - 1) for dx in dxs]
    return out


def build_cluster_2d_cylinder(width: int, height: int) -> StabilizerTableau:
    """2D cluster state on a cylinder of the 45-degree-rotated square lattice.

    One generator per site: X on the site, Z on every lattice neighbor.
    Bulk generators have weight 5; generators on the two open rows have
    weight 3 (X plus the two inward Z legs). Row-wise X products are exact
    symmetries of the tableau for every row.
    """
    if width < 2 or width % 2:
        raise ValueError("width must be even and >= 2")
    if height < 1:
        raise ValueError("height must be positive")
    n = width * height
    gens = []
    for y in range(1, height + 1):
        for x in range(width):
            sites = {cylinder_site_index(width, x, y): "X"}
            for (xn, yn) in cylinder_neighbors(width, height, x, y):
                sites[cylinder_site_index(width, xn, yn)] = "Z"
            gens.append(PauliOperator.from_sites(n, sites))
    return StabilizerTableau(n, gens)


def row_symmetry_2d(width: int, height: int, y: int) -> PauliOperator:
    """Product of X along row y of the cylinder (an exact symmetry)."""
    n = width * height
    return PauliOperator.from_sites(
        n, {cylinder_site_index(width, x, y): "X" for x in range(width)}
    )


# ---------------------------------------------------------------------------
# Stabilizer-level channels and negativity
# ---------------------------------------------------------------------------


def maximal_dephase(tab: StabilizerTableau, kraus_list: list[PauliOperator]) -> StabilizerTableau:
    """Dephase at the maximal rate p = 1/2 with each Pauli in kraus_list.

    Equivalent to measuring each operator without recording the outcome: for
    each P, the first generator anticommuting with P (deterministic sweep
    order) is multiplied into every other anticommuting generator and then
    dropped. Idempotent per Kraus operator.
    """
    gens = list(tab.gens)
    for P in kraus_list:
        pivot = None
        for i, g in enumerate(gens):
            if not g.commutes(P):
                pivot = i
                break
        if pivot is None:
            continue
        gp = gens[pivot]
        gens = [
            (g if g.commutes(P) else gp * g)
            for i, g in enumerate(gens)
            if i != pivot
        ]
    return StabilizerTableau(tab.n, gens)


def anticommutation_matrix(tab: StabilizerTableau, region) -> np.ndarray:
    """Bit matrix K with K_ij = 1 iff region-restricted generators i, j anticommute."""
    region = np.asarray(sorted(region), dtype=int)
    m = len(tab.gens)
    if m == 0:
        return np.zeros((0, 0), np.uint8)
    X = np.array([g.x[region] for g in tab.gens], np.uint8)
    Z = np.array([g.z[region] for g in tab.gens], np.uint8)
    # symplectic form on the restriction; float matmul is exact here
    K = (X.astype(np.float64) @ Z.T.astype(np.float64)
         + Z.astype(np.float64) @ X.T.astype(np.float64))
    return (K.astype(np.int64) & 1).astype(np.uint8)


def negativity_stabilizer(tab: StabilizerTableau, region) -> float:
    """Logarithmic negativity of a stabilizer state for a bipartition, in nats.

    Equals (1/2) * rank_GF(2)(K) * log 2 where K is the anticommutation
    matrix of the generators restricted to `region`.
    """
    region = set(int(r) for r in region)
    if not region or len(region) >= tab.n:
        warnings.warn("negativity over an empty or full region is 0 by definition")
        return 0.0
    K = anticommutation_matrix(tab, region)
    r = gf2_rank(K)
    return 0.5 * r * np.log(2.0)
