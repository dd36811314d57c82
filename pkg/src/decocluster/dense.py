"""Brute-force density-matrix oracle for small qubit counts.

Everything here is deliberately naive: full 2^n state vectors (n <= 12) and
2^n x 2^n density matrices (n <= 10). The stat-mech, stabilizer and
tensor-network routes elsewhere in the package are validated against these
numbers, so this module avoids any shortcut those routes might share.

Fidelity uses the Uhlmann form F(rho, sigma) = Tr sqrt(sqrt(rho) sigma
sqrt(rho)), evaluated as the nuclear norm ||sqrt(sigma) sqrt(rho)||_1 via
SVD: the eigenvalues of sqrt(rho) sigma sqrt(rho) are the squared singular
values of that product, so this route avoids squaring the dynamic range and
keeps ~1e-15 absolute accuracy on near-singular decohered states.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliOperator, StabilizerTableau

MAX_STATE_QUBITS = 12
MAX_OPERATOR_QUBITS = 10


def _check_n_operator(n: int) -> None:
    if n > MAX_OPERATOR_QUBITS:
        raise ValueError(f"dense operators limited to n <= {MAX_OPERATOR_QUBITS}, got {n}")


def check_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> None:
    """Raise if rho is not Hermitian / unit-trace / PSD within tolerance."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > 1e-12:
        raise ValueError("density matrix not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-12:
        raise ValueError("density matrix trace != 1")
    w = np.linalg.eigvalsh(rho)
    if w.min() < -tol:
        raise ValueError(f"density matrix has eigenvalue {w.min():.3e} < -{tol}")


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


def apply_pauli_to_vec(P: PauliOperator, psi: np.ndarray) -> np.ndarray:
    """Apply a Pauli string to a state vector without building its matrix."""
    n = P.n
    dim = psi.shape[0]
    idx = np.arange(dim)
    # qubit 0 is the most significant bit, matching kron ordering
    xmask = 0
    for j in range(n):
        if P.x[j]:
            xmask |= 1 << (n - 1 - j)
    zbits = np.zeros(dim, dtype=np.int64)
    for j in range(n):
        if P.z[j]:
            zbits += (idx >> (n - 1 - j)) & 1
    # X^x Z^z |b> = (-1)^(z.b) |b^x>; amplitudes move from b to b^x
    signs = np.where(zbits % 2 == 0, 1.0, -1.0)
    out = np.zeros_like(psi)
    out[idx ^ xmask] = P.phase * signs * psi
    return out


def densify(tab: StabilizerTableau) -> np.ndarray:
    """Unit-norm state vector stabilized by every generator of a full-rank tableau.

    Applies the projector product prod_i (1 + g_i)/2 to a reference state,
    falling back to other references if the first is annihilated.
    """
    n = tab.n
    if n > MAX_STATE_QUBITS:
        raise ValueError(f"dense states limited to n <= {MAX_STATE_QUBITS}")
    if len(tab.gens) != n:
        raise ValueError("densify requires a full-rank (pure-state) tableau")
    dim = 1 << n
    references = []
    plus = np.full(dim, 1.0 / np.sqrt(dim), dtype=complex)
    references.append(plus)
    zero = np.zeros(dim, dtype=complex)
    zero[0] = 1.0
    references.append(zero)
    rng = np.random.default_rng(7)
    rand = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    references.append(rand / np.linalg.norm(rand))
    for psi in references:
        out = psi
        for g in tab.gens:
            out = (out + apply_pauli_to_vec(g, out)) / 2.0
        nrm = np.linalg.norm(out)
        if nrm > 1e-8:
            out = out / nrm
            return out
    raise RuntimeError("all reference states annihilated by the projector product")


def density_matrix(psi: np.ndarray) -> np.ndarray:
    _check_n_operator(int(np.log2(psi.shape[0])))
    return np.outer(psi, psi.conj())


# ---------------------------------------------------------------------------
# Channels
# ---------------------------------------------------------------------------


def apply_pauli_channel(rho: np.ndarray, p: float, kraus: PauliOperator) -> np.ndarray:
    """(1-p) rho + p P rho P for a single Pauli string P."""
    if not 0.0 <= p <= 0.5:
        raise ValueError("rate must lie in [0, 1/2]")
    _check_n_operator(kraus.n)
    if p == 0.0:
        return rho
    P = kraus.to_matrix()
    out = (1.0 - p) * rho + p * (P @ rho @ P.conj().T)
    return (out + out.conj().T) / 2.0  # enforce Hermiticity exactly


def decohered_cluster_1d(two_n: int, p, noise_kind: str = "X") -> np.ndarray:
    """Density matrix of the 1D cluster ring after on-site dephasing.

    noise_kind "X" or "Z" applies the same rate p on every site; "mixed"
    expects p = (p_even, p_odd) and applies X-type noise with p_even on
    even-index sites and p_odd on odd-index sites (the boundary-decoherence
    model with two sublattice rates).
    """
    from .pauli import build_cluster_1d

    _check_n_operator(two_n)
    rho = density_matrix(densify(build_cluster_1d(two_n)))
    if noise_kind in ("X", "Z"):
        for j in range(two_n):
            rho = apply_pauli_channel(
                rho, float(p), PauliOperator.from_sites(two_n, {j: noise_kind})
            )
    elif noise_kind == "mixed":
        p_even, p_odd = p
        for j in range(two_n):
            rate = p_even if j % 2 == 0 else p_odd
            rho = apply_pauli_channel(
                rho, float(rate), PauliOperator.from_sites(two_n, {j: "X"})
            )
    else:
        raise ValueError(f"unknown noise kind {noise_kind!r}")
    return rho


# ---------------------------------------------------------------------------
# Fidelity / negativity / moments
# ---------------------------------------------------------------------------


def sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    """Hermitian square root with eigenvalue clamping at 1e-12 relative."""
    w, V = np.linalg.eigh(rho)
    cut = 1e-12 * max(w.max(), 0.0)
    w = np.where(w > cut, w, 0.0)
    return (V * np.sqrt(w)) @ V.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)) in [0, 1]."""
    B = sqrtm_psd(sigma) @ sqrtm_psd(rho)
    s = np.linalg.svd(B, compute_uv=False)
    return float(min(s.sum(), 1.0 + 1e-9))


def fidelity_correlator_dense(rho: np.ndarray, x: int, y: int) -> float:
    """F(rho, O rho O) with charged operator O = Z_x Z_y."""
    n = int(np.log2(rho.shape[0]))
    O = PauliOperator.from_sites(n, {x: "Z", y: "Z"}).to_matrix()
    return fidelity(rho, O @ rho @ O.conj().T)


def partial_transpose(rho: np.ndarray, region, n: int) -> np.ndarray:
    """Transpose the tensor factors in `region` (region indices are qubits)."""
    region = sorted(int(r) for r in region)
    t = rho.reshape((2,) * (2 * n))
    for q in region:
        t = np.swapaxes(t, q, n + q)
    return t.reshape(rho.shape)


def negativity_dense(rho: np.ndarray, region) -> float:
    """log ||rho^{T_R}||_1 from the eigenvalues of the partial transpose (nats)."""
    n = int(np.log2(rho.shape[0]))
    region = sorted(int(r) for r in region)
    if not region or len(region) >= n:
        raise ValueError("region must be a nonempty proper subset")
    pt = partial_transpose(rho, region, n)
    ev = np.linalg.eigvalsh(pt)
    return float(np.log(np.abs(ev).sum()))


def renyi_moments(rho: np.ndarray, region, alpha: int) -> tuple[float, float]:
    """(Tr[(rho^{T_R})^{2 alpha}], Tr[rho^{2 alpha}]) from eigenvalues."""
    if alpha < 2:
        raise ValueError("alpha must be an integer >= 2")
    n = int(np.log2(rho.shape[0]))
    pt = partial_transpose(rho, region, n)
    ev_pt = np.linalg.eigvalsh(pt)
    ev = np.linalg.eigvalsh(rho)
    return float(np.sum(ev_pt ** (2 * alpha))), float(np.sum(ev ** (2 * alpha)))


def renyi_negativity_dense(rho: np.ndarray, region, alpha: int) -> float:
    """(2 - 2 alpha)^-1 * log( Tr[(rho^{T_R})^{2a}] / Tr[rho^{2a}] )."""
    m_pt, m = renyi_moments(rho, region, alpha)
    return float(np.log(m_pt / m) / (2.0 - 2.0 * alpha))
