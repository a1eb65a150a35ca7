"""Exact noiseless statevector simulation of the genome feature map.

States are dense complex vectors of length 2^n.  Qubit 0 is the least
significant bit of the amplitude index.  Global phase is never
normalized away; every downstream quantity is phase-invariant.
"""

from __future__ import annotations

import numpy as np

from .genome import KernelGenome

__all__ = [
    "zero_state",
    "apply_pauli_rotation",
    "encode",
    "reduced_density",
    "num_qubits",
]

_NORM_TOL = 1e-9

# Per-qubit action of sigma_alpha on a basis bit b:
#   sigma_0 |b> = |b>            sigma_x |b> = |b^1>
#   sigma_y |b> = i(-1)^b |b^1>  sigma_z |b> = (-1)^b |b>
_FLIPS = (0, 1, 1, 0)  # whether sigma_alpha flips the bit


class SimulationError(ValueError):
    pass


def num_qubits(state: np.ndarray) -> int:
    n = int(np.log2(len(state)))
    if 2**n != len(state):
        raise SimulationError(f"state length {len(state)} is not a power of two")
    return n


def zero_state(n: int) -> np.ndarray:
    state = np.zeros(2**n, dtype=np.complex128)
    state[0] = 1.0
    return state


def _check_normalized(state: np.ndarray) -> None:
    norm2 = float(np.vdot(state, state).real)
    if abs(norm2 - 1.0) > _NORM_TOL:
        raise SimulationError(f"state not normalized: |psi|^2 = {norm2}")


def _single_qubit_factor(alpha: int, bits: np.ndarray) -> np.ndarray:
    """Scalar factor of sigma_alpha acting on basis states with bit `bits`."""
    if alpha == 0:
        return np.ones_like(bits, dtype=np.complex128)
    if alpha == 1:
        return np.ones_like(bits, dtype=np.complex128)
    signs = 1.0 - 2.0 * bits
    if alpha == 2:
        return 1j * signs
    return signs.astype(np.complex128)


def _apply_two_qubit_pauli(state: np.ndarray, alpha: int, beta: int,
                           p: int, q: int) -> np.ndarray:
    """Apply P = sigma_alpha^(p) sigma_beta^(q) to a statevector."""
    idx = np.arange(len(state))
    bits_p = (idx >> p) & 1
    bits_q = (idx >> q) & 1
    factor = _single_qubit_factor(alpha, bits_p) * _single_qubit_factor(beta, bits_q)
    flip = (_FLIPS[alpha] << p) | (_FLIPS[beta] << q)
    out = np.empty_like(state)
    out[idx ^ flip] = factor * state
    return out


def apply_pauli_rotation(state: np.ndarray, alpha: int, beta: int,
                         p: int, q: int, theta: float) -> np.ndarray:
    """Apply exp(-i theta/2 sigma_alpha^(p) sigma_beta^(q)).

    Uses P^2 = I: the result is cos(theta/2) |psi> - i sin(theta/2) P|psi>.
    """
    n = num_qubits(state)
    if p == q:
        raise SimulationError(f"gate qubits must differ, got p = q = {p}")
    if not (0 <= p < n and 0 <= q < n):
        raise SimulationError(f"qubits ({p}, {q}) out of range for n = {n}")
    for name, val in (("alpha", alpha), ("beta", beta)):
        if not 0 <= val <= 3:
            raise SimulationError(f"{name} = {val} is not a Pauli index")
    _check_normalized(state)
    half = 0.5 * theta
    p_state = _apply_two_qubit_pauli(state, alpha, beta, p, q)
    return np.cos(half) * state - 1j * np.sin(half) * p_state


def encode(genome: KernelGenome, x: np.ndarray) -> np.ndarray:
    """Statevector U(x)|0^n> with gate angles theta_g = bandwidth[j_g] * x[k_g]."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (genome.d,):
        raise SimulationError(
            f"feature vector has shape {x.shape}, expected ({genome.d},)")
    state = zero_state(genome.n)
    for g in genome.gates:
        theta = genome.bandwidths[g.j] * x[g.k]
        state = apply_pauli_rotation(state, g.alpha, g.beta, g.p,
                                     g.second_qubit(), theta)
    return state


def reduced_density(state: np.ndarray, mask: int) -> np.ndarray:
    """Partial trace onto the qubits set in `mask` (ascending qubit order).

    The returned 2^q x 2^q matrix is validated as a density matrix
    (Hermitian, unit trace, eigenvalues >= -1e-10) on every call.
    """
    n = num_qubits(state)
    if mask == 0:
        raise SimulationError("measurement mask must keep at least one qubit")
    if mask & ~((1 << n) - 1):
        raise SimulationError("mask has bits outside the qubit range")
    keep = [i for i in range(n) if (mask >> i) & 1]
    q = len(keep)
    # axis n-1-i of the reshaped tensor corresponds to qubit i (qubit 0 = LSB);
    # kept axes go first so the subsystem index orders kept qubits MSB-last
    tensor = state.reshape([2] * n)
    kept_axes = [n - 1 - i for i in reversed(keep)]
    traced_axes = [ax for ax in range(n) if ax not in kept_axes]
    tensor = np.transpose(tensor, kept_axes + traced_axes)
    matrix = tensor.reshape(2**q, 2 ** (n - q))
    rho = matrix @ matrix.conj().T

    herm = np.max(np.abs(rho - rho.conj().T))
    trace_err = abs(np.trace(rho).real - 1.0)
    if herm > 1e-12 or trace_err > 1e-12:
        raise SimulationError(
            f"invalid density matrix: hermiticity {herm:.2e}, trace error {trace_err:.2e}")
    min_eig = float(np.linalg.eigvalsh(rho).min())
    if min_eig < -1e-10:
        raise SimulationError(f"density matrix not PSD: min eigenvalue {min_eig:.2e}")
    return rho
