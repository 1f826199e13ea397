"""Small fixed-dimension complex linear algebra.

Operators are plain ``numpy`` arrays of dtype complex128 with shape (2, 2) or
(4, 4). Pure states are 1-D arrays. The computational basis is
``|1> -> (1, 0)``, ``|2> -> (0, 1)`` and joint system/probe spaces are ordered
system-major: ``|11>, |12>, |21>, |22>``.
"""

import numpy as np

ATOL_ALGEBRA = 1e-12
ATOL_POSITIVE = 1e-10

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def as_operator(a):
    """Validate and return a read-only complex operator of dimension 2 or 4."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4):
        raise ValueError(f"operator must be 2x2 or 4x4, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("operator has non-finite entries")
    return _frozen(a)


def as_state(psi):
    """Validate a pure state vector (dimension 2 or 4, unit norm within 1e-12)."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.shape[0] not in (2, 4):
        raise ValueError(f"state must be a 2- or 4-vector, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("state has non-finite amplitudes")
    if abs(np.linalg.norm(psi) - 1.0) > ATOL_ALGEBRA:
        raise ValueError("state is not normalized")
    return _frozen(psi)


def ket(i, dim=2):
    """Basis vector ``|i>`` using the 1-based labels of the two hypotheses."""
    if not 1 <= i <= dim:
        raise ValueError(f"basis label {i} out of range for dim {dim}")
    v = np.zeros(dim, dtype=complex)
    v[i - 1] = 1.0
    return _frozen(v)


def projector(psi):
    psi = np.asarray(psi, dtype=complex)
    return _frozen(np.outer(psi, psi.conj()))


def matmul(a, b):
    a, b = as_operator(a), as_operator(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return _frozen(a @ b)


def adjoint(a):
    return _frozen(as_operator(a).conj().T)


def tensor(a, b):
    """Kronecker product of two qubit operators, system factor first."""
    a, b = as_operator(a), as_operator(b)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError("tensor is only defined for pairs of 2x2 operators")
    return _frozen(np.kron(a, b))


def is_hermitian(a, atol=ATOL_POSITIVE):
    a = np.asarray(a)
    return bool(np.abs(a - a.conj().T).max() <= atol)


def is_unitary(a, atol=ATOL_ALGEBRA):
    a = np.asarray(a)
    return bool(np.abs(a.conj().T @ a - np.eye(a.shape[0])).max() <= atol)


def is_density(rho, atol=ATOL_POSITIVE):
    rho = np.asarray(rho)
    if not is_hermitian(rho, atol):
        return False
    if abs(np.trace(rho) - 1.0) > atol:
        return False
    herm = (rho + rho.conj().T) / 2
    return bool(np.linalg.eigvalsh(herm).min() >= -atol)


def check_density(rho):
    rho = as_operator(rho)
    if not is_density(rho):
        raise ValueError("input is not a valid density operator")
    return rho


def partial_trace_probe(a):
    """Trace out the probe (second) factor of a 4x4 system-major density operator."""
    a = check_density(a)
    if a.shape != (4, 4):
        raise ValueError("partial_trace_probe expects a 4x4 operator")
    return _frozen(np.einsum("ipjp->ij", a.reshape(2, 2, 2, 2)))


def fidelity_pure(s, rho):
    """Return ``<s|rho|s>`` for a pure state ``s`` and density operator ``rho``."""
    s = as_state(s)
    rho = check_density(rho)
    if s.shape[0] != rho.shape[0]:
        raise ValueError("dimension mismatch between state and operator")
    return float(np.real(s.conj() @ rho @ s))


def rotation(beta):
    """Real rotation by ``beta`` in the (|1>, |2>) plane.

    Maps ``|1>`` to ``cos(beta)|1> + sin(beta)|2>``, i.e. ``exp(-i beta sigma_y)``.
    """
    c, s = np.cos(beta), np.sin(beta)
    return _frozen([[c, -s], [s, c]])


def axis_angle_unitary(vec):
    """SU(2) element ``exp(-i |v|/2 n.sigma)`` for a rotation vector ``v = |v| n``."""
    vec = np.asarray(vec, dtype=float)
    angle = float(np.linalg.norm(vec))
    if angle == 0.0:
        return _frozen(I2)
    n = vec / angle
    gen = n[0] * SX + n[1] * SY + n[2] * SZ
    return _frozen(np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * gen)


def psd_sqrt(a):
    """Square root of a Hermitian positive semidefinite operator."""
    a = np.asarray(a, dtype=complex)
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    return _frozen((v * np.sqrt(w)) @ v.conj().T)


def system_kraus(joint, probe_in, probe_out):
    """Effective system operator ``(I x <probe_out|) joint (I x |probe_in>)``.

    ``joint`` is any 4x4 operator on the system-major joint space; the result is
    the 2x2 Kraus operator induced on the system by preparing the probe in
    ``probe_in`` and finding it in ``probe_out``.
    """
    j = as_operator(joint)
    if j.shape != (4, 4):
        raise ValueError("joint operator must be 4x4")
    u = j.reshape(2, 2, 2, 2)
    pin = np.asarray(probe_in, dtype=complex)
    pout = np.asarray(probe_out, dtype=complex)
    return _frozen(np.einsum("apbq,p,q->ab", u, pout.conj(), pin))


def polar_unitary(a):
    """Unitary ``W`` with ``a = W sqrt(a^dag a)`` (chosen via SVD when ``a`` is singular)."""
    u, _, vh = np.linalg.svd(np.asarray(a, dtype=complex))
    return _frozen(u @ vh)


def unitary_to_rotation_vector(u):
    """Rotation vector ``v`` with ``exp(-i|v|/2 n.sigma)`` equal to ``u`` up to a global phase."""
    u = np.asarray(u, dtype=complex)
    su = u / np.sqrt(np.linalg.det(u))
    c = np.real(np.trace(su)) / 2
    ns = np.array([np.real(1j * np.trace(su @ p)) / 2 for p in PAULIS])
    if c < 0:
        c, ns = -c, -ns
    norm = float(np.linalg.norm(ns))
    if norm == 0.0:
        return (0.0, 0.0, 0.0)
    angle = 2 * np.arctan2(norm, c)
    return tuple(float(x) for x in ns / norm * angle)
