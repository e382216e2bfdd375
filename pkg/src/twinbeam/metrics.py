"""Two-qubit reductions and entanglement measures.

Post-selected two-particle states are mapped to first-quantized
two-qubit density matrices in two dual ways: paths label the particles
and the spins are the qubits (:func:`reduce_to_spin_dm`), or spins
label the particles and the paths are the qubits
(:func:`dual_relabel`).  Internal tags are traced out in both, with
the tag slots ordered by path, so the two reductions differ only by a
relabeling of the middle two basis vectors and always agree on
concurrence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OccupancyError
from .fock import FockState, Mode, Spin, Statistics, make_product_state
from .interferometer import coincidence, detect, fig1_network, postselect, run_network

DM_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

#: |up down> +- |down up> in the {uu, ud, du, dd} basis
PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2)
PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)

_SY_SY = np.kron(SIGMA_Y, SIGMA_Y)


@dataclass(frozen=True, eq=False)
class TwoQubitDM:
    """4x4 density matrix of two qubits, basis {00, 01, 10, 11}.

    ``labels`` name the two qubits: the two firing paths in the spin
    picture (lexicographically smaller path first), or the two spin
    values in the dual path picture.
    """

    matrix: np.ndarray = field(repr=False)
    labels: tuple[str, str]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"density matrix must be 4x4, got {m.shape}")
        object.__setattr__(self, "matrix", m)
        self.validate()

    def validate(self) -> None:
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=DM_TOL, rtol=0.0):
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > DM_TOL or abs(np.trace(m).imag) > DM_TOL:
            raise ValueError("density matrix trace is not 1 within tolerance")
        eigs = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        if eigs.min() < -DM_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {eigs.min()}")

    def fidelity(self, pure: np.ndarray) -> float:
        """Overlap <psi| rho |psi> with a pure state vector."""
        v = np.asarray(pure, dtype=complex)
        return float(np.real(v.conj() @ self.matrix @ v))


def _spin_index(s1: Spin, s2: Spin) -> int:
    return 2 * int(s1) + int(s2)


def reduce_to_spin_dm(state: FockState, path_x: str, path_y: str) -> TwoQubitDM:
    """Spin density matrix of a state with one particle in each given path.

    Qubit 1 is the lexicographically smaller path.  Canonical monomial
    amplitudes (fermionic reordering signs already folded in) become
    coefficients of |s1 s2> (x) |t1 t2>, and the tag factor is traced
    out.
    """
    if path_x == path_y:
        raise ValueError("the two paths must differ")
    p1, p2 = sorted((path_x, path_y))
    columns: dict[tuple[int, int], int] = {}
    entries: list[tuple[int, int, complex]] = []
    for monomial, amp in state.terms.items():
        if len(monomial) != 2 or monomial[0].path != p1 or monomial[1].path != p2:
            raise OccupancyError(
                f"monomial {monomial} does not have one particle in each of {p1!r} and {p2!r}"
            )
        m1, m2 = monomial
        tags = (m1.tag, m2.tag)
        col = columns.setdefault(tags, len(columns))
        entries.append((_spin_index(m1.spin, m2.spin), col, amp))
    if not entries:
        raise OccupancyError("state has no two-particle support on the given paths")
    v = np.zeros((4, len(columns)), dtype=complex)
    for row, col, amp in entries:
        v[row, col] += amp
    rho = v @ v.conj().T
    rho /= np.trace(rho).real
    return TwoQubitDM(rho, (p1, p2))


def dual_relabel(state: FockState, path_x: str, path_y: str) -> TwoQubitDM:
    """Path density matrix with the spins used as particle labels.

    Qubit 1 is the up particle's path, qubit 2 the down particle's, in
    the basis {XX, XY, YX, YY} with X the lexicographically smaller of
    the two paths.  Every monomial must hold exactly one up and one
    down particle on the given paths; bunched monomials (both particles
    in one path) are allowed.  Tag slots keep their canonical (path)
    order and are traced out.
    """
    if path_x == path_y:
        raise ValueError("the two paths must differ")
    p1, p2 = sorted((path_x, path_y))
    path_index = {p1: 0, p2: 1}
    eta = -1.0 if state.statistics is Statistics.FERMION else 1.0
    columns: dict[tuple[int, int], int] = {}
    entries: list[tuple[int, int, complex]] = []
    for monomial, amp in state.terms.items():
        if len(monomial) != 2 or any(m.path not in path_index for m in monomial):
            raise OccupancyError(f"monomial {monomial} is not supported on {p1!r}, {p2!r}")
        m1, m2 = monomial
        if {m1.spin, m2.spin} != {Spin.UP, Spin.DOWN}:
            raise OccupancyError(f"monomial {monomial} does not hold one up and one down spin")
        if m1.spin is Spin.UP:
            up, down, reorder = m1, m2, 1.0
        else:
            up, down, reorder = m2, m1, eta
        row = 2 * path_index[up.path] + path_index[down.path]
        tags = (m1.tag, m2.tag)
        col = columns.setdefault(tags, len(columns))
        entries.append((row, col, amp * reorder))
    if not entries:
        raise OccupancyError("state has no two-particle support on the given paths")
    v = np.zeros((4, len(columns)), dtype=complex)
    for row, col, amp in entries:
        v[row, col] += amp
    rho = v @ v.conj().T
    rho /= np.trace(rho).real
    return TwoQubitDM(rho, ("up", "down"))


def concurrence(dm: TwoQubitDM) -> float:
    """Wootters concurrence C = max(0, l1 - l2 - l3 - l4).

    The l_i are the decreasing square roots of the eigenvalues of
    rho (sy x sy) rho* (sy x sy), conjugation taken in the
    computational basis.  They are computed as the singular values of
    sqrt(rho) (sy x sy) sqrt(rho)*, which shares that spectrum but
    stays in well-conditioned Hermitian factorizations.
    """
    dm.validate()
    rho = dm.matrix
    eigvals, eigvecs = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    root = (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.conj().T
    lams = np.linalg.svd(root @ _SY_SY @ root.conj(), compute_uv=False)
    return float(max(0.0, lams[0] - lams[1] - lams[2] - lams[3]))


@dataclass(frozen=True)
class ChshSettings:
    """Four single-qubit measurement directions as unit Bloch vectors."""

    a: np.ndarray
    a_prime: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray

    def __post_init__(self):
        for name in ("a", "a_prime", "b", "b_prime"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValueError(f"setting {name} must be a 3-vector")
            if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise ValueError(f"setting {name} must have unit Bloch norm")
            object.__setattr__(self, name, v)


def default_chsh_settings() -> ChshSettings:
    """x and y on the first qubit, their diagonal combinations on the second."""
    s = 1.0 / math.sqrt(2.0)
    return ChshSettings(
        a=np.array([1.0, 0.0, 0.0]),
        a_prime=np.array([0.0, 1.0, 0.0]),
        b=np.array([s, s, 0.0]),
        b_prime=np.array([s, -s, 0.0]),
    )


def _bloch_observable(v: np.ndarray) -> np.ndarray:
    return v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z


def chsh_expectation(dm: TwoQubitDM, settings: ChshSettings | None = None) -> float:
    """Expectation of a b + a b' + a' b - a' b' in the given state."""
    dm.validate()
    settings = settings or default_chsh_settings()
    a = _bloch_observable(settings.a)
    a_p = _bloch_observable(settings.a_prime)
    b = _bloch_observable(settings.b)
    b_p = _bloch_observable(settings.b_prime)
    operator = np.kron(a, b + b_p) + np.kron(a_p, b - b_p)
    value = float(np.real(np.trace(dm.matrix @ operator)))
    bound = 2.0 * math.sqrt(2.0) + 1e-9
    if abs(value) > bound:
        raise ValueError(f"CHSH value {value} exceeds the quantum bound")
    return value


def infer_concurrence_from_chsh(dm: TwoQubitDM, statistics: Statistics) -> float:
    """Concurrence read off the default-settings CHSH value.

    Valid for the coincidence family produced by the single-splitter
    setup, whose CHSH value is +-2 sqrt(2) times the concurrence (+ for
    fermions, - for bosons).
    """
    divisor = 2.0 * math.sqrt(2.0)
    if statistics is Statistics.BOSON:
        divisor = -divisor
    return chsh_expectation(dm, default_chsh_settings()) / divisor


def distinguishability(overlap: complex) -> float:
    """Best success probability for telling the two internal tags apart."""
    mag = abs(overlap)
    if mag > 1.0 + 1e-12:
        raise ValueError(f"|overlap| = {mag} exceeds 1")
    return 1.0 - min(mag, 1.0) ** 2


def gaussian_overlap(velocity: float, delay: float, width: float) -> float:
    """Tag overlap of two equal-width Gaussian packets offset in time.

    Defined so that the squared overlap, and hence the post-selected
    entanglement, equals exp(-v**2 dt**2 / (2 sigma**2)).
    """
    if width <= 0.0:
        raise ValueError("packet width must be positive")
    return math.exp(-(velocity ** 2) * (delay ** 2) / (4.0 * width ** 2))


def tagged_opposite_spin_input(statistics: Statistics, overlap: complex) -> FockState:
    """|up> on A with tag 0, |down> on B in a tag state of given overlap with it."""
    mag = abs(overlap)
    if mag > 1.0 + 1e-12:
        raise ValueError(f"|overlap| = {mag} exceeds 1")
    residual = math.sqrt(max(0.0, 1.0 - mag ** 2))
    parallel = make_product_state(statistics, [Mode("A", Spin.UP, 0), Mode("B", Spin.DOWN, 0)])
    orthogonal = make_product_state(statistics, [Mode("A", Spin.UP, 0), Mode("B", Spin.DOWN, 1)])
    return complex(overlap) * parallel + residual * orthogonal


def coincidence_spin_dm(statistics: Statistics, overlap: complex) -> TwoQubitDM:
    """Spin state heralded by a coincidence for a tagged opposite-spin pair."""
    net = fig1_network()
    state = run_network(net, tagged_opposite_spin_input(statistics, overlap))
    _, conditional = postselect(detect(state, net.monitored), coincidence)
    return reduce_to_spin_dm(conditional.branches[0].state, "C", "D")


def complementarity_check(
    overlap: complex, statistics: Statistics
) -> tuple[float, float, float]:
    """Run the tagged pair through the full pipeline; returns (E, D, E + D).

    E is the Wootters concurrence of the coincidence spin state and D
    the tag distinguishability; their sum is the complementarity total.
    """
    entanglement = concurrence(coincidence_spin_dm(statistics, overlap))
    discrimination = distinguishability(overlap)
    return entanglement, discrimination, entanglement + discrimination


def classify_bell(dm: TwoQubitDM, tol: float = 1e-9) -> str | None:
    """Name the Bell state a density matrix equals, if any."""
    if dm.fidelity(PSI_PLUS) > 1.0 - tol:
        return "psi_plus"
    if dm.fidelity(PSI_MINUS) > 1.0 - tol:
        return "psi_minus"
    return None
