"""End-to-end experiments packaged as named, parameterized scenarios.

Each scenario builds its network, propagates the input, post-selects,
and reports yields, correlations, concurrences and CHSH values in a
:class:`~twinbeam.reporting.ScenarioReport`.  All numbers are exact
(computed from amplitudes) unless flagged as sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import StatisticsMismatchError
from .fock import FockState, Mode, Spin, Statistics, apply_spin_rotation, make_product_state
from .interferometer import (
    Network,
    build_tree,
    coincidence,
    correction_for_branch,
    detect,
    feedback_run,
    fig1_network,
    fig2_network,
    opposite_spin_input,
    run_network,
)
from .metrics import (
    TwoQubitDM,
    chsh_expectation,
    classify_bell,
    coincidence_spin_dm,
    complementarity_check,
    concurrence,
    gaussian_overlap,
    infer_concurrence_from_chsh,
    reduce_to_spin_dm,
    dual_relabel,
)
from .reporting import SAMPLED, Scalar, ScenarioReport

#: documented default seed for every sampled quantity
DEFAULT_SEED = 1905

#: rotation |up> -> (|up>+|down>)/sqrt2, |down> -> (|up>-|down>)/sqrt2
SPIN_MIXER = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)

#: correlation magnitudes below this are reported as inconclusive
VERDICT_DEAD_ZONE = 0.1


@dataclass(frozen=True)
class Ensemble:
    """Classical mixture of pure inputs sharing one statistics."""

    components: tuple[tuple[float, FockState], ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("an ensemble needs at least one component")
        total = sum(w for w, _ in self.components)
        if any(w < 0 for w, _ in self.components) or abs(total - 1.0) > 1e-9:
            raise ValueError("component probabilities must be nonnegative and sum to 1")
        stats = {s.statistics for _, s in self.components}
        if len(stats) != 1:
            raise StatisticsMismatchError("all ensemble components must share statistics")

    @property
    def statistics(self) -> Statistics:
        return self.components[0][1].statistics


def unpolarized_pair(statistics: Statistics) -> Ensemble:
    """Each particle in the even spin mixture: four product inputs at 1/4."""
    components = []
    for s_a in (Spin.UP, Spin.DOWN):
        for s_b in (Spin.UP, Spin.DOWN):
            state = make_product_state(statistics, [Mode("A", s_a), Mode("B", s_b)])
            components.append((0.25, state))
    return Ensemble(tuple(components))


def _correction_label(correction: dict[str, np.ndarray]) -> str:
    if not correction:
        return "identity"
    parts = []
    for path, u in sorted(correction.items()):
        phase = complex(u[1, 1])
        parts.append(f"{path}:down-phase {math.atan2(phase.imag, phase.real) / math.pi:.6g}pi")
    return "; ".join(parts)


def _branch_rows(branches) -> list[dict]:
    rows = []
    for b in branches:
        row: dict = {
            "pattern": "+".join(sorted(b.pattern)) or "none",
            "detectors": len(b.pattern),
            "probability": b.probability,
        }
        if coincidence(b.pattern):
            p1, p2 = sorted(b.pattern)
            dm = reduce_to_spin_dm(b.state, p1, p2)
            row["concurrence"] = concurrence(dm)
            row["bell_state"] = classify_bell(dm) or "other"
            row["correction"] = _correction_label(correction_for_branch(b))
        else:
            row["concurrence"] = 0.0
            row["bell_state"] = ""
            row["correction"] = ""
        rows.append(row)
    return rows


def _spin_pair_label(state: FockState) -> str:
    names = {Spin.UP: "up", Spin.DOWN: "down"}
    monomial = next(iter(state.terms))
    return ",".join(names[m.spin] for m in monomial)


def _coincidence_summary(net: Network, statistics: Statistics):
    branches = detect(run_network(net, opposite_spin_input(statistics, net)), net.monitored)
    total = sum(b.probability for b in branches if coincidence(b.pattern))
    return branches, total


def scenario_fig1(statistics: Statistics) -> ScenarioReport:
    """Single splitter on an opposite-spin pair: heralded Bell-pair source."""
    net = fig1_network()
    branches, total = _coincidence_summary(net, statistics)
    pair = branches[{"C", "D"}]
    dm = reduce_to_spin_dm(pair.state, "C", "D")
    return ScenarioReport(
        scenario="fig1",
        statistics=statistics.value,
        parameters={},
        scalars={
            "coincidence_probability": Scalar(total),
            "bell_state": Scalar(classify_bell(dm) or "other"),
            "concurrence": Scalar(concurrence(dm)),
        },
        table=_branch_rows(branches),
    )


def scenario_fig2(statistics: Statistics) -> ScenarioReport:
    """Three splitters, four detectors: coincidences in 3/4 of the cases."""
    net = fig2_network()
    branches, total = _coincidence_summary(net, statistics)
    return ScenarioReport(
        scenario="fig2",
        statistics=statistics.value,
        parameters={},
        scalars={
            "coincidence_probability": Scalar(total),
            "patterns": Scalar(len(branches)),
        },
        table=_branch_rows(branches),
    )


def scenario_tree(depth: int, statistics: Statistics) -> ScenarioReport:
    """Depth-N splitting tree: entangled yield 1 - 1/2**N."""
    if not 1 <= depth <= 7:
        raise ValueError("tree scenario supports depths 1 through 7")
    net = build_tree(depth)
    branches, total = _coincidence_summary(net, statistics)
    return ScenarioReport(
        scenario="tree",
        statistics=statistics.value,
        parameters={"depth": depth},
        scalars={
            "entangled_yield": Scalar(total),
            "expected_yield": Scalar(1.0 - 0.5 ** depth),
            "splitters": Scalar(len(net.splitters)),
            "outputs": Scalar(len(net.monitored)),
        },
        table=_branch_rows(branches),
    )


def scenario_statistics_test(statistics: Statistics) -> ScenarioReport:
    """Identify the statistics from rotated spin correlations after coincidence."""
    net = fig1_network()
    branches, _ = _coincidence_summary(net, statistics)
    state = branches[{"C", "D"}].state
    for path in ("C", "D"):
        state = apply_spin_rotation(state, path, SPIN_MIXER)
    dm = reduce_to_spin_dm(state, "C", "D")
    joint = np.real(np.diag(dm.matrix))
    correlation = float(joint[0] - joint[1] - joint[2] + joint[3])
    if correlation > VERDICT_DEAD_ZONE:
        verdict = Statistics.FERMION.value
    elif correlation < -VERDICT_DEAD_ZONE:
        verdict = Statistics.BOSON.value
    else:
        verdict = "inconclusive"
    names = ("up,up", "up,down", "down,up", "down,down")
    return ScenarioReport(
        scenario="statistics-test",
        statistics=statistics.value,
        parameters={},
        scalars={
            "correlation": Scalar(correlation),
            "verdict": Scalar(verdict),
        },
        table=[
            {"outcome": name, "probability": float(p)} for name, p in zip(names, joint)
        ],
    )


def scenario_mixed_input(statistics: Statistics) -> ScenarioReport:
    """Unpolarized inputs: entangled for bosons, separable for fermions."""
    net = fig1_network()
    ensemble = unpolarized_pair(statistics)
    total = 0.0
    weighted_dm = np.zeros((4, 4), dtype=complex)
    rows = []
    mixture: dict[str, float] = {}
    for weight, component in ensemble.components:
        branches = detect(run_network(net, component), net.monitored)
        prob = sum(b.probability for b in branches if coincidence(b.pattern))
        row_label = "+".join(
            f"{m.path}{'u' if m.spin is Spin.UP else 'd'}" for m in sorted(component.modes())
        )
        row = {"input": row_label, "weight": weight, "coincidence_probability": prob}
        if prob > 0.0:
            pair = branches[{"C", "D"}]
            dm = reduce_to_spin_dm(pair.state, "C", "D")
            weighted_dm += weight * prob * dm.matrix
            label = classify_bell(dm) or _spin_pair_label(pair.state)
            mixture[label] = mixture.get(label, 0.0) + weight * prob
            row["bell_state"] = label
        else:
            row["bell_state"] = ""
        total += weight * prob
        rows.append(row)
    conditional = TwoQubitDM(weighted_dm / total, ("C", "D"))
    decomposition = " + ".join(
        f"{w / total:.6g} {label}" for label, w in sorted(mixture.items())
    )
    chsh_default = chsh_expectation(conditional)
    flip = np.kron(np.diag([1.0, -1.0]), np.eye(2)).astype(complex)
    flipped = TwoQubitDM(flip @ conditional.matrix @ flip.conj().T, conditional.labels)
    chsh_best = max(abs(chsh_default), abs(chsh_expectation(flipped)))
    return ScenarioReport(
        scenario="mixed-input",
        statistics=statistics.value,
        parameters={},
        scalars={
            "coincidence_probability": Scalar(total),
            "concurrence": Scalar(concurrence(conditional)),
            "chsh_default": Scalar(chsh_default),
            "chsh_max_abs": Scalar(chsh_best),
            "conditional_decomposition": Scalar(decomposition),
        },
        table=rows,
        matrices={"conditional_dm": conditional.matrix},
    )


def scenario_feedback(
    depth: int, statistics: Statistics, trials: int = 0, seed: int = DEFAULT_SEED
) -> ScenarioReport:
    """Feedback recycling: failure probability halves every round."""
    if not 1 <= depth <= 10:
        raise ValueError("feedback scenario supports 1 through 10 rounds")
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    rounds = feedback_run(depth, statistics)
    success_round = None
    if trials > 0:
        rng = np.random.default_rng(seed)
        per_round = np.array([r.success_probability for r in rounds])
        draws = rng.random((trials, depth)) < per_round[np.newaxis, :]
        any_success = draws.any(axis=1)
        first = np.where(any_success, draws.argmax(axis=1) + 1, 0)
        success_round = first
    rows = []
    for r in rounds:
        dm = reduce_to_spin_dm(r.conditional_state, "C", "D")
        row = {
            "round": r.round,
            "success_probability": r.success_probability,
            "cumulative_failure": r.cumulative_failure,
            "cumulative_success": 1.0 - r.cumulative_failure,
            "bell_state": classify_bell(dm) or "other",
            "concurrence": concurrence(dm),
        }
        if success_round is not None:
            row["sampled_successes"] = int(np.sum(success_round == r.round))
            row["sampled_cumulative_success"] = float(
                np.sum((success_round > 0) & (success_round <= r.round)) / trials
            )
        rows.append(row)
    scalars = {
        "cumulative_failure": Scalar(rounds[-1].cumulative_failure),
        "cumulative_success": Scalar(1.0 - rounds[-1].cumulative_failure),
        "rounds": Scalar(depth),
    }
    if success_round is not None:
        scalars["sampled_success"] = Scalar(
            float(np.sum(success_round > 0) / trials), SAMPLED
        )
        scalars["trials"] = Scalar(trials)
        scalars["seed"] = Scalar(seed)
    return ScenarioReport(
        scenario="feedback",
        statistics=statistics.value,
        parameters={"depth": depth, "trials": trials, "seed": seed},
        scalars=scalars,
        table=rows,
    )


def scenario_complementarity(grid: int, statistics: Statistics) -> ScenarioReport:
    """Sweep the tag overlap: entanglement + distinguishability = 1."""
    if grid < 2:
        raise ValueError("the overlap grid needs at least two points")
    rows = []
    max_total_dev = 0.0
    max_chsh_dev = 0.0
    for overlap_sq in np.linspace(0.0, 1.0, grid):
        overlap = math.sqrt(float(overlap_sq))
        entanglement, discrimination, total = complementarity_check(overlap, statistics)
        chsh_inferred = infer_concurrence_from_chsh(
            coincidence_spin_dm(statistics, overlap), statistics
        )
        max_total_dev = max(max_total_dev, abs(total - 1.0))
        max_chsh_dev = max(max_chsh_dev, abs(chsh_inferred - entanglement))
        rows.append(
            {
                "overlap_sq": float(overlap_sq),
                "entanglement": entanglement,
                "distinguishability": discrimination,
                "total": total,
                "entanglement_chsh": chsh_inferred,
            }
        )
    return ScenarioReport(
        scenario="complementarity",
        statistics=statistics.value,
        parameters={"grid": grid},
        scalars={
            "max_total_deviation": Scalar(max_total_dev),
            "max_chsh_deviation": Scalar(max_chsh_dev),
        },
        table=rows,
    )


def scenario_gaussian(
    velocity: float, width: float, delay_max: float, grid: int, statistics: Statistics
) -> ScenarioReport:
    """Entanglement versus packet delay, via the full pipeline."""
    if grid < 2:
        raise ValueError("the delay grid needs at least two points")
    rows = []
    max_dev = 0.0
    for delay in np.linspace(-delay_max, delay_max, grid):
        overlap = gaussian_overlap(velocity, float(delay), width)
        entanglement, _, _ = complementarity_check(overlap, statistics)
        expected = overlap ** 2
        max_dev = max(max_dev, abs(entanglement - expected))
        rows.append(
            {
                "delay": float(delay),
                "expected_entanglement": expected,
                "entanglement": entanglement,
            }
        )
    return ScenarioReport(
        scenario="gaussian",
        statistics=statistics.value,
        parameters={
            "velocity": velocity,
            "width": width,
            "delay_max": delay_max,
            "grid": grid,
        },
        scalars={"max_deviation": Scalar(max_dev)},
        table=rows,
    )


def scenario_dual(statistics: Statistics) -> ScenarioReport:
    """Read the coincidence state both ways: spins entangled, paths entangled."""
    net = fig1_network()
    branches, _ = _coincidence_summary(net, statistics)
    state = branches[{"C", "D"}].state
    spin_dm = reduce_to_spin_dm(state, "C", "D")
    path_dm = dual_relabel(state, "C", "D")
    spin_c = concurrence(spin_dm)
    path_c = concurrence(path_dm)
    return ScenarioReport(
        scenario="dual",
        statistics=statistics.value,
        parameters={},
        scalars={
            "spin_concurrence": Scalar(spin_c),
            "path_concurrence": Scalar(path_c),
            "difference": Scalar(abs(spin_c - path_c)),
        },
        table=[
            {
                "picture": "paths label particles, spins entangled",
                "qubits": "C,D",
                "concurrence": spin_c,
            },
            {
                "picture": "spins label particles, paths entangled",
                "qubits": "up,down",
                "concurrence": path_c,
            },
        ],
    )


class ScenarioInfo(NamedTuple):
    name: str
    parameters: tuple[str, ...]
    claim: str


_CATALOG = [
    ScenarioInfo(
        "complementarity",
        ("statistics", "grid"),
        "post-selected entanglement E and tag distinguishability D satisfy E + D = 1",
    ),
    ScenarioInfo(
        "dual",
        ("statistics",),
        "one coincidence state is spin-entangled with paths as labels and "
        "path-entangled with spins as labels",
    ),
    ScenarioInfo(
        "feedback",
        ("statistics", "depth", "trials", "seed"),
        "re-injecting bunched pairs through the same splitter drives the failure "
        "probability down as 2^-N",
    ),
    ScenarioInfo(
        "fig1",
        ("statistics",),
        "a two-detector coincidence (probability 1/2) heralds a maximally "
        "entangled spin pair",
    ),
    ScenarioInfo(
        "fig2",
        ("statistics",),
        "with two extra splitters a coincidence occurs in 75 percent of the "
        "cases, each heralding an entangled pair",
    ),
    ScenarioInfo(
        "gaussian",
        ("statistics", "velocity", "width", "delay-max", "grid"),
        "Gaussian packets of width sigma delayed by dt give "
        "E = exp(-v^2 dt^2 / (2 sigma^2))",
    ),
    ScenarioInfo(
        "mixed-input",
        ("statistics",),
        "unpolarized inputs still yield a maximally entangled pair for bosons "
        "but a separable state for fermions",
    ),
    ScenarioInfo(
        "statistics-test",
        ("statistics",),
        "rotated spin correlations after a coincidence are +1 for fermions "
        "and -1 for bosons",
    ),
    ScenarioInfo(
        "tree",
        ("statistics", "depth"),
        "a depth-N splitting tree delivers entangled pairs with probability "
        "1 - 1/2^N",
    ),
]


def list_scenarios() -> list[ScenarioInfo]:
    """Stable, sorted catalog of the shipped scenarios."""
    return sorted(_CATALOG, key=lambda info: info.name)
