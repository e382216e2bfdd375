"""Tests for networks, detection branching, trees, feedback, and corrections."""

import math

import numpy as np
import pytest

from conftest import BOTH_STATISTICS
from twinbeam.errors import ImpossiblePostselectionError, NetworkError
from twinbeam.fock import FockState, Mode, Spin, Statistics, make_product_state, vacuum
from twinbeam.interferometer import (
    BeamSplitter,
    Network,
    apply_correction,
    build_tree,
    coincidence,
    correction_phase,
    detect,
    entangled_yield,
    feedback_run,
    fig1_network,
    fig2_network,
    opposite_spin_input,
    postselect,
    run_network,
    sample_clicks,
)
from twinbeam.metrics import PSI_PLUS, concurrence, reduce_to_spin_dm

UP, DOWN = Spin.UP, Spin.DOWN


def opposite_pair(statistics):
    return make_product_state(statistics, [Mode("A", UP), Mode("B", DOWN)])


class TestNetworkValidation:
    def test_fig1_shape(self):
        net = fig1_network()
        assert net.splitters == (BeamSplitter("A", "B", "D", "C"),)
        assert set(net.monitored) == {"C", "D"}

    def test_duplicate_output_rejected(self):
        with pytest.raises(NetworkError):
            Network(
                (BeamSplitter("A", "B", "X", "Y"), BeamSplitter("C", "D", "X", "Z")),
                ("A", "B", "C", "D"),
                ("Y", "Z"),
            )

    def test_consumed_before_produced_rejected(self):
        with pytest.raises(NetworkError):
            Network(
                (BeamSplitter("X", "B", "P", "Q"), BeamSplitter("A", "C", "X", "Y")),
                ("A", "B", "C"),
                ("P", "Q", "Y"),
            )

    def test_monitored_must_be_terminal(self):
        with pytest.raises(NetworkError):
            Network(
                (BeamSplitter("A", "B", "C", "D"), BeamSplitter("C", "E", "F", "G")),
                ("A", "B", "E"),
                ("C", "F"),
            )

    def test_splitter_ports_distinct(self):
        with pytest.raises(NetworkError):
            BeamSplitter("A", "A", "C", "D")

    def test_dict_round_trip(self):
        net = fig2_network()
        assert Network.from_dict(net.to_dict()) == net


class TestRunNetwork:
    @pytest.mark.parametrize(
        "statistics,pair_sign", [(Statistics.FERMION, 1.0), (Statistics.BOSON, -1.0)]
    )
    def test_single_splitter_amplitudes(self, statistics, pair_sign):
        out = run_network(fig1_network(), opposite_pair(statistics))
        assert abs(out.amplitude([Mode("D", UP), Mode("C", DOWN)]) - 0.5) < 1e-12
        assert abs(out.amplitude([Mode("D", DOWN), Mode("C", UP)]) - pair_sign * 0.5) < 1e-12
        assert abs(out.amplitude([Mode("C", UP), Mode("C", DOWN)]) - 0.5j) < 1e-12
        assert abs(out.amplitude([Mode("D", UP), Mode("D", DOWN)]) - 0.5j) < 1e-12

    def test_vacuum_passes_through(self):
        out = run_network(fig1_network(), vacuum(Statistics.BOSON))
        assert out.is_vacuum()

    def test_rejects_unknown_input_path(self):
        state = make_product_state(Statistics.BOSON, [Mode("Z", UP)])
        with pytest.raises(NetworkError):
            run_network(fig1_network(), state)

    def test_fig2_term_structure(self):
        # 12 coincidence monomials (two per detector pair) plus 4 bunched ones
        out = run_network(fig2_network(), opposite_pair(Statistics.FERMION))
        assert len(out.terms) == 16
        for monomial, amp in out.terms.items():
            paths = {m.path for m in monomial}
            assert abs(abs(amp) - 0.25) < 1e-12
            if len(paths) == 1:
                assert abs(amp - 0.25j) < 1e-12 or abs(amp + 0.25j) < 1e-12

    def test_batching_matches_sequential(self):
        # apply the three tree splitters one net at a time and compare
        state = opposite_pair(Statistics.BOSON)
        whole = run_network(fig2_network(), state)
        stepwise = state
        for bs in fig2_network().splitters:
            inputs = tuple(stepwise.paths() | {bs.in1, bs.in2})
            stepwise = run_network(Network((bs,), inputs, ()), stepwise)
        for monomial in set(whole.terms) | set(stepwise.terms):
            assert abs(whole.terms.get(monomial, 0j) - stepwise.terms.get(monomial, 0j)) < 1e-12


class TestDetect:
    def test_single_splitter_boson_branches(self):
        out = run_network(fig1_network(), opposite_pair(Statistics.BOSON))
        branches = detect(out, ["C", "D"])
        probs = branches.probabilities()
        assert abs(probs[frozenset({"C", "D"})] - 0.5) < 1e-12
        assert abs(probs[frozenset({"C"})] - 0.25) < 1e-12
        assert abs(probs[frozenset({"D"})] - 0.25) < 1e-12
        pair = branches[{"C", "D"}].state
        root = 1.0 / math.sqrt(2.0)
        assert abs(pair.amplitude([Mode("D", UP), Mode("C", DOWN)]) - root) < 1e-12
        assert abs(pair.amplitude([Mode("D", DOWN), Mode("C", UP)]) + root) < 1e-12

    def test_vacuum_single_branch(self):
        branches = detect(vacuum(Statistics.FERMION), ["C", "D"])
        assert len(branches) == 1
        only = branches.branches[0]
        assert only.pattern == frozenset() and abs(only.probability - 1.0) < 1e-12

    @pytest.mark.parametrize("statistics", BOTH_STATISTICS)
    def test_fig2_pattern_distribution(self, statistics):
        out = run_network(fig2_network(), opposite_pair(statistics))
        branches = detect(out, fig2_network().monitored)
        assert len(branches) == 10
        for branch in branches:
            expected = 0.125 if len(branch.pattern) == 2 else 0.0625
            assert abs(branch.probability - expected) < 1e-12

    @pytest.mark.parametrize("statistics", BOTH_STATISTICS)
    def test_resolution_of_identity(self, statistics):
        out = run_network(fig2_network(), opposite_pair(statistics))
        branches = detect(out, fig2_network().monitored)
        assert abs(sum(b.probability for b in branches) - 1.0) < 1e-9
        recombined = FockState(statistics, {})
        for b in branches:
            recombined = recombined + math.sqrt(b.probability) * b.state
        for monomial in set(out.terms) | set(recombined.terms):
            assert abs(out.terms.get(monomial, 0j) - recombined.terms.get(monomial, 0j)) < 1e-9

    def test_requires_normalized_state(self):
        state = 0.5 * opposite_pair(Statistics.BOSON)
        with pytest.raises(ValueError):
            detect(state, ["A"])

    @pytest.mark.parametrize(
        "statistics,expected", [(Statistics.BOSON, 0.0), (Statistics.FERMION, 1.0)]
    )
    def test_equal_spin_coincidence(self, statistics, expected):
        state = make_product_state(statistics, [Mode("A", UP), Mode("B", UP)])
        out = run_network(fig1_network(), state)
        branches = detect(out, ["C", "D"])
        got = sum(b.probability for b in branches if coincidence(b.pattern))
        assert abs(got - expected) < 1e-12


class TestPostselect:
    def test_fig1_coincidence_probability(self):
        out = run_network(fig1_network(), opposite_pair(Statistics.FERMION))
        prob, conditional = postselect(detect(out, ["C", "D"]), coincidence)
        assert abs(prob - 0.5) < 1e-12
        assert len(conditional) == 1
        assert abs(conditional.branches[0].probability - 1.0) < 1e-12

    def test_fig2_coincidence_probability(self):
        out = run_network(fig2_network(), opposite_pair(Statistics.BOSON))
        prob, _ = postselect(detect(out, fig2_network().monitored), coincidence)
        assert abs(prob - 0.75) < 1e-12

    def test_impossible_selection(self):
        out = run_network(fig1_network(), opposite_pair(Statistics.BOSON))
        with pytest.raises(ImpossiblePostselectionError):
            postselect(detect(out, ["C", "D"]), lambda pattern: len(pattern) == 7)


class TestBuildTree:
    def test_depth_one_is_single_splitter(self):
        net = build_tree(1)
        assert len(net.splitters) == 1
        assert set(net.monitored) == {"0", "1"}

    def test_depth_two_matches_four_outputs(self):
        net = build_tree(2)
        assert len(net.splitters) == 3
        assert set(net.monitored) == {"00", "01", "10", "11"}

    def test_depth_three(self):
        net = build_tree(3)
        assert len(net.splitters) == 7
        assert len(net.monitored) == 8

    @pytest.mark.parametrize("depth", [0, 13])
    def test_depth_guard(self, depth):
        with pytest.raises(ValueError):
            build_tree(depth)

    @pytest.mark.parametrize("statistics", BOTH_STATISTICS)
    @pytest.mark.parametrize("depth", range(1, 6))
    def test_yield_law(self, statistics, depth):
        got = entangled_yield(build_tree(depth), opposite_pair(statistics))
        assert abs(got - (1.0 - 0.5 ** depth)) < 1e-9

    @pytest.mark.parametrize("statistics", BOTH_STATISTICS)
    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_single_detector_branches_are_bunched(self, statistics, depth):
        net = build_tree(depth)
        branches = detect(run_network(net, opposite_spin_input(statistics, net)), net.monitored)
        for branch in branches:
            if len(branch.pattern) != 1:
                continue
            (path,) = branch.pattern
            for monomial in branch.state.terms:
                assert all(m.path == path for m in monomial)

    def test_yield_requires_two_particles(self):
        with pytest.raises(ValueError):
            entangled_yield(build_tree(1), make_product_state(Statistics.BOSON, [Mode("A", UP)]))


class TestFeedback:
    @pytest.mark.parametrize("statistics", BOTH_STATISTICS)
    def test_failure_halves_each_round(self, statistics):
        rounds = feedback_run(10, statistics)
        for r in rounds:
            assert abs(r.success_probability - 0.5) < 1e-12
            assert abs(r.cumulative_failure - 0.5 ** r.round) < 1e-12

    @pytest.mark.parametrize("statistics", BOTH_STATISTICS)
    def test_rounds_stay_maximally_entangled(self, statistics):
        for r in feedback_run(4, statistics):
            dm = reduce_to_spin_dm(r.conditional_state, "C", "D")
            assert abs(concurrence(dm) - 1.0) < 1e-9

    def test_bell_state_alternates_for_bosons(self):
        rounds = feedback_run(2, Statistics.BOSON)
        first = reduce_to_spin_dm(rounds[0].conditional_state, "C", "D")
        second = reduce_to_spin_dm(rounds[1].conditional_state, "C", "D")
        assert first.fidelity(PSI_PLUS) < 1e-9
        assert abs(second.fidelity(PSI_PLUS) - 1.0) < 1e-9

    def test_requires_positive_rounds(self):
        with pytest.raises(ValueError):
            feedback_run(0, Statistics.BOSON)


class TestCorrection:
    def test_fermion_eg_pattern_needs_no_correction(self):
        assert correction_phase(frozenset({"E", "G"}), Statistics.FERMION) == {}

    def test_fermion_gh_pattern_gets_phase(self):
        correction = correction_phase(frozenset({"G", "H"}), Statistics.FERMION)
        assert set(correction) == {"G"}
        assert np.allclose(correction["G"], np.diag([1.0, -1.0]))

    def test_rejects_single_detector_pattern(self):
        with pytest.raises(NetworkError):
            correction_phase(frozenset({"E"}), Statistics.FERMION)

    def test_rejects_unknown_pattern(self):
        with pytest.raises(NetworkError):
            correction_phase(frozenset({"Z", "W"}), Statistics.FERMION)

    @pytest.mark.parametrize("statistics", BOTH_STATISTICS)
    @pytest.mark.parametrize("depth", [2, 3])
    def test_all_tree_coincidences_correct_to_target(self, statistics, depth):
        net = build_tree(depth)
        branches = detect(run_network(net, opposite_spin_input(statistics, net)), net.monitored)
        for branch in branches:
            if not coincidence(branch.pattern):
                continue
            corrected = apply_correction(
                branch.state, correction_phase(branch.pattern, statistics)
            )
            p1, p2 = sorted(branch.pattern)
            dm = reduce_to_spin_dm(corrected, p1, p2)
            assert abs(dm.fidelity(PSI_PLUS) - 1.0) < 1e-9


class TestSampleClicks:
    def test_deterministic_given_seed(self):
        net = fig1_network()
        state = opposite_pair(Statistics.BOSON)
        a = sample_clicks(net, state, 5000, seed=11)
        b = sample_clicks(net, state, 5000, seed=11)
        assert a == b

    def test_single_trial(self):
        histogram = sample_clicks(fig1_network(), opposite_pair(Statistics.BOSON), 1, seed=3)
        assert sum(histogram.values()) == 1 and len(histogram) == 1

    def test_frequencies_near_exact(self):
        trials = 100_000
        histogram = sample_clicks(fig1_network(), opposite_pair(Statistics.FERMION), trials, seed=5)
        sigma = math.sqrt(0.25 / trials)
        freq = histogram[frozenset({"C", "D"})] / trials
        assert abs(freq - 0.5) < 3.0 * sigma

    def test_chi_square_against_exact(self):
        net = fig2_network()
        state = opposite_pair(Statistics.BOSON)
        trials = 100_000
        histogram = sample_clicks(net, state, trials, seed=17)
        branches = detect(run_network(net, state), net.monitored)
        chi2 = sum(
            (histogram.get(b.pattern, 0) - trials * b.probability) ** 2 / (trials * b.probability)
            for b in branches
        )
        # 9 degrees of freedom; 99% quantile is 21.67
        assert chi2 < 21.67

    def test_requires_positive_trials(self):
        with pytest.raises(ValueError):
            sample_clicks(fig1_network(), opposite_pair(Statistics.BOSON), 0, seed=1)
