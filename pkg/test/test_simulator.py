# test/test_simulator.py

import math

import pytest

from hcspdc import syntax as S
from hcspdc.errors import MissingVariable, SimulationError, ZenoError
from hcspdc.evaluator import EvalConfig, Truth
from hcspdc.parser import parse_process
from hcspdc.simulator import SimConfig, initial_state, simulate, soundness_holds, step
from hcspdc.trajectory import check_locality

from conftest import FULL, corpus_paths
from hcspdc.utils import read_program

# expected final values of terminating corpus programs
FINALS = {
    "03_assign.hcsp": {"x": 1.0},
    "04_swap.hcsp": {"x": 2.0, "y": 1.0},
    "05_seq.hcsp": {"x": 1.0, "y": 2.0},
    "06_await.hcsp": {"x": 3.0},
    "07_clock.hcsp": {"x": 2.0},
    "08_decay.hcsp": {"x": 0.5},
    "09_if.hcsp": {"y": 1.0},
    "11_while.hcsp": {"x": 3.0},
    "13_mu.hcsp": {"x": 3.0},
    "14_par_assign.hcsp": {"x": 1.0, "y": 2.0},
    "15_par_evolve.hcsp": {"x1": 2.0, "x2": 3.0},
    "16_handshake.hcsp": {"y": 5.0, "ch!": 0.0, "ch?": 0.0},
    "18_wait.hcsp": {"x": 1.0},
    "19_timeout.hcsp": {"y": 2.0},
    "20_ext_choice.hcsp": {"x": 1.0},
    "21_interrupt.hcsp": {"y": 1.0},
    "23_flag.hcsp": {"on": 1.0, "x": 1.0},
    "24_relay.hcsp": {"z": 7.0},
}

SEEDS = range(10) if FULL else range(2)


def P(text: str) -> S.Process:
    return parse_process(text)


def by_name(path: str) -> str:
    return path.rsplit("/", 1)[-1]


class TestSimulate:
    """Final valuations and the shape of runs."""

    @pytest.mark.parametrize("name", sorted(FINALS))
    def test_final_values(self, name, program, sim_cfg):
        p, init = program(name)
        run = simulate(p, init, sim_cfg)
        assert run.terminated
        for x, v in FINALS[name].items():
            assert run.final[x] == pytest.approx(v, abs=1e-3), x

    def test_assignment_takes_a_negligible_stretch(self):
        run = simulate(P("x := 1"), {"x": 0.0}, SimConfig(negligible_eps=0.01))
        tr = run.trajectory
        assert tr.T == pytest.approx(0.01) and tr.tail == "none"
        assert tr.signal_at("R", 0.005) == 1 and tr.signal_at("N", 0.005) == 1
        assert tr.value_at("x", 0.005) == 0.0 and tr.final["x"] == 1.0

    def test_evolution_raises_no_marker(self):
        run = simulate(P("<x_dot = 1 & x < 2>"), {"x": 0.0})
        assert run.trajectory.signal_at("R", 1.0) == 0
        assert run.trajectory.T == pytest.approx(2.0, abs=1e-9)

    def test_blocked_await_gives_a_constant_tail(self):
        run = simulate(P("await x > 5"), {"x": 0.0}, SimConfig(horizon=3.0))
        assert not run.terminated
        assert run.trajectory.tail == "constant" and run.trajectory.end == math.inf

    def test_horizon_cuts_an_endless_evolution(self):
        run = simulate(P("<x_dot = 1 & true>"), {"x": 0.0}, SimConfig(horizon=5.0))
        assert run.trajectory.tail == "open"
        assert run.trajectory.T == pytest.approx(5.0)
        assert run.final["x"] == pytest.approx(5.0)

    def test_parallel_markers(self):
        run = simulate(P("x := 1 || y := 2"), {"x": 0.0, "y": 0.0}, SimConfig(scheduler="least-index"))
        tr = run.trajectory
        assert tr.signal_at("R#1.1", 0.0005) == 1 and tr.signal_at("R#1.2", 0.0005) == 0
        assert tr.signal_at("R#1.2", 0.0015) == 1

    def test_least_index_scheduler_is_deterministic(self):
        p = P("x := 1 || x2 := 2")
        first = [simulate(p, {"x": 0, "x2": 0}, SimConfig(seed=s, scheduler="least-index")).events
                 for s in range(3)]
        assert first[0] == first[1] == first[2]
        assert first[0][0][1].startswith("R#1.1")

    def test_same_seed_same_run(self, program):
        p, init = program("12_star.hcsp")
        a = simulate(p, init, SimConfig(seed=7, horizon=30.0))
        b = simulate(p, init, SimConfig(seed=7, horizon=30.0))
        assert a.events == b.events and a.final == b.final

    def test_runs_are_local(self, program):
        p, init = program("17_plant_controller.hcsp")
        run = simulate(p, init, SimConfig(horizon=5.0))
        assert check_locality(run.trajectory, run.final, tol=1e-9)


class TestInitialState:
    def test_generated_variables_start_at_zero(self):
        env = initial_state(P("ch!1; t#1 := 0"), {})
        assert env == {"ch": 0.0, "ch!": 0.0, "ch?": 0.0, "t#1": 0.0}

    def test_missing_user_variable(self):
        with pytest.raises(MissingVariable):
            initial_state(P("x := y"), {"x": 0.0})

    def test_all_zero(self):
        assert initial_state(P("x := y"), {}, all_zero=True) == {"x": 0.0, "y": 0.0}


class TestErrors:
    def test_unknown_scheduler(self):
        with pytest.raises(SimulationError):
            SimConfig(scheduler="round-robin")

    def test_bad_step_size(self):
        with pytest.raises(SimulationError):
            SimConfig(negligible_eps=0.0)

    def test_zero_time_recursion(self):
        with pytest.raises(ZenoError):
            simulate(P("mu X. { skip; X }"), {})


class TestStep:
    def test_internal_choice_offers_both_branches(self):
        outs = step(P("x := 1 |~| x := 2"), {"x": 0.0})
        assert sorted(tr.final["x"] for tr, _ in outs) == [1.0, 2.0]
        assert all(q == S.EPS for _, q in outs)

    def test_interleavings(self):
        outs = step(P("x := 1 || y := 2"), {"x": 0.0, "y": 0.0})
        assert len(outs) == 2

    def test_zero_time_reduction_only(self):
        [(tr, q)] = step(P("skip"), {})
        assert q == S.EPS and tr.T == 0.0


class TestSoundness:
    """Every simulated run satisfies the compiled semantics of its program."""

    @pytest.mark.slow
    @pytest.mark.parametrize("path", corpus_paths(), ids=by_name)
    def test_corpus_runs_satisfy_their_semantics(self, path):
        p, init = read_program(path)
        for seed in SEEDS:
            run = simulate(p, init, SimConfig(seed=seed, horizon=8.0))
            verdict = soundness_holds(p, run, EvalConfig())
            if run.terminated:
                assert verdict is Truth.TRUE, (seed, run.events[-3:])
            else:
                assert verdict is not Truth.FALSE, (seed, run.events[-3:])

    def test_semantics_rejects_a_run_of_another_program(self):
        run = simulate(P("x := 1"), {"x": 0.0})
        assert soundness_holds(P("x := 2"), run, EvalConfig()) is Truth.FALSE
