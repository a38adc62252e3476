import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from damcmc.adda import (
    AddaConfig,
    BlockedAugmentedModel,
    BlockUpdate,
    CompletionSchedule,
    FaultPlan,
    LatencyModel,
    Manager,
    ParamBroadcast,
    Worker,
    adda_run,
    adda_wall_clock_report,
    discrete_blocked_model,
)
from damcmc.core import da_step, run_chain
from damcmc.errors import InvalidParameterError, PreconditionError, ProtocolError
from damcmc.models import LassoModel
from damcmc.rng import make_rng
from damcmc.spectral import BlockedDiscreteJoint


def lasso_blocked(k=2, p=4, m=10, seed=0):
    gen = np.random.default_rng(seed)
    w = gen.standard_normal((m, p))
    w -= w.mean(axis=0)
    z = w @ np.linspace(1.0, -1.0, p) + gen.standard_normal(m)
    model = LassoModel(w, z, lam=1.0)
    return model, model.blocked_model(k)


class TestConfig:
    @pytest.mark.parametrize("kwargs", [dict(k=0), dict(k=2, r=0.0), dict(k=2, r=1.5), dict(k=2, epsilon=0.0),
                                        dict(k=2, epsilon=1.2), dict(k=2.5)])
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(InvalidParameterError):
            AddaConfig(**kwargs)

    @pytest.mark.parametrize("k, r, wait", [(4, 0.5, 2), (3, 1 / 3, 1), (10, 0.3, 3), (5, 0.01, 1), (7, 1.0, 7)])
    def test_wait_count(self, k, r, wait):
        assert AddaConfig(k, r).wait == wait

    @given(k=st.integers(1, 200), r=st.floats(1e-6, 1.0))
    @settings(max_examples=200)
    def test_wait_in_range(self, k, r):
        assert 1 <= AddaConfig(k, r).wait <= k


class TestSynchronousLimit:
    @pytest.mark.parametrize("r, eps", [(0.5, 1.0), (1.0, 0.3)])
    def test_matches_da_draw_for_draw(self, r, eps):
        model, blocked = lasso_blocked()
        x0 = model.initial_state()
        trace = adda_run(blocked, AddaConfig(2, r, eps), 300, x0, make_rng(9),
                         schedule=CompletionSchedule.in_order(2))
        da = blocked.as_augmented_model()
        reference = run_chain(lambda x, g: da_step(da, x, g), x0, 300, make_rng(9)).draws
        np.testing.assert_array_equal(trace.draws[:, : blocked.x_dim], reference)
        assert trace.extra["full_epochs"] == 300 and trace.extra["stale_updates"] == 0


class TestProtocol:
    def setup_method(self):
        self.model, self.blocked = lasso_blocked()
        self.x0 = self.model.initial_state()

    def run(self, config, faults, orders=((0, 1),)):
        return adda_run(self.blocked, config, 20, self.x0, make_rng(1),
                        schedule=CompletionSchedule(orders=list(orders)), faults=faults)

    def test_duplicate_update(self):
        with pytest.raises(ProtocolError, match="duplicate"):
            self.run(AddaConfig(2), FaultPlan(duplicate=frozenset({(0, 3)})))

    def test_reordered_update(self):
        with pytest.raises(ProtocolError, match="reordered"):
            self.run(AddaConfig(2, 0.5, 1e-12), FaultPlan(reorder=frozenset({(0, 2)})))

    def test_dropped_update_deadlocks(self):
        with pytest.raises(ProtocolError, match="deadlock") as info:
            self.run(AddaConfig(2), FaultPlan(drop=frozenset({(1, 4)})))
        assert info.value.state["epoch"] == 4

    def test_future_epoch(self):
        manager = Manager(2, self.x0, [np.ones(2), np.ones(2)])
        manager.begin_epoch(2)
        with pytest.raises(ProtocolError, match="ahead"):
            manager.receive(BlockUpdate(0, 1, np.ones(2)))

    def test_epoch_cannot_close_early(self):
        manager = Manager(2, self.x0, [np.ones(2), np.ones(2)])
        manager.begin_epoch(2)
        manager.receive(BlockUpdate(0, 0, np.ones(2)))
        with pytest.raises(ProtocolError):
            manager.finish(self.blocked.draw_x_given_y, make_rng(0))

    def test_stale_blocks_are_discarded(self):
        # block 1 always arrives second and the manager needs one update;
        # the last epoch's late update is still queued when the run stops
        trace = self.run(AddaConfig(2, 0.5, 1e-12), None)
        y1 = trace.draws[:, self.blocked.x_dim + 2 :]
        assert trace.extra["stale_updates"] == 19
        assert np.all(y1 == y1[0])

    def test_manager_state_is_exactly_its_fields(self):
        assert set(Manager.__slots__) == set(Manager.STATE_FIELDS)
        assert set(Worker.__slots__) == set(Worker.STATE_FIELDS)
        assert not hasattr(Manager(2, self.x0, [np.ones(2)] * 2), "__dict__")

    def test_next_state_ignores_history(self):
        blocks = [np.full(2, 0.5), np.full(2, 2.0)]
        busy = Manager(2, self.x0, blocks)
        for epoch in range(3):
            busy.begin_epoch(1)
            busy.receive(BlockUpdate(epoch % 2, epoch, np.full(2, 1.0 + epoch)))
            busy.finish(self.blocked.draw_x_given_y, make_rng(epoch))
        fresh = Manager(2, busy.x, [b.copy() for b in busy.blocks])
        update = np.array([0.3, 0.9])
        results = []
        for manager, epoch in ((busy, 3), (fresh, 0)):
            manager.begin_epoch(1)
            manager.receive(BlockUpdate(1, epoch, update))
            results.append(manager.finish(self.blocked.draw_x_given_y, make_rng(77)))
        np.testing.assert_array_equal(results[0][0], results[1][0])
        np.testing.assert_array_equal(results[0][1], results[1][1])

    def test_worker_preemption_discards_partial_block(self):
        worker = Worker(0, 3, lambda j, i, x, g: float(i) + x[0])
        worker.on_broadcast(ParamBroadcast(0, np.array([10.0])))
        assert worker.run(make_rng(0), limit=2) is None and len(worker.partial) == 2
        worker.on_broadcast(ParamBroadcast(1, np.array([20.0])))
        update = worker.run(make_rng(0))
        assert update.epoch == 1 and update.y.tolist() == [20.0, 21.0, 22.0]
        assert not worker.busy
        with pytest.raises(ProtocolError):
            worker.on_broadcast(ParamBroadcast(1, np.array([0.0])))

    def test_unadmissible_model(self):
        bare = BlockedAugmentedModel(k=2, block_items=(2, 2), draw_item=self.blocked.draw_item,
                                     draw_x_given_y=self.blocked.draw_x_given_y, x_dim=5)
        with pytest.raises(PreconditionError):
            adda_run(bare, AddaConfig(2), 5, self.x0, make_rng(0))

    def test_mismatched_block_count(self):
        with pytest.raises(InvalidParameterError):
            adda_run(self.blocked, AddaConfig(3), 5, self.x0, make_rng(0))

    def test_threaded_driver(self):
        trace = adda_run(self.blocked, AddaConfig(2, 0.5, 0.3), 300, self.x0, make_rng(2), driver="threads",
                         timeout=5.0)
        assert trace.draws.shape == (300, self.blocked.x_dim + self.blocked.y_dim)
        assert np.all(np.isfinite(trace.draws)) and np.all(trace.draws[:, 4] > 0)
        with pytest.raises(InvalidParameterError):
            adda_run(self.blocked, AddaConfig(2), 5, self.x0, make_rng(0), driver="threads",
                     schedule=CompletionSchedule.in_order(2))


class TestSchedules:
    def test_order_validation(self):
        with pytest.raises(InvalidParameterError):
            CompletionSchedule(orders=[(0, 0)]).plan(0, None, 1, 2)
        with pytest.raises(InvalidParameterError):
            CompletionSchedule(orders=[(0, 2)]).plan(0, None, 1, 2)
        with pytest.raises(InvalidParameterError):
            CompletionSchedule(orders=[(0,)], order_fn=lambda e, x: (0,))
        with pytest.raises(InvalidParameterError):
            CompletionSchedule(orders=[])

    def test_latency_needs_one_speed_per_worker(self):
        with pytest.raises(InvalidParameterError):
            LatencyModel(speeds=(1.0,)).schedule(make_rng(0), (2, 2))

    def test_latency_plan(self):
        plan = LatencyModel(item_mean=0.5, manager_cost=0.1).schedule(make_rng(4), (3, 3, 3, 3)).plan(0, None, 2, 4)
        assert len(plan.order) == 2 and set(plan.truncation) == set(range(4)) - set(plan.order)
        assert all(0 <= c <= 2 for c in plan.truncation.values()) and plan.elapsed > 0.1

    def test_scripted_truncation_never_completes_a_block(self):
        _, blocked = lasso_blocked(k=2, p=4)
        schedule = CompletionSchedule(orders=[(0,)], truncations=[{1: 5}])
        trace = adda_run(blocked, AddaConfig(2, 0.5, 1e-12), 50, blocked_x0(), make_rng(3), schedule=schedule)
        assert trace.extra["stale_updates"] == 0
        y1 = trace.draws[:, blocked.x_dim + 2 :]
        assert np.all(y1 == y1[0])

    def test_discrete_blocked_model_is_certified(self):
        joint = BlockedDiscreteJoint.random(np.random.default_rng(0), 3, (2, 2))
        model = discrete_blocked_model(joint)
        assert model.certified and model.admissible and model.y_dim == 2


def blocked_x0():
    model, _ = lasso_blocked()
    return model.initial_state()


class TestWallClockReport:
    def setup_method(self):
        self.model, self.blocked = lasso_blocked(k=4, p=8, m=20)
        self.configs = [(1.0, 1.0), (0.5, 0.1), (0.25, 0.1)]
        self.latency = LatencyModel(item_mean=1.0, speeds=(1.0, 1.5, 2.0, 4.0))

    def report(self):
        return adda_wall_clock_report(self.blocked, self.configs, 1500, self.model.initial_state(), seed=12,
                                      latency=self.latency, functional=lambda x: x[:, 0])

    def test_partial_waits_cost_less(self):
        rows = self.report().rows
        assert [row.wait for row in rows] == [4, 2, 1]
        assert rows[0].seconds_per_iteration > rows[1].seconds_per_iteration > rows[2].seconds_per_iteration
        assert all(0 < row.ess <= row.iterations for row in rows)

    def test_partial_waits_mix_no_faster(self):
        rows = self.report().rows
        assert rows[2].ess <= rows[0].ess

    def test_reproducible(self):
        assert self.report().to_csv() == self.report().to_csv()

    def test_csv_layout(self):
        text = self.report().to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "r,epsilon,wait,iterations,seconds_per_iteration,ess,ess_per_second"
        assert len(lines) == 4
