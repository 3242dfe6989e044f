import numpy as np
import pytest

from fairshare import admm
from fairshare.instance import Instance, InstanceError, Link, Path, Request, make_partition
from fairshare.topology import partition_domains, random_ba_instance
from conftest import linear_network, single_link


def _state(inst, lam=1.0, **kw):
    return admm.init_state(inst, lam=lam, **kw)


# -- single rounds by hand -----------------------------------------------------

def test_first_round_from_zero(linear):
    s = admm.iterate(_state(linear))
    # consensus and duals are zero, projections of zero stay zero,
    # each single-path prox solves y^2 = lambda w = 1
    assert np.allclose(s.gather_z(), 0.0)
    assert np.allclose(s.gather_x(), 1.0)
    assert np.allclose(admm.feasible_point(s), 0.0)


def test_second_round_by_hand(linear):
    s = _state(linear)
    admm.iterate(s)
    admm.iterate(s)
    # p0 is held by two links and its request, p1 and p2 by one link each
    assert np.allclose(s.gather_z_tilde(), [1 / 3, 1 / 2, 1 / 2])
    assert np.allclose(s.gather_u(), -np.array([1 / 3, 1 / 2, 1 / 3, 1 / 2]))
    assert np.allclose(s.gather_v(), [2 / 3, 1 / 2, 1 / 2])
    # link j1: project (2/3, 1) onto the simplex of radius 1 -> (1/3, 2/3)
    assert np.allclose(s.gather_z(), [1 / 3, 2 / 3, 1 / 3, 2 / 3])


def test_layout_orders_copies_by_link(linear):
    lay = admm.Layout.build(linear)
    assert lay.path_ids == ("p0", "p1", "p2")
    assert list(lay.copy_link) == [0, 0, 1, 1]
    assert list(lay.copy_path) == [0, 1, 0, 2]
    assert list(lay.multiplicity) == [3, 2, 2]
    x = np.array([0.1, 0.2, 0.3])
    assert np.allclose(lay.link_load(x), [0.3, 0.4])
    assert np.allclose(lay.aggregate(x), x)


# -- setup ---------------------------------------------------------------------

def test_init_defaults(linear):
    s = admm.init_state(linear)
    assert s.lam == pytest.approx(1 / 3)
    assert s.num_domains == 1 and s.iteration == 0 and not s.switching
    assert np.all(s.gather_z() == 0) and np.all(s.gather_u() == 0)


@pytest.mark.parametrize("lam", [0.0, -1.0, float("inf")])
def test_init_rejects_bad_lambda(linear, lam):
    with pytest.raises(ValueError):
        admm.init_state(linear, lam=lam)


def test_init_point_by_id(linear):
    s = admm.init_state(linear, init_point={"p1": 0.25})
    assert np.allclose(s.gather_x(), [0.0, 0.25, 0.0])
    with pytest.raises(ValueError):
        admm.init_state(linear, init_point=[1.0, 2.0])


def test_foreign_partition_rejected(linear):
    other = single_link()
    with pytest.raises(InstanceError):
        admm.init_state(linear, make_partition(other, {"j": 0}, 1))


# -- solving -------------------------------------------------------------------

def test_linear_network_converges(linear):
    state, trace = admm.solve_instance(linear, stop=admm.StopRule(1e-6, 20000, step_threshold=1e-10))
    assert trace.converged and trace.stop_reason == "residuals"
    y = state.layout.aggregate(trace.feasible)
    assert np.allclose(y, [1 / 3, 2 / 3, 2 / 3], atol=1e-5)


def test_optimum_is_nearly_fixed(linear):
    state, trace = admm.solve_instance(linear, stop=admm.StopRule(1e-8, 50000, step_threshold=1e-12))
    before = state.gather_z_tilde()
    admm.iterate(state)
    assert np.max(np.abs(state.gather_z_tilde() - before)) < 1e-7


def test_anytime_feasible_every_round():
    inst = random_ba_instance(20, 25, (1, 3), seed=1)
    s = admm.init_state(inst, partition_domains(inst, 3, seed=0))
    lay = s.layout
    for _ in range(100):
        admm.iterate(s)
        z = admm.feasible_point(s)
        assert np.all(z >= 0)
        assert np.all(lay.link_load(z) <= lay.caps + 1e-9)


def test_partition_does_not_change_iterates():
    inst = random_ba_instance(20, 25, (1, 3), seed=2)
    a = admm.init_state(inst)
    b = admm.init_state(inst, partition_domains(inst, 4, seed=1))
    for za, zb in zip(admm.iter_rounds(a, 60), admm.iter_rounds(b, 60)):
        assert np.allclose(za, zb, rtol=0, atol=1e-12)


def test_workers_are_deterministic():
    inst = random_ba_instance(20, 25, (1, 3), seed=3)
    part = partition_domains(inst, 4, seed=0)
    a = admm.init_state(inst, part)
    b = admm.init_state(inst, part, workers=4)
    for za, zb in zip(admm.iter_rounds(a, 40), admm.iter_rounds(b, 40)):
        assert np.array_equal(za, zb)


def test_floats_sent_accumulate():
    inst = random_ba_instance(20, 25, (1, 3), seed=4)
    s = admm.init_state(inst, partition_domains(inst, 3, seed=0))
    trace = admm.solve(s, admm.StopRule(max_iters=7, residual_threshold=1e-12))
    assert trace.iterations == 7 and trace.stop_reason == "max_iters"
    assert np.array_equal(s.floats_sent, 7 * trace.pair_floats)
    assert set(trace.column("floats_sent_total")) == {trace.pair_floats.sum()}


def test_trace_csv(linear):
    _, trace = admm.solve_instance(linear, stop=admm.StopRule(max_iters=3, residual_threshold=1e-12),
                                   phi_star=-1.9095425048844386)
    lines = trace.to_csv().splitlines()
    assert lines[0] == ",".join(admm.TRACE_COLUMNS)
    assert len(lines) == 4
    assert lines[1].startswith("1,")
    assert trace.pairs_csv() == "source_domain,target_domain,floats_per_round\n"


def test_gap_is_one_while_aggregates_vanish(linear):
    _, trace = admm.solve_instance(linear, lam=1.0, stop=admm.StopRule(max_iters=1),
                                   phi_star=-1.9)
    assert trace.column("optimality_gap")[0] == 1.0
    assert np.isnan(trace.column("fairness_value")[0])


def test_no_requests():
    inst = Instance((Link("j", 1.0),), (), (), 1.0)
    state, trace = admm.solve_instance(inst)
    assert trace.converged and trace.iterations == 1
    assert len(trace.feasible) == 0


def test_deadline_stops():
    inst = random_ba_instance(20, 25, seed=5)
    _, trace = admm.solve_instance(inst, stop=admm.StopRule(1e-14, 10**6, deadline_seconds=0.05))
    assert trace.stop_reason == "deadline"


# -- switching cost ------------------------------------------------------------

def test_theta_zero_matches_plain_rounds():
    inst = random_ba_instance(20, 20, (1, 3), seed=6)
    a = admm.init_state(inst)
    b = admm.init_state(inst, theta=0.0, baseline=np.ones(len(inst.paths)))
    assert b.switching
    for za, zb in zip(admm.iter_rounds(a, 50), admm.iter_rounds(b, 50)):
        assert np.allclose(za, zb, atol=1e-8)


def test_switching_toggles(linear):
    s = admm.init_state(linear)
    admm.set_switching(s, 1.0, {"p0": 0.5})
    assert np.allclose(s.gather_baseline(), [0.5, 0.0, 0.0])
    admm.set_switching(s, None)
    assert not s.switching and s.gather_baseline() is None
    with pytest.raises(ValueError):
        admm.set_switching(s, -1.0)


def test_large_theta_holds_the_baseline(linear):
    x0 = np.array([0.25, 0.5, 0.5])
    s = admm.init_state(linear, lam=1.0, theta=1e3, baseline=x0, init_point=x0)
    trace = admm.solve(s, admm.StopRule(1e-6, 20000))
    assert np.allclose(trace.feasible, x0, atol=1e-3)


# -- events --------------------------------------------------------------------

def test_weight_change_matches_fresh_instance(linear):
    s = admm.init_state(linear, lam=0.5)
    s = admm.apply_event(s, admm.WeightChange("r1", 3.0))
    fresh = admm.init_state(linear.with_weights({"r1": 3.0}), lam=0.5)
    for za, zb in zip(admm.iter_rounds(s, 30), admm.iter_rounds(fresh, 30)):
        assert np.array_equal(za, zb)


def test_weight_change_errors(linear):
    s = admm.init_state(linear)
    with pytest.raises(InstanceError):
        admm.apply_event(s, admm.WeightChange("nope", 1.0))
    with pytest.raises(InstanceError):
        admm.apply_event(s, admm.WeightChange("r1", 0.0))


def test_add_and_remove_requests(linear):
    s = admm.init_state(linear, lam=0.5)
    for _ in range(20):
        admm.iterate(s)
    before = dict(zip(s.layout.path_ids, s.gather_x()))
    s = admm.apply_event(s, admm.RequestAdd(Request("r3", 1.0, ("p3",)), (Path("p3", ("j1", "j2")),)))
    assert s.layout.path_ids == ("p0", "p1", "p2", "p3")
    x = dict(zip(s.layout.path_ids, s.gather_x()))
    assert x["p3"] == 0.0
    assert all(x[p] == before[p] for p in before)
    s = admm.apply_event(s, admm.RequestRemove("r1"))
    assert "p1" not in s.layout.path_ids
    trace = admm.solve(s, admm.StopRule(1e-7, 50000, step_threshold=1e-10))
    y = admm.aggregate_by_id(s, trace.feasible)
    # r0 and r3 share both links, r2 only j2: j1 splits evenly, j2 has r2 take what is left
    assert y["r0"] == pytest.approx(y["r3"], abs=1e-4)
    assert y["r0"] + y["r2"] + y["r3"] == pytest.approx(1.0, abs=1e-4)
    with pytest.raises(InstanceError):
        admm.apply_event(s, admm.RequestRemove("r1"))
    with pytest.raises(InstanceError):
        admm.apply_event(s, admm.RequestAdd(Request("r0", 1.0, ("q",)), (Path("q", ("j1",)),)))


def test_baseline_reset(linear):
    s = admm.init_state(linear, lam=0.5)
    for _ in range(10):
        admm.iterate(s)
    s = admm.apply_event(s, admm.BaselineReset(theta=0.2))
    assert s.theta == 0.2
    assert np.allclose(s.gather_baseline(), admm.feasible_point(s))


# -- residuals -----------------------------------------------------------------

def test_residuals_zero_at_consensus(linear):
    s = _state(linear)
    assert admm.residuals(s) == admm.Residuals(0.0, 0.0)
    s.z_tilde_prev = s.gather_z_tilde()
    assert admm.residuals(s) == admm.Residuals(0.0, 0.0)


def test_primal_residual_one_copy_off(linear):
    s = _state(linear)
    s.z_tilde_prev = s.gather_z_tilde()
    s.domains[0].z[2] += 0.3
    n = s.layout.num_copies
    assert admm.residuals(s).primal == pytest.approx(0.3 / np.sqrt(n))


def test_dual_residual_scales_with_inverse_lambda(linear):
    a, b = _state(linear, lam=1.0), _state(linear, lam=0.5)
    for s in (a, b):
        s.z_tilde_prev = s.gather_z_tilde() - 0.1
    assert admm.residuals(b).dual == pytest.approx(2 * admm.residuals(a).dual)


def test_infinite_threshold_stops_after_one_round(linear):
    _, trace = admm.solve_instance(linear, stop=admm.StopRule(float("inf")))
    assert trace.iterations == 1 and trace.converged


def test_consistency_bound_at_termination():
    inst = random_ba_instance(20, 20, (1, 3), seed=8)
    state, trace = admm.solve_instance(inst, stop=admm.StopRule(1e-2))
    lay = state.layout
    zc = state.gather_z_tilde()
    gap = max(np.max(np.abs(state.gather_z() - zc[lay.copy_path])), np.max(np.abs(state.gather_x() - zc)))
    assert gap <= 1e-2 * np.sqrt(lay.num_copies)


def test_start_at_optimum_keeps_consensus(linear):
    s = admm.init_state(linear, init_point=[1 / 3, 2 / 3, 2 / 3])
    admm.iterate(s)
    assert np.allclose(s.gather_z_tilde(), [1 / 3, 2 / 3, 2 / 3], atol=1e-12)


def test_identical_weight_change_is_a_noop(linear):
    a = admm.init_state(linear, lam=0.5)
    b = admm.apply_event(admm.init_state(linear, lam=0.5), admm.WeightChange("r0", 1.0))
    for za, zb in zip(admm.iter_rounds(a, 20), admm.iter_rounds(b, 20)):
        assert np.array_equal(za, zb)


def test_uniform_weight_scaling_keeps_proportional_optimum():
    inst = random_ba_instance(15, 10, (1, 3), seed=9, capacity=10.0)
    doubled = inst.with_weights({r.id: 2.0 for r in inst.requests})
    stop = admm.StopRule(1e-6, 50000, step_threshold=1e-10)
    sa, ta = admm.solve_instance(inst, stop=stop)
    sb, tb = admm.solve_instance(doubled, stop=stop)
    assert np.allclose(sa.layout.aggregate(ta.feasible), sb.layout.aggregate(tb.feasible), atol=1e-4)


def test_remove_request_keeps_feasibility():
    inst = random_ba_instance(20, 20, (1, 3), seed=10)
    s = admm.init_state(inst, partition_domains(inst, 2, seed=0))
    for _ in range(30):
        admm.iterate(s)
    s = admm.apply_event(s, admm.RequestRemove(inst.requests[0].id))
    for _ in range(5):
        z = admm.feasible_point(s)
        assert np.all(s.layout.link_load(z) <= s.layout.caps + 1e-9)
        admm.iterate(s)
