import numpy as np
import pytest

from collitest import congest as cg
from collitest.conditions import plan_centralized
from collitest.dist import Distribution, make_bump, make_uniform
from collitest.errors import (CapacityError, InvalidNetworkError,
                              ModelViolationError, ProtocolRefusedError)
from collitest.graph import (ComparisonGraph, graph_power, make_clique,
                             make_clique_union, make_cycle, make_path,
                             make_star, random_connected_graph)
from collitest.rng import Stream
from collitest import tester


def bfs_distances_oracle(topology, source):
    adjacency = topology.adjacency()
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adjacency[u]:
                if int(v) not in dist:
                    dist[int(v)] = dist[u] + 1
                    nxt.append(int(v))
        frontier = nxt
    return dist


class TestNetwork:
    def test_rejects_disconnected(self):
        with pytest.raises(InvalidNetworkError):
            cg.Network(ComparisonGraph(4, [(0, 1), (2, 3)]), 4)

    def test_diameter_recomputed(self):
        assert cg.Network(make_path(7), 4).diameter == 6
        assert cg.Network(make_clique(5), 4).diameter == 1
        assert cg.Network(make_cycle(10), 4).diameter == 5
        assert cg.Network(make_clique_union([1]), 4).diameter == 0

    def test_channel_budget_formula(self):
        net = cg.Network(make_clique(8), 16)
        assert net.channel_bits == int(np.ceil(8 * (np.log2(16) + np.log2(8))))


class TestBitMeter:
    def test_overrun_raises(self):
        net = cg.Network(make_path(2), 1)  # channel = 8 * (0 + 1) = 8 bits
        meter = cg.BitMeter(net)
        meter.begin_round()
        meter.send(0, 1, 5)
        with pytest.raises(ModelViolationError):
            meter.send(0, 1, 5)

    def test_directions_are_independent(self):
        net = cg.Network(make_path(2), 1)
        meter = cg.BitMeter(net)
        meter.begin_round()
        meter.send(0, 1, 8)
        meter.send(1, 0, 8)

    def test_transcript_records_sends(self):
        net = cg.Network(make_path(3), 4)
        meter = cg.BitMeter(net, record_transcript=True)
        meter.begin_round()
        meter.send(0, 1, 3)
        meter.begin_round()
        meter.send(1, 2, 4)
        log = meter.to_json()
        assert log[0]["sends"] == [[0, 1, 3]]
        assert log[1]["round"] == 2


class TestBfsTree:
    def test_path_rooted_at_far_end(self):
        net = cg.Network(make_path(5), 4)
        tree = cg.build_bfs_tree(net)
        assert tree.root == 4
        assert tree.depth.tolist() == [4, 3, 2, 1, 0]
        assert tree.rounds <= cg.C_BFS * net.diameter + cg.C0

    def test_clique_is_flat(self):
        net = cg.Network(make_clique(5), 4)
        tree = cg.build_bfs_tree(net)
        assert tree.root == 4
        assert sorted(tree.depth.tolist()) == [0, 1, 1, 1, 1]

    def test_single_node(self):
        tree = cg.build_bfs_tree(cg.Network(make_clique_union([1]), 4))
        assert tree.rounds == 0
        assert tree.preorder == [0]

    def test_depths_match_direct_bfs_on_random_corpus(self):
        gen = Stream(71).rng()
        for _ in range(25):
            k = int(gen.integers(2, 25))
            topo = random_connected_graph(k, gen)
            net = cg.Network(topo, 8)
            tree = cg.build_bfs_tree(net)
            oracle = bfs_distances_oracle(topo, k - 1)
            assert tree.root == k - 1
            assert [oracle[v] for v in range(k)] == tree.depth.tolist()
            assert tree.rounds <= cg.C_BFS * net.diameter + cg.C0
            for v in range(k):
                if v != tree.root:
                    assert tree.depth[v] == tree.depth[tree.parent[v]] + 1

    def test_preorder_is_depth_first(self):
        net = cg.Network(make_path(6), 4)
        tree = cg.build_bfs_tree(net)
        assert tree.preorder == [5, 4, 3, 2, 1, 0]


class TestDetection:
    def test_star_refuses_at_desk_scale(self):
        net = cg.Network(make_star(40), 16)
        det = cg.detect_topology(net, 16, 1.0)
        assert not det.certified
        assert det.tau_star is None

    def test_clique_certifies_when_large_enough(self):
        plan = plan_centralized(4, 1.0)
        k = plan.clique_sizes[0]
        net = cg.Network(make_clique(k), 4)
        det = cg.detect_topology(net, 4, 1.0,
                                 tau_grid=list(cg.COARSE_TAU_GRID) + [plan.tau])
        assert det.certified

    def test_aggregates_match_direct_computation(self):
        gen = Stream(29).rng()
        for _ in range(100):
            k = int(gen.integers(2, 30))
            topo = random_connected_graph(k, gen)
            net = cg.Network(topo, 16)
            tree = cg.build_bfs_tree(net)
            det = cg.detect_topology(net, 16, 1.0, tree=tree)
            assert det.edge_count == topo.edge_count
            assert det.two_path_count == topo.two_path_count
            assert det.rounds <= cg.C_DET * net.diameter + cg.C0

    def test_single_node_has_nothing_to_certify(self):
        net = cg.Network(make_clique_union([1]), 4)
        det = cg.detect_topology(net, 4, 1.0)
        assert not det.certified


class TestLocalProtocol:
    def setup_method(self):
        plan = plan_centralized(4, 1.0)
        self.k = plan.clique_sizes[0]
        self.net = cg.Network(make_clique(self.k), 4)
        self.tree = cg.build_bfs_tree(self.net)
        self.det = cg.detect_topology(
            self.net, 4, 1.0,
            tau_grid=list(cg.COARSE_TAU_GRID) + [plan.tau], tree=self.tree)
        assert self.det.certified

    def test_decision_matches_topology_tester(self):
        p = make_uniform(4)
        for trial in range(10):
            run = cg.local_collision_protocol(
                self.net, 4, 1.0, self.det.tau_star, p,
                Stream(3).child(trial), tree=self.tree)
            spec = tester.TesterSpec(self.net.topology, self.det.tau_star, 4, 1.0)
            mono = tester.evaluate(spec, run.values)
            assert run.z == mono.z
            assert run.decision == mono.decision

    def test_orientation_counts_each_edge_once(self):
        run = cg.local_collision_protocol(
            self.net, 4, 1.0, self.det.tau_star, make_uniform(4),
            Stream(4).child(0), tree=self.tree)
        values = run.values
        e = self.net.topology.edges
        direct = int(np.count_nonzero(values[e[:, 0]] == values[e[:, 1]]))
        higher = sum(
            int(np.count_nonzero((values[self.net.adjacency[v]] == values[v])
                                 & (self.net.adjacency[v] > v)))
            for v in range(self.net.k))
        assert run.z == direct == higher

    def test_point_mass_rejected(self):
        p = Distribution([1.0, 0.0, 0.0, 0.0])
        run = cg.local_collision_protocol(
            self.net, 4, 1.0, self.det.tau_star, p, Stream(5).child(0),
            tree=self.tree)
        assert run.decision == "NO"

    def test_round_budget(self):
        meter = cg.BitMeter(self.net)
        run = cg.local_collision_protocol(
            self.net, 4, 1.0, self.det.tau_star, make_uniform(4),
            Stream(6).child(0), tree=self.tree, meter=meter)
        assert run.rounds <= 1 + cg.C_SUM * self.net.diameter + cg.C0
        assert meter.rounds == run.rounds

    def test_rounds_do_not_depend_on_domain_size(self):
        # same topology, two domain sizes that both certify
        plan = plan_centralized(2, 1.0)
        net = cg.Network(make_clique(max(self.k, plan.clique_sizes[0])), 4)
        tree = cg.build_bfs_tree(net)
        rounds = []
        for n in (2, 4):
            det = cg.detect_topology(
                net, n, 1.0,
                tau_grid=list(cg.COARSE_TAU_GRID) + [plan.tau, self.det.tau_star])
            assert det.certified
            run = cg.local_collision_protocol(
                net, n, 1.0, det.tau_star, make_uniform(n),
                Stream(7).child(0), tree=tree)
            rounds.append(run.rounds)
        assert rounds[0] == rounds[1]

    def test_uncertified_topology_refused(self):
        net = cg.Network(make_star(10), 16)
        with pytest.raises(ProtocolRefusedError):
            cg.local_collision_protocol(net, 16, 1.0, 0.5, make_uniform(16),
                                        Stream(0).child(0))


class TestBundleAssignment:
    def test_partition_shape(self):
        gen = Stream(17).rng()
        for _ in range(20):
            k = int(gen.integers(4, 40))
            net = cg.Network(random_connected_graph(k, gen), 4)
            tree = cg.build_bfs_tree(net)
            s = int(gen.integers(2, 6))
            assignment = cg.bundle_assignment(tree, s)
            assert len(assignment.bundles) == k // s
            assert all(len(b) == s for b in assignment.bundles)
            bundled = [v for b in assignment.bundles for v in b]
            assert len(bundled) == len(set(bundled))
            assert len(assignment.leftover) == k - s * (k // s)
            assert set(bundled) | set(assignment.leftover) == set(range(k))

    def test_holder_owns_its_bundle_subtree(self):
        net = cg.Network(make_path(20), 4)
        tree = cg.build_bfs_tree(net)
        assignment = cg.bundle_assignment(tree, 3)
        for members, holder in zip(assignment.bundles, assignment.bundle_holder):
            for v in members:
                # walk up from v; must meet the holder
                node = v
                while node != holder and tree.parent[node] >= 0:
                    node = int(tree.parent[node])
                assert node == holder

    def test_deterministic(self):
        net = cg.Network(make_cycle(15), 4)
        tree = cg.build_bfs_tree(net)
        a = cg.bundle_assignment(tree, 4)
        b = cg.bundle_assignment(tree, 4)
        assert a.bundles == b.bundles and a.bundle_holder == b.bundle_holder


class TestPipelined:
    def test_path_topology_end_to_end(self):
        net = cg.Network(make_path(150), 4)
        tree = cg.build_bfs_tree(net)
        plan = cg.choose_bundle_plan(4, 1.0, 150)
        assert plan.s == 3
        p = make_uniform(4)
        for trial in range(30):
            meter = cg.BitMeter(net)
            run = cg.pipelined_bundle_protocol(net, 4, 1.0, p,
                                               Stream(21).child(trial),
                                               tree=tree, meter=meter)
            graph = make_clique_union([plan.s] * plan.ell)
            order = [v for bundle in run.assignment.bundles for v in bundle]
            spec = tester.TesterSpec(graph, plan.tau, 4, 1.0)
            mono = tester.evaluate(spec, run.values[np.array(order)])
            assert run.decision == mono.decision
            if run.z is not None:
                assert run.z == mono.z
            assert (tree.rounds + run.rounds
                    <= cg.C_PIPE * (net.diameter + plan.s) + cg.C0)

    def test_bundle_size_rejected_below_three(self):
        with pytest.raises(CapacityError):
            cg.choose_bundle_plan(256, 1.0, 20)

    def test_insufficient_nodes_surface_as_capacity_error(self):
        net = cg.Network(make_path(20), 256)
        with pytest.raises(CapacityError):
            cg.pipelined_bundle_protocol(net, 256, 1.0, make_uniform(256),
                                         Stream(0).child(0))

    def test_hand_traceable_two_bundles(self):
        # a path of 8 with bundles of 4: two bundles, rounds within budget
        net = cg.Network(make_path(8), 2)
        tree = cg.build_bfs_tree(net)
        plan = cg.BundlePlan(s=4, ell=2, tau=0.5, edge_count=12,
                             two_path_count=48, n=2, eps=1.0)
        run = cg.pipelined_bundle_protocol(net, 2, 1.0, make_uniform(2),
                                           Stream(9).child(0), tree=tree,
                                           plan=plan)
        assert len(run.assignment.bundles) == 2
        assert run.rounds + tree.rounds <= cg.C_PIPE * (7 + 4) + cg.C0


class TestCombined:
    def test_certified_clique_takes_local_path(self):
        plan = plan_centralized(4, 1.0)
        net = cg.Network(make_clique(plan.clique_sizes[0]), 4)
        run = cg.combined_protocol(
            net, 4, 1.0, make_uniform(4), Stream(12).child(0),
            tau_grid=list(cg.COARSE_TAU_GRID) + [plan.tau])
        assert run.path == "local"

    def test_star_falls_back_to_pipelining(self):
        net = cg.Network(make_star(149), 4)
        run = cg.combined_protocol(net, 4, 1.0, make_uniform(4),
                                   Stream(13).child(0))
        assert run.path == "pipelined"
        assert not run.detection.certified

    def test_path_falls_back_to_pipelining(self):
        net = cg.Network(make_path(150), 4)
        detection = None
        for trial in range(5):
            run = cg.combined_protocol(net, 4, 1.0, make_uniform(4),
                                       Stream(14).child(trial),
                                       detection=detection)
            detection = run.detection
            assert run.path == "pipelined"
            s = run.pipelined.plan.s
            assert run.rounds <= cg.C_PIPE * (net.diameter + s) + cg.C0

    def test_local_path_is_cheaper_when_both_apply(self):
        plan = plan_centralized(4, 1.0)
        net = cg.Network(make_clique(plan.clique_sizes[0]), 4)
        tree = cg.build_bfs_tree(net)
        det = cg.detect_topology(net, 4, 1.0,
                                 tau_grid=list(cg.COARSE_TAU_GRID) + [plan.tau],
                                 tree=tree)
        local = cg.local_collision_protocol(net, 4, 1.0, det.tau_star,
                                            make_uniform(4),
                                            Stream(15).child(0), tree=tree)
        piped = cg.pipelined_bundle_protocol(net, 4, 1.0, make_uniform(4),
                                             Stream(15).child(0), tree=tree)
        assert local.rounds <= piped.rounds


class TestRoundReplay:
    def test_meter_rounds_match_reported_rounds(self):
        net = cg.Network(make_path(30), 4)
        tree_meter = cg.BitMeter(net)
        tree = cg.build_bfs_tree(net, tree_meter)
        assert tree_meter.rounds == tree.rounds
        det_meter = cg.BitMeter(net)
        det = cg.detect_topology(net, 4, 1.0, tree=tree, meter=det_meter)
        assert det_meter.rounds == det.rounds
        pipe_meter = cg.BitMeter(net, record_transcript=True)
        run = cg.pipelined_bundle_protocol(net, 4, 1.0, make_uniform(4),
                                           Stream(61).child(0), tree=tree,
                                           plan=cg.BundlePlan(
                                               s=3, ell=10, tau=0.5,
                                               edge_count=30,
                                               two_path_count=60, n=4,
                                               eps=1.0),
                                           meter=pipe_meter)
        assert pipe_meter.rounds == run.rounds
        # transcript replay: per-edge totals never exceed the channel
        for entry in pipe_meter.to_json():
            per_edge = {}
            for u, v, bits in entry["sends"]:
                per_edge[(u, v)] = per_edge.get((u, v), 0) + bits
            assert all(b <= net.channel_bits for b in per_edge.values())


class TestGraphPowerDetection:
    def test_power_one_agrees_with_detection(self):
        net = cg.Network(make_cycle(12), 16)
        det = cg.detect_topology(net, 16, 1.0)
        pw = cg.graph_power_detection(net, 16, 1.0, 1)
        assert (pw.edge_count, pw.two_path_count) == (det.edge_count,
                                                      det.two_path_count)
        assert pw.certified == det.certified

    def test_stats_match_power_oracle_on_cycle20(self):
        net = cg.Network(make_cycle(20), 4)
        for t in (2, 3):
            pw = cg.graph_power_detection(net, 4, 1.0, t)
            oracle = graph_power(net.topology, t)
            assert pw.edge_count == oracle.edge_count
            assert pw.two_path_count == oracle.two_path_count

    def test_diameter_bounded_topology_powers_to_clique(self):
        gen = Stream(33).rng()
        topo = random_connected_graph(10, gen, extra_edge_prob=0.4)
        net = cg.Network(topo, 4)
        t = net.diameter
        pw = cg.graph_power_detection(net, 4, 1.0, max(t, 1))
        k = net.k
        assert pw.edge_count == k * (k - 1) // 2
        assert pw.two_path_count == k * (k - 1) * (k - 2)

    def test_round_budget_when_balls_fit(self):
        net = cg.Network(make_cycle(20), 4)
        for t in (1, 2, 3):
            pw = cg.graph_power_detection(net, 4, 1.0, t)
            assert pw.congestion_ok
            assert pw.rounds <= cg.C_POW * t * net.diameter + cg.C0

    def test_congestion_flagged_on_dense_topology(self):
        net = cg.Network(make_clique(60), 2)
        pw = cg.graph_power_detection(net, 2, 1.0, 2)
        assert not pw.congestion_ok
