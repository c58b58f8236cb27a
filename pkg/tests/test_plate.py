"""Discretization and solver: stencil oracles, inertia detection,
extension-by-zero semantics and the deflection benchmark."""

import math

import numpy as np
import pytest
import scipy.linalg

from platelab import (
    ConvexDomain,
    EmptyGrid,
    IndefiniteSystem,
    LoadSpec,
    NoConvergence,
    PreconditionViolated,
    ValidationError,
    assemble,
    buckling_load,
    convex_hull,
    discretize,
    disk_domain,
    solve_membrane,
    solve_plate,
)
from platelab.plate import (
    cg_solve,
    load_ratio_tau,
    report_json_dict,
    write_field_csv,
)


def square_domain(side=1.0, corner=(0.0, 0.0), ball_radius=2.0):
    x0, y0 = corner
    return convex_hull(
        [(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)],
        ball_radius,
    )


class TestDiscretize:
    def test_unit_square_nine_active_nodes(self):
        grid = discretize(square_domain(), 0.25)
        assert grid.active_count == 9
        # strict interior only: multiples of 1/4 strictly inside (0,1)^2
        assert np.all(grid.positions > 0.0) and np.all(grid.positions < 1.0)

    def test_tiny_triangle_between_nodes(self):
        tri = convex_hull([(0.05, 0.05), (0.07, 0.05), (0.06, 0.07)], 1.0)
        with pytest.raises(EmptyGrid):
            discretize(tri, 0.125)

    def test_disk_count_against_bruteforce(self, unit_disk):
        h = 1.0 / 32.0
        grid = discretize(unit_disk, h)
        verts = unit_disk.vertices
        edges = [(verts[i], verts[(i + 1) % len(verts)])
                 for i in range(len(verts))]
        count = 0
        coords = [-1.0 + h * i for i in range(65)]
        for x in coords:
            for y in coords:
                inside = True
                for p, q in edges:
                    if (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]) <= 0:
                        inside = False
                        break
                count += inside
        assert grid.active_count == count
        expected = math.pi / h ** 2
        assert abs(grid.active_count - expected) <= 0.03 * expected

    def test_deterministic(self, unit_disk):
        g1 = discretize(unit_disk, 1.0 / 16.0)
        g2 = discretize(unit_disk, 1.0 / 16.0)
        assert np.array_equal(g1.index, g2.index)
        assert np.array_equal(g1.positions, g2.positions)

    def test_spacing_precondition(self, unit_disk):
        with pytest.raises(PreconditionViolated):
            discretize(unit_disk, 0.2)
        with pytest.raises(PreconditionViolated):
            discretize(unit_disk, 0.0)

    def test_nodes_inside_domain_and_ball(self, strip):
        grid = discretize(strip, 1.0 / 16.0)
        assert np.all(grid.boundary_distance > 0.0)
        radii = np.hypot(grid.positions[:, 0], grid.positions[:, 1])
        assert np.all(radii <= strip.ball_radius)


class TestAssemble:
    def test_single_node_stencil_centers(self):
        h = 0.125
        tiny = square_domain(side=0.2, corner=(-0.1, -0.1), ball_radius=1.0)
        ops = assemble(discretize(tiny, h))
        assert ops.grid.active_count == 1
        assert ops.A.toarray()[0, 0] == 20.0 / h ** 4
        assert ops.B.toarray()[0, 0] == 4.0 / h ** 2

    def test_b_annihilates_constants_deep_inside(self):
        grid = discretize(square_domain(), 1.0 / 16.0)
        ops = assemble(grid)
        ones = np.ones(grid.active_count)
        bu = ops.B @ ones
        # rows whose 4 neighbours are all active see a zero row sum
        idx = grid.index
        for k, (i, j) in enumerate(grid.nodes):
            if all(idx[i + di, j + dj] >= 0
                   for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1))):
                assert bu[k] == 0.0

    def test_five_point_eigenvalue_closed_form(self):
        h = 0.25
        grid = discretize(square_domain(), h)
        ops = assemble(grid)
        u = np.sin(math.pi * grid.positions[:, 0]) * \
            np.sin(math.pi * grid.positions[:, 1])
        lam = (u @ (ops.B @ u)) / (u @ u)
        exact = 2.0 * (4.0 / h ** 2) * math.sin(math.pi * h / 2.0) ** 2
        assert lam == pytest.approx(exact, rel=1e-12)

    def test_symmetry(self, disk_ops_16, rng):
        A, B = disk_ops_16.A, disk_ops_16.B
        assert (A - A.T).count_nonzero() == 0
        assert (B - B.T).count_nonzero() == 0
        n = A.shape[0]
        for _ in range(5):
            u, v = rng.standard_normal(n), rng.standard_normal(n)
            uav, vau = u @ (A @ v), v @ (A @ u)
            assert uav == pytest.approx(vau, rel=1e-12)

    def test_coercivity(self, disk_ops_16, rng):
        n = disk_ops_16.A.shape[0]
        for _ in range(10):
            u = rng.standard_normal(n)
            assert u @ (disk_ops_16.A @ u) > 0.0
            assert u @ (disk_ops_16.B @ u) > 0.0

    def test_quadrature_weight(self, disk_ops_16):
        assert disk_ops_16.quadrature_weight == disk_ops_16.h ** 2


class TestSolve:
    def test_disk_center_deflection(self, unit_disk):
        ops = assemble(discretize(unit_disk, 1.0 / 64.0))
        report = solve_plate(ops, 0.0, LoadSpec.constant(1.0))
        assert report.center_value == pytest.approx(1.0 / 64.0, rel=0.05)
        assert report.residual <= 1e-10

    def test_zero_load(self, disk_ops_16):
        report = solve_plate(disk_ops_16, 0.0, LoadSpec.constant(0.0))
        assert np.all(report.u == 0.0)
        assert report.min_u == 0.0
        assert report.residual == 0.0

    def test_linearity_exact(self, disk_ops_16):
        r1 = solve_plate(disk_ops_16, 3.0, LoadSpec.constant(1.0))
        r2 = solve_plate(disk_ops_16, 3.0, LoadSpec.constant(2.0))
        assert np.array_equal(2.0 * r1.u, r2.u)

    def test_error_decreases_with_refinement(self, unit_disk):
        errs = []
        for h in (1.0 / 16.0, 1.0 / 32.0):
            ops = assemble(discretize(unit_disk, h))
            report = solve_plate(ops, 0.0, LoadSpec.constant(1.0))
            errs.append(abs(report.center_value - 1.0 / 64.0))
        assert errs[1] < errs[0]

    def test_interior_minimum_excludes_boundary_layer(self, strip_ops_24):
        report = solve_plate(strip_ops_24, 0.0,
                             LoadSpec.gaussian_bump((-2.5, 0.0), 0.3, 1.0))
        grid = strip_ops_24.grid
        interior = grid.boundary_distance >= 2.0 * grid.h
        assert report.min_u_interior == report.u[interior].min()
        assert report.min_u <= report.min_u_interior

    def test_membrane_limit_smoke(self, disk_ops_32):
        gamma = 1.0e4
        report = solve_plate(disk_ops_32, gamma, LoadSpec.constant(1.0))
        assert gamma * report.center_value == pytest.approx(0.25, rel=0.10)
        v = solve_membrane(disk_ops_32, LoadSpec.constant(1.0))
        center = disk_ops_32.grid.nearest_active((0.0, 0.0))
        assert v[center] == pytest.approx(0.25, rel=0.10)

    def test_indefinite_below_buckling_load(self, disk_ops_16):
        mu1 = buckling_load(disk_ops_16).mu1
        ok = solve_plate(disk_ops_16, -0.99 * mu1, LoadSpec.constant(1.0))
        assert ok.residual <= 1e-10
        with pytest.raises(IndefiniteSystem):
            solve_plate(disk_ops_16, -1.01 * mu1, LoadSpec.constant(1.0))

    def test_unknown_method_rejected(self, disk_ops_16):
        with pytest.raises(ValidationError):
            solve_plate(disk_ops_16, 0.0, LoadSpec.constant(1.0), method="qr")


class TestInertiaDetection:
    def test_negative_pivot_count_matches_dense_inertia(self):
        # independent oracle: dense generalized eigenvalues of (A, B)
        ops = assemble(discretize(disk_domain(1.0, k=32), 1.0 / 8.0))
        from platelab.plate import _factorize

        A, B = ops.A.toarray(), ops.B.toarray()
        eigs = scipy.linalg.eigh(A, B, eigvals_only=True)
        # shift into well-separated spectral gaps (the disk spectrum has
        # degenerate pairs, so midpoints of tight clusters are ambiguous)
        shifts = [0.5 * eigs[0]]
        for lo, hi in zip(eigs, eigs[1:]):
            if hi - lo > 1.0 and len(shifts) < 5:
                shifts.append(0.5 * (lo + hi))
        for sigma in shifts:
            shifted = (ops.A - sigma * ops.B).tocsc()
            _, n_negative = _factorize(shifted)
            assert n_negative == int(np.sum(eigs < sigma))


class TestConjugateGradient:
    def test_matches_direct_solve(self, disk_ops_16):
        f = LoadSpec.constant(1.0)
        direct = solve_plate(disk_ops_16, 5.0, f, method="direct")
        viacg = solve_plate(disk_ops_16, 5.0, f, method="cg")
        assert viacg.u == pytest.approx(direct.u, rel=1e-6, abs=1e-12)
        assert viacg.residual <= 1e-10

    def test_negative_curvature_detected(self, disk_ops_16):
        mu1_vec = buckling_load(disk_ops_16)
        M = (disk_ops_16.A - 1.5 * mu1_vec.mu1 * disk_ops_16.B).tocsc()
        with pytest.raises(IndefiniteSystem):
            cg_solve(M, disk_ops_16.B @ mu1_vec.eigenvector)


class TestLoadSpec:
    def test_negative_amplitude_rejected(self):
        with pytest.raises(ValidationError):
            LoadSpec.constant(-1.0)

    def test_bad_bump_width_rejected(self):
        with pytest.raises(ValidationError):
            LoadSpec.gaussian_bump((0, 0), 0.0, 1.0)

    def test_negative_grid_samples_rejected(self):
        with pytest.raises(ValidationError):
            LoadSpec.grid_samples({(1, 1): -2.0})

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValidationError):
            LoadSpec("pointwise")

    def test_bump_evaluation(self, disk_ops_16):
        grid = disk_ops_16.grid
        f = LoadSpec.gaussian_bump((0.2, 0.0), 0.5, 2.0)
        vals = f.sample_on(grid)
        k = grid.nearest_active((0.2, 0.0))
        assert vals.max() == vals[k]
        assert np.all(vals > 0.0)

    def test_grid_samples_evaluation(self, disk_ops_16):
        grid = disk_ops_16.grid
        i, j = (int(v) for v in grid.nodes[0])
        f = LoadSpec.grid_samples({(i, j): 3.0})
        vals = f.sample_on(grid)
        assert vals[0] == 3.0
        assert np.count_nonzero(vals) == 1

    def test_tau_ratio(self, disk_ops_16):
        grid = disk_ops_16.grid
        samples = LoadSpec.constant(2.0).sample_on(grid)
        tau = load_ratio_tau(grid, samples)
        # constant load: tau is the active area h^2 * count
        assert tau == pytest.approx(grid.h ** 2 * grid.active_count, rel=1e-12)
        assert load_ratio_tau(grid, np.zeros(grid.active_count)) == 0.0


class TestZeroExtensionEmbedding:
    def test_padding_gives_admissible_test_vector(self):
        # solution on the small square embeds into the large one with the
        # identical quadratic forms (zero extension)
        small = square_domain(side=1.0, corner=(0.0, 0.0))
        large = square_domain(side=1.5, corner=(-0.25, -0.25))
        h = 0.125
        g1, g2 = discretize(small, h), discretize(large, h)
        o1, o2 = assemble(g1), assemble(g2)
        u1 = solve_plate(o1, 0.0, LoadSpec.constant(1.0)).u
        embedded = np.zeros(g2.active_count)
        for k, (i, j) in enumerate(g1.nodes):
            target = g2.index[i, j]
            assert target >= 0  # every small-domain node is active in the superset
            embedded[target] = u1[k]
        assert embedded @ (o2.A @ embedded) == pytest.approx(
            u1 @ (o1.A @ u1), rel=1e-12)
        assert embedded @ (o2.B @ embedded) == pytest.approx(
            u1 @ (o1.B @ u1), rel=1e-12)


class TestOutputs:
    def test_field_csv(self, tmp_path, disk_ops_16):
        report = solve_plate(disk_ops_16, 0.0, LoadSpec.constant(1.0))
        path = tmp_path / "field.csv"
        write_field_csv(path, disk_ops_16.grid, report.u)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "i,j,x,y,u"
        assert len(lines) == disk_ops_16.grid.active_count + 1

    def test_report_json_schema(self, disk_ops_16):
        report = solve_plate(disk_ops_16, 1.0, LoadSpec.constant(1.0))
        payload = report_json_dict(report)
        assert set(payload) == {"gamma", "min_u", "min_u_interior", "residual",
                                "center_value", "h", "active_count"}
