import csv
import io
import json
import math

import numpy as np
import pytest

from src.models.flow import (
    build_gradient_tree,
    closed_form,
    gradient_field,
    integrate_trajectory,
    inverse_moment,
    kahler_potential,
    moment_jacobian,
    moment_map,
    straightness,
    trajectory_error,
    tree_summary_json,
    write_trajectory_csv,
)
from src.utils.errors import CompositionError, FlowError
from src.utils.homs import lattice_k
from src.utils.lattice import random_interior_points


def test_kahler_potential_values(w32, w112):
    assert kahler_potential(w32, 0, [0.0]) == pytest.approx(math.log(2))
    assert kahler_potential(w112, 0, [0.0, 0.0]) == pytest.approx(math.log(3))
    assert kahler_potential(w112, 0, [-50.0, -50.0]) == pytest.approx(0.0, abs=1e-12)


def test_moment_map_values(w32, w112):
    assert moment_map(w32, 0, [0.0]) == pytest.approx([3.0])
    assert moment_map(w112, 0, [-50.0, -50.0]) == pytest.approx([0.0, 0.0], abs=1e-12)


def test_moment_map_is_gradient_of_potential(w112):
    rng = np.random.default_rng(0)
    h = 1e-6
    for xc in rng.uniform(-1, 1, size=(100, 2)):
        fd = [(kahler_potential(w112, 0, xc + dx) - kahler_potential(w112, 0, xc - dx)) / (2 * h)
              for dx in (np.array([h, 0.0]), np.array([0.0, h]))]
        assert np.max(np.abs(moment_map(w112, 0, xc) - fd)) < 1e-6


def test_jacobian_is_spd(w112):
    rng = np.random.default_rng(1)
    for xc in rng.uniform(-1, 1, size=(100, 2)):
        J = moment_jacobian(w112, 0, xc)
        assert np.allclose(J, J.T)
        assert np.linalg.eigvalsh(J).min() > 0


def test_inverse_moment(w32, w112):
    assert inverse_moment(w32, 0, [3.0]) == pytest.approx([0.0], abs=1e-12)
    rng = np.random.default_rng(2)
    for point in random_interior_points(w112, 0, 100, rng):
        x = np.array([float(v) for v in point])
        xc = inverse_moment(w112, 0, x)
        assert np.max(np.abs(moment_map(w112, 0, xc) - x)) < 1e-10
        # Forma cerrada: xc_l = log(s_l / s_0) / c_l, s_l = x_l / c_l
        c = np.array([4.0, 2.0])
        s = x / c
        assert xc == pytest.approx(np.log(s / (1 - s.sum())) / c, abs=1e-9)


@pytest.mark.parametrize("x", [[0.0, 1.0], [4.0, 0.0], [3.0, 1.0]])
def test_inverse_moment_rejects_boundary(w112, x):
    with pytest.raises(FlowError):
        inverse_moment(w112, 0, x)


def test_gradient_field(w32, w112):
    assert gradient_field(w32, 0, 2, lattice_k(w32, (0, 1)), [0.0]) == pytest.approx([-2 * math.pi])
    K = lattice_k(w112, (0, 1, 1))
    assert gradient_field(w112, 0, 3, K, [4 / 3, 4 / 3]) == pytest.approx([0.0, 0.0], abs=1e-12)
    x1, x2 = np.array([0.3, 1.1]), np.array([2.0, 0.2])
    mid = gradient_field(w112, 0, 3, K, (x1 + x2) / 2)
    residual = gradient_field(w112, 0, 3, K, x1) + gradient_field(w112, 0, 3, K, x2) - 2 * mid
    assert np.max(np.abs(residual)) < 1e-12


def test_trajectory_matches_closed_form(w112):
    K = lattice_k(w112, (1, 0, 1))
    lam = 2 * math.pi * 3 / 4
    steps = int(10 / (lam * 1e-3))
    traj = integrate_trajectory(w112, 0, 3, K, [1.0, 0.5], dt=1e-3, steps=steps)
    assert traj.lam == pytest.approx(lam)
    assert trajectory_error(traj) < 1e-8
    size = float(np.max(np.abs(traj.samples)))
    assert straightness(traj) < 1e-9 * size
    assert closed_form(traj, 0.0) == pytest.approx([1.0, 0.5])


def test_trajectory_backward_contracts(w112):
    K = lattice_k(w112, (1, 0, 1))
    traj = integrate_trajectory(w112, 0, 3, K, [1.0, 0.5], steps=5000, backward=True)
    assert traj.times[-1] == pytest.approx(-5.0)
    assert np.linalg.norm(np.array(traj.samples[-1]) - np.array(traj.fixed_point)) < 1e-6
    assert trajectory_error(traj) < 1e-8


def test_trajectory_from_fixed_point_is_constant(w32):
    traj = integrate_trajectory(w32, 0, 2, lattice_k(w32, (0, 1)), [6.0], steps=100)
    assert all(s == pytest.approx([6.0]) for s in traj.samples)
    assert straightness(traj) == pytest.approx(0.0, abs=1e-12)


def test_trajectory_requires_positive_step(w32):
    with pytest.raises(FlowError):
        integrate_trajectory(w32, 0, 2, lattice_k(w32, (0, 1)), [1.0], dt=0.0)


def test_tree_3_2(w32):
    tree = build_gradient_tree(w32, 0, 2, 5, lattice_k(w32, (0, 1)), lattice_k(w32, (1, 0)))
    assert tree.v_ab == [6.0] and tree.v_bc == [0.0]
    assert tree.v_ac == pytest.approx([12 / 5])
    assert tree.meeting_residual < 1e-8
    assert tree.root_field_norm < 1e-12
    assert tree.area_exact == pytest.approx(math.log(5 / 2) / 6 + math.log(5 / 3) / 4, rel=1e-14)
    assert tree.area_error < 1e-9
    assert all(edge.straightness < 1e-9 for edge in tree.edges)


def test_tree_figure_1_1_2(w112):
    tree = build_gradient_tree(w112, 0, 1, 3, lattice_k(w112, (0, 1, 0)), lattice_k(w112, (0, 0, 1)))
    assert tree.v_ab == [4.0, 0.0] and tree.v_bc == [0.0, 2.0]
    assert tree.v_ac == pytest.approx([4 / 3, 4 / 3])
    assert tree.meeting_residual < 1e-8
    assert tree.area_error < 1e-9


def test_degenerate_tree(w11):
    tree = build_gradient_tree(w11, 0, 1, 2, lattice_k(w11, (1, 0)), lattice_k(w11, (1, 0)))
    assert tree.degenerate
    assert tree.area_numeric == 0.0 and tree.area_exact == 0.0
    assert all(edge.trajectory is None for edge in tree.edges)


def test_tree_needs_increasing_labels(w32):
    with pytest.raises(CompositionError):
        build_gradient_tree(w32, 0, 0, 2, lattice_k(w32, (0, 0)), lattice_k(w32, (0, 1)))


def test_writers(w32):
    traj = integrate_trajectory(w32, 0, 2, lattice_k(w32, (0, 1)), [1.0], steps=3)
    rows = list(csv.reader(io.StringIO(write_trajectory_csv(traj))))
    assert rows[0] == ["t", "x1"]
    assert len(rows) == 5
    assert float(rows[1][1]) == 1.0

    tree = build_gradient_tree(w32, 0, 2, 5, lattice_k(w32, (0, 1)), lattice_k(w32, (1, 0)))
    summary = json.loads(tree_summary_json(tree))
    assert "trajectory" not in summary["edges"][0]
    assert summary["area_error"] < 1e-9


def test_backward_pair_field_vanishes_at_v(w32):
    K = lattice_k(w32, (1, 1))
    assert gradient_field(w32, 5, 0, K, [12 / 5]) == pytest.approx([0.0], abs=1e-12)
    traj = integrate_trajectory(w32, 5, 0, K, [1.0], steps=3000)
    assert traj.lam < 0
    assert traj.fixed_point == pytest.approx([2.4])
    assert trajectory_error(traj, relative=False) < 1e-8
    assert abs(traj.samples[-1][0] - 2.4) < 1e-3


def test_backward_run_absolute_error(w112):
    K = lattice_k(w112, (0, 1, 1))
    lam = 2 * math.pi * 3 / 4
    traj = integrate_trajectory(w112, 0, 3, K, [0.5, 0.25], steps=int(10 / (lam * 1e-3)), backward=True)
    assert trajectory_error(traj, relative=False) < 1e-8


@pytest.mark.parametrize("x0", [[1.0, 2.0], []])
def test_trajectory_rejects_wrong_dimension(w32, x0):
    with pytest.raises(FlowError, match="1 coordinates"):
        integrate_trajectory(w32, 0, 2, lattice_k(w32, (0, 1)), x0, steps=3)


def test_field_rejects_wrong_dimension(w112):
    with pytest.raises(FlowError):
        gradient_field(w112, 0, 3, lattice_k(w112, (0, 1, 1)), [1.0])
