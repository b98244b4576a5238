import math

import numpy as np
import pytest
import scipy.sparse as sp

from carleman_lcu.burgers import (
    ConfigError,
    GridConfig,
    SingularSystemError,
    backward_euler_matrix,
    build_carleman_A,
    build_carleman_system,
    build_f1,
    build_f2,
    carleman_trajectory,
    carleman_vector,
    classical_solve,
    initial_state,
)


def _burgers_rhs(u, nu, dx):
    """Periodic central differences written out pointwise."""
    up, um = np.roll(u, -1), np.roll(u, 1)
    return nu * (up - 2 * u + um) / dx**2 - u * (up - um) / (2 * dx)


def test_reference_dimensions(ref_grid):
    g = ref_grid
    assert (g.s, g.m, g.r) == (2, 2, 1)
    assert g.carleman_dim == 4 + 16
    assert g.block_dim == 16
    assert g.embedded_dim == 4 * 2 * 16
    assert g.system_qubits == 7
    assert g.dx == pytest.approx(2 * math.pi / 3)


@pytest.mark.parametrize("n_x", [4, 8, 16])
def test_f1_f2_match_pointwise_stencil(n_x, rng):
    g = GridConfig(n_x, 2, 0.1, nu=0.7)
    u = rng.normal(size=n_x)
    lhs = build_f1(g) @ u + build_f2(g) @ np.kron(u, u)
    assert np.allclose(lhs, _burgers_rhs(u, 0.7, g.dx), atol=1e-12)


def test_f2_is_two_sparse_per_row():
    f2 = build_f2(GridConfig(8, 2, 0.1))
    assert f2.shape == (8, 64)
    assert np.all(np.diff(f2.indptr) == 2)


def test_carleman_first_block_is_burgers_rhs(rng):
    g = GridConfig(4, 2, 0.1, alpha=2)
    u = rng.normal(size=4)
    dy = build_carleman_A(g) @ carleman_vector(u, 2)
    assert np.allclose(dy[:4], _burgers_rhs(u, g.nu, g.dx), atol=1e-12)


def test_carleman_second_block_is_truncated_product_rule(rng):
    g = GridConfig(4, 2, 0.1, alpha=2)
    u = rng.normal(size=4)
    f1 = build_f1(g).toarray()
    dy = build_carleman_A(g) @ carleman_vector(u, 2)
    # d(u x u)/dt keeps only the linear part at truncation order 2
    want = np.kron(f1 @ u, u) + np.kron(u, f1 @ u)
    assert np.allclose(dy[4:], want, atol=1e-12)


def test_alpha_one_is_heat_equation_backward_euler(rng):
    g = GridConfig(8, 4, 0.05, alpha=1)
    u0 = rng.normal(size=8)
    sysm = build_carleman_system(g, u0)
    traj = carleman_trajectory(classical_solve(sysm.L, sysm.B), g)
    step = np.linalg.inv(np.eye(8) - g.dt * build_f1(g).toarray())
    u = u0.copy()
    for t in range(g.n_t):
        assert np.allclose(traj[t], u, atol=1e-12)
        u = step @ u


def test_backward_euler_structure():
    A = sp.csr_matrix(np.array([[1.0, 2.0], [0.0, 3.0]]))
    L = backward_euler_matrix(A, 2, 0.5).toarray()
    M = np.eye(2) - 0.5 * A.toarray()
    assert np.allclose(L, np.block([[np.eye(2), np.zeros((2, 2))], [-np.eye(2), M]]))


def test_initial_state_gaussian(ref_grid, ref_u0):
    # nodes at 0, 2pi/3, 4pi/3, 2pi; the two interior nodes sit symmetric about pi
    assert ref_u0[1] == pytest.approx(ref_u0[2])
    assert ref_u0[0] == pytest.approx(ref_u0[3])
    x = 2 * math.pi / 3
    want = math.exp(-((x - math.pi) ** 2) / 0.5) / (math.sqrt(2 * math.pi) * 0.25)
    assert ref_u0[1] == pytest.approx(want, rel=1e-14)
    with pytest.raises(ValueError):
        initial_state(ref_grid, sigma=0.0)


@pytest.mark.parametrize("kwargs", [
    dict(n_x=6, n_t=4, dt=0.1),
    dict(n_x=2, n_t=4, dt=0.1),
    dict(n_x=4, n_t=3, dt=0.1),
    dict(n_x=4, n_t=4, dt=0.1, alpha=3),
    dict(n_x=4, n_t=4, dt=-0.1),
    dict(n_x=4, n_t=4, dt=0.1, nu=0.0),
])
def test_config_rejects_invalid(kwargs):
    with pytest.raises(ConfigError):
        GridConfig(**kwargs)


def test_dt_zero_gives_identity_blocks(rng):
    g = GridConfig(4, 2, 0.0)
    sysm = build_carleman_system(g, rng.normal(size=4))
    Y = classical_solve(sysm.L, sysm.B)
    assert np.allclose(Y[:20], Y[20:])


def test_singular_system_raises():
    L = sp.csr_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(SingularSystemError):
        classical_solve(L, np.array([1.0, 0.0]))
