import pytest

import sparsecontrol as sc
from sparsecontrol.grid import like


def schloegl_spec(n=8, n_t=10, T=1.0, kappa=0.1, gamma=1.0, diff=1.0,
                  roots=(-1.0, 0.0, 1.0), y0="one-mode", yd="bump"):
    grid = sc.SpaceGrid(2, n)
    tgrid = sc.TimeGrid(T, n_t)
    return sc.ProblemSpec(
        kappa=kappa, gamma=gamma, grid=grid, tgrid=tgrid,
        diffusion=sc.isotropic(2, diff),
        nonlinearity=sc.NonlinearitySpec("schloegl", roots),
        y0=sc.spatial_preset(y0, grid),
        yd=sc.target_preset(yd, grid, tgrid))


def active_schloegl_spec(gamma=0.05):
    """The canonical active-budget instance: most slices bind the budget
    with a nonzero multiplier and the control is spatially sparse."""
    grid = sc.SpaceGrid(2, 12)
    tgrid = sc.TimeGrid(1.0, 24)
    yd = sc.target_preset("bump", grid, tgrid)
    return sc.ProblemSpec(
        kappa=0.3, gamma=gamma, grid=grid, tgrid=tgrid,
        diffusion=sc.isotropic(2, 0.3),
        nonlinearity=sc.NonlinearitySpec("schloegl", (-1.0, 0.0, 1.0)),
        y0=sc.spatial_preset("zero", grid),
        yd=like(yd, 2.0 * yd.values))


def linear_1d_spec(gamma=1e6, kappa=0.1, n=12, n_t=10, T=0.5):
    grid = sc.SpaceGrid(1, n)
    tgrid = sc.TimeGrid(T, n_t)
    return sc.ProblemSpec(
        kappa=kappa, gamma=gamma, grid=grid, tgrid=tgrid,
        diffusion=sc.isotropic(1, 1.0),
        nonlinearity=sc.NonlinearitySpec("zero"),
        y0=sc.spatial_preset("one-mode", grid),
        yd=sc.target_preset("zero", grid, tgrid))


def random_control(spec, rng, scale=1.0):
    values = scale * rng.standard_normal((spec.tgrid.n_t, spec.grid.n_nodes))
    return sc.field_per_interval(spec.grid, spec.tgrid, values)


@pytest.fixture(scope="session")
def active_solve():
    """Converged solve of the canonical active instance, shared across
    structure tests."""
    spec = active_schloegl_spec()
    report = sc.solve(spec, sc.OptimizerConfig(tol=1e-11, max_iter=400))
    assert report.converged
    return spec, report
