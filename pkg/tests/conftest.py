"""Shared fixtures: oracle domains and cached discretizations."""

import numpy as np
import pytest

from platelab import (
    ConvexDomain,
    LoadSpec,
    assemble,
    convex_hull,
    disk_domain,
    discretize,
)


def random_convex_domain(rng, ball_radius=2.0, n_points=10, r_max=0.75):
    """Hull of random points sampled uniformly in a concentric disk."""
    radius = r_max * ball_radius * np.sqrt(rng.uniform(0.2, 1.0, n_points))
    angle = rng.uniform(0.0, 2.0 * np.pi, n_points)
    center = rng.uniform(-0.15 * ball_radius, 0.15 * ball_radius, 2)
    pts = np.column_stack([center[0] + radius * np.cos(angle),
                           center[1] + radius * np.sin(angle)])
    return convex_hull(pts, ball_radius)


def strip_domain(length=6.0, width=1.0, apex=0.15, ball_radius=3.4):
    """Hexagonal approximation of a length:width strip (pointed ends)."""
    hl, hw = length / 2.0, width / 2.0
    verts = np.array([
        [-hl, -hw], [hl, -hw], [hl + apex, 0.0],
        [hl, hw], [-hl, hw], [-hl - apex, 0.0],
    ])
    return ConvexDomain(verts, ball_radius)


def end_bump_load(x0=-2.5, y0=0.0, width=0.3, amplitude=1.0):
    return LoadSpec.gaussian_bump((x0, y0), width, amplitude)


@pytest.fixture(scope="session")
def unit_disk():
    return disk_domain(1.0)


@pytest.fixture(scope="session")
def disk_ops_16(unit_disk):
    return assemble(discretize(unit_disk, 1.0 / 16.0))


@pytest.fixture(scope="session")
def disk_ops_32(unit_disk):
    return assemble(discretize(unit_disk, 1.0 / 32.0))


@pytest.fixture(scope="session")
def strip():
    return strip_domain()


@pytest.fixture(scope="session")
def strip_ops_24(strip):
    return assemble(discretize(strip, 1.0 / 24.0))


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
