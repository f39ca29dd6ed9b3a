import numpy as np
import pytest

from helpers import naive_star_disc
from mbonacci import numeration, rauzy, rotation
from mbonacci.discrepancy import (
    box_dim_boundary,
    decay_fit,
    load_points_csv,
    star_disc_1d,
    star_disc_multi,
    theorem_exponent,
)


def test_star_disc_1d_examples():
    assert star_disc_1d([0.0]) == 1.0
    assert star_disc_1d([0.0, 0.5]) == 0.5
    n = 32
    mids = [(2 * i + 1) / (2 * n) for i in range(n)]
    assert abs(star_disc_1d(mids) - 1.0 / (2 * n)) < 1e-15


def test_star_disc_1d_validation():
    with pytest.raises(ValueError):
        star_disc_1d([])
    with pytest.raises(ValueError):
        star_disc_1d([0.2, 1.0])
    with pytest.raises(ValueError):
        star_disc_1d([-0.1])


def test_star_disc_multi_examples():
    assert star_disc_multi(np.zeros((1, 2))).value == 1.0
    report = star_disc_multi(np.array([[0.0, 0.0], [0.5, 0.5]]))
    assert abs(report.value - 0.75) < 1e-15
    assert report.N == 2 and report.dims == 2 and report.exact


def test_star_disc_multi_validation():
    with pytest.raises(ValueError):
        star_disc_multi(np.zeros((3, 1)))
    with pytest.raises(ValueError):
        star_disc_multi(np.empty((0, 2)))
    with pytest.raises(ValueError):
        star_disc_multi(np.array([[0.5, 1.0]]))


@pytest.mark.parametrize("s", [2, 3])
def test_star_disc_multi_matches_naive_oracle(s):
    rng = np.random.default_rng(100 + s)
    for _ in range(15):
        n = int(rng.integers(1, 65))
        pts = rng.random((n, s))
        assert abs(star_disc_multi(pts).value - naive_star_disc(pts)) <= 1e-12


def test_star_disc_multi_with_ties_and_edges():
    pts = np.array([
        [0.25, 0.25],
        [0.25, 0.25],
        [0.0, 0.75],
        [0.75, 0.0],
        [0.25, 0.75],
    ])
    assert abs(star_disc_multi(pts).value - naive_star_disc(pts)) <= 1e-12
    pts3 = np.array([[0.5, 0.5, 0.5], [0.0, 0.0, 0.0], [0.5, 0.25, 0.75]])
    assert abs(star_disc_multi(pts3).value - naive_star_disc(pts3)) <= 1e-12


def test_star_disc_multi_adversarial_patterns():
    rng = np.random.default_rng(404)
    # collinear points, heavy coordinate repetition, clusters at 0
    diag = np.linspace(0.0, 0.99, 40)
    cases = [
        np.stack([diag, diag], axis=1),
        np.stack([diag, diag[::-1]], axis=1),
        np.stack([np.repeat(np.arange(5) / 5.0, 8), rng.random(40)], axis=1),
        np.concatenate([np.zeros((6, 2)), rng.random((30, 2))]),
    ]
    for pts in cases:
        assert abs(star_disc_multi(pts).value - naive_star_disc(pts)) <= 1e-12


def test_star_disc_multi_larger_instance_vs_oracle():
    rng = np.random.default_rng(77)
    pts = rng.random((300, 2))
    assert abs(star_disc_multi(pts).value - naive_star_disc(pts)) <= 1e-12


def test_star_disc_multi_s4_vs_oracle():
    rng = np.random.default_rng(44)
    for n in (5, 12, 20):
        pts = rng.random((n, 4))
        report = star_disc_multi(pts)
        assert report.method == "exact_corner_grid"
        assert abs(report.value - naive_star_disc(pts)) <= 1e-12


def test_star_disc_multi_budget_and_fallback():
    rng = np.random.default_rng(5)
    pts = rng.random((40, 3))
    exact = star_disc_multi(pts)
    bounded = star_disc_multi(pts, max_exact_ops=1000)
    assert not bounded.exact
    assert bounded.method == "corner_subsample_lower_bound"
    assert bounded.value <= exact.value + 1e-12
    with pytest.raises(ValueError):
        star_disc_multi(pts, max_exact_ops=1000, fallback=False)


def test_decay_fit_exact_powers():
    samples = [(n, 1.0 / n) for n in (10, 100, 1000, 10000)]
    slope, intercept, r2 = decay_fit(samples)
    assert abs(slope + 1.0) < 1e-12
    assert abs(intercept) < 1e-10
    assert abs(r2 - 1.0) < 1e-12
    samples = [(n, 3.0 * n ** -0.5) for n in (16, 64, 256, 1024, 4096)]
    slope, _, _ = decay_fit(samples)
    assert abs(slope + 0.5) < 1e-12


def test_decay_fit_validation():
    with pytest.raises(ValueError):
        decay_fit([(10, 0.1), (20, 0.05), (40, 0.02)])
    with pytest.raises(ValueError):
        decay_fit([(10, 0.1), (10, 0.1), (20, 0.1), (40, 0.1)])
    with pytest.raises(ValueError):
        decay_fit([(10, 0.1), (20, 0.1), (40, 0.1), (80, 0.1)])
    with pytest.raises(ValueError):
        decay_fit([(10, 0.1), (20, -0.1), (40, 0.02), (80, 0.01)])


def test_vdc_sequence_decay(sys2):
    values = rotation.vdc_values(sys2, 2 ** 12)
    samples = [(2 ** e, star_disc_1d(values[: 2 ** e])) for e in range(8, 13)]
    slope, _, _ = decay_fit(samples)
    assert slope <= -0.9


def test_box_dim_m2_control(cloud_m2_100k):
    est = box_dim_boundary(cloud_m2_100k, range(4, 10))
    assert est.slope <= 0.15
    assert all(c >= 1 for c in est.counts)


def test_box_dim_counts_grow(cloud_m2_100k):
    cloud = rauzy.build_cloud(3, 250000)
    est = box_dim_boundary(cloud, (4, 5, 6, 7))
    assert est.counts == tuple(sorted(est.counts))
    assert 0.8 <= est.slope <= 1.3


def test_box_dim_modes_and_validation(cloud_m2_100k):
    for mode in ("subtile", "outer", "both"):
        est = box_dim_boundary(cloud_m2_100k, (4, 5, 6), mode=mode)
        assert est.mode == mode
    with pytest.raises(ValueError):
        box_dim_boundary(cloud_m2_100k, (4, 5), mode="bogus")
    with pytest.raises(ValueError):
        box_dim_boundary(cloud_m2_100k, ())
    sparse = rauzy.build_cloud(3, 2000)
    with pytest.raises(ValueError):
        box_dim_boundary(sparse, (9,))


def test_box_dim_degenerate_full_cover_has_no_boundary():
    n = 64
    grid = np.stack(
        np.meshgrid(np.arange(n) / n, np.arange(n) / n, indexing="ij"), -1
    ).reshape(-1, 2)
    cloud = rauzy.FractalCloud(
        m=3, depth=len(grid) - 1, phi=1.839,
        labels=np.ones(len(grid), dtype=np.uint8),
        unreduced=grid.copy(), reduced=grid.copy(),
    )
    est = box_dim_boundary(cloud, (2, 3, 4, 5), coords="torus")
    assert est.counts == (0, 0, 0, 0)
    assert est.slope == 0.0


def test_theorem_exponent_reference_values():
    value = theorem_exponent((2, 3), (0.0, 1.09336))
    assert abs(value - (-0.302213)) <= 1e-6
    assert abs(value - (1.09336 - 2.0) / 3.0) < 1e-15
    assert theorem_exponent((2,), (0.0,)) == -1.0


def test_theorem_exponent_is_negative_on_valid_input():
    rng = np.random.default_rng(0)
    for _ in range(20):
        ms = sorted(rng.choice(range(2, 9), size=3, replace=False).tolist())
        dims = [float(rng.random() * (m - 1 - 1e-6)) for m in ms]
        assert theorem_exponent(ms, dims) < 0.0


def test_theorem_exponent_validation():
    with pytest.raises(ValueError):
        theorem_exponent((3, 3), (0.0, 1.0))
    with pytest.raises(ValueError):
        theorem_exponent((2, 3), (0.0,))
    with pytest.raises(ValueError):
        theorem_exponent((2, 3), (0.0, 2.0))
    with pytest.raises(ValueError):
        theorem_exponent((2, 3), (-0.5, 1.0))
    with pytest.raises(ValueError):
        theorem_exponent((1, 3), (0.0, 1.0))


def test_load_points_csv(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("x1,x2\n0.125,0.25\n0.5,0.75\n")
    with open(path) as fh:
        pts = load_points_csv(fh)
    assert pts.tolist() == [[0.125, 0.25], [0.5, 0.75]]
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        with open(bad) as fh:
            load_points_csv(fh)


def test_report_runtime_recorded():
    report = star_disc_multi(np.array([[0.1, 0.2], [0.3, 0.4]]))
    assert report.runtime >= 0.0
    assert report.method == "exact_corner_sweep"
