import numpy as np
import pytest

from mbonacci import numeration, rotation
from mbonacci.numeration import encode, make_system
from mbonacci.rauzy import subtile_of
from mbonacci.rotation import (
    HaltonConfig,
    default_offset,
    halton,
    halton_points,
    interval_for,
    level_addresses,
    local_discrepancy,
    membership_counts,
    membership_oracle,
    partition_Ck,
    vdc,
    vdc_values,
)


def test_vdc_examples(sys2):
    assert vdc(sys2, 0) == 0.0
    assert abs(vdc(sys2, 1) - 0.61803399) < 1e-8
    assert abs(vdc(sys2, 4) - 0.85410197) < 1e-8
    assert abs(vdc(sys2, 4) - (sys2.neg_power(1) + sys2.neg_power(3))) < 1e-15


def test_vdc_values_in_unit_interval(sys2, sys3):
    for sys in (sys2, sys3):
        vals = vdc_values(sys, 20000)
        assert vals.min() >= 0.0 and vals.max() < 1.0
        assert len(np.unique(vals)) == 20000


def test_vdc_bulk_matches_scalar(sys3):
    rng = np.random.default_rng(2)
    ns = rng.integers(0, 10 ** 6, size=100)
    bulk = vdc_values(sys3, ns)
    for n, v in zip(ns, bulk):
        assert abs(vdc(sys3, int(n)) - v) < 1e-12


def test_vdc_out_of_range(sys2):
    with pytest.raises(ValueError):
        vdc(sys2, sys2.basis[-1] + 1)


def test_halton_examples(sys2, sys3):
    cfg = HaltonConfig(systems=(sys2, sys3))
    assert np.allclose(halton(cfg, 0), [0.0, 0.0])
    got = halton(cfg, 1)
    assert abs(got[0] - 0.61803) < 1e-5
    assert abs(got[1] - 0.54369) < 1e-5
    single = HaltonConfig(systems=(sys2,))
    assert halton(single, 7)[0] == vdc(sys2, 7)


def test_halton_points_match_scalar(sys2, sys3):
    cfg = HaltonConfig(systems=(sys2, sys3))
    pts = halton_points(cfg, 50)
    for n in (0, 1, 49):
        assert np.allclose(pts[n], halton(cfg, n), atol=1e-14)


def test_halton_config_validation(sys2, sys3):
    with pytest.raises(ValueError):
        HaltonConfig(systems=(sys2, sys2))
    with pytest.raises(ValueError):
        HaltonConfig(systems=())
    with pytest.raises(ValueError):
        HaltonConfig(systems=(sys2, sys3), offsets=())


def test_interval_for_zero(sys2):
    for k in (0, 1, 5):
        iv = interval_for(sys2, 0, k)
        assert iv.left == 0.0
        assert abs(iv.right - sys2.phi_float ** -k) < 1e-12


def test_interval_example_m2_n4_k3(sys2):
    phi = sys2.phi_float
    iv = interval_for(sys2, 4, 3)
    assert abs(iv.mu - (phi ** 2 + 1)) < 1e-12
    assert iv.r == 1
    assert abs(iv.left - (phi ** 2 + 1) / phi ** 3) < 1e-12
    assert abs(iv.right - (phi ** 2 + 1 + phi - 1) / phi ** 3) < 1e-12
    assert iv.contains(vdc(sys2, 4), guard=1e-12)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_vdc_lands_in_its_interval(m):
    sys = make_system(m, 10 ** 6)
    rng = np.random.default_rng(m * 7)
    for n in rng.integers(0, 10 ** 6, size=300):
        x = vdc(sys, int(n))
        for k in range(13):
            assert interval_for(sys, int(n), k).contains(x, guard=1e-12)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_interval_length_equals_subtile_measure(m):
    sys = make_system(m, 10 ** 5)
    rng = np.random.default_rng(m * 13)
    for n in rng.integers(0, 10 ** 5, size=100):
        for k in (1, 4, 9):
            iv = interval_for(sys, int(n), k)
            lam = sys.neg_power(k) * sum(sys.neg_power(i) for i in range(1, m - iv.r + 1))
            assert abs(iv.length - lam) <= 1e-10


def test_partition_counts_and_examples(sys2, sys3):
    ivs = partition_Ck(sys2, 1)
    assert len(ivs) == 2
    inv_phi = 1.0 / sys2.phi_float
    assert abs(ivs[0].right - inv_phi) < 1e-12 and abs(ivs[1].left - inv_phi) < 1e-12
    assert abs(ivs[1].right - 1.0) < 1e-12
    assert len(partition_Ck(sys2, 3)) == 5
    ivs = partition_Ck(sys3, 4)
    assert len(ivs) == 13
    assert abs(sum(iv.length for iv in ivs) - 1.0) < 1e-10


@pytest.mark.parametrize("m", [2, 3, 4])
def test_partition_geometry(m):
    sys = make_system(m, 10 ** 4)
    for k in range(1, 10):
        ivs = partition_Ck(sys, k)
        assert len(ivs) == sys.basis[k]
        assert ivs[0].left <= 1e-12
        assert abs(ivs[-1].right - 1.0) <= 1e-10
        for a, b in zip(ivs[:-1], ivs[1:]):
            assert abs(b.left - a.right) <= 1e-10


@pytest.mark.parametrize("m", [2, 3])
def test_partition_refines(m):
    sys = make_system(m, 10 ** 4)
    for k in range(1, 8):
        parents = partition_Ck(sys, k)
        children = partition_Ck(sys, k + 1)
        for child in children:
            holders = [
                p for p in parents
                if p.left - 1e-10 <= child.left and child.right <= p.right + 1e-10
            ]
            assert len(holders) == 1


def test_default_offset_deterministic(sys2):
    a = default_offset(sys2, 3, 100)
    b = default_offset(sys2, 3, 100)
    assert a == b
    assert all(0.0 <= c < 1.0 for c in a.coords)
    with pytest.raises(ValueError):
        default_offset(sys2, 0, 100)


def test_default_offset_contracts(sys2, sys3):
    # the k-fold contraction shrinks volumes by phi^-k, hence lengths by
    # roughly phi^(-k/(m-1)); check the geometric trend in torus metric
    for sys in (sys2, sys3):
        norms = []
        for k in (4, 8, 12):
            c = default_offset(sys, k, 2).array()
            norms.append(float(np.linalg.norm(np.minimum(c, 1.0 - c))))
        rate = sys.phi_float ** (-1.0 / (sys.m - 1))
        assert norms[2] < norms[1] < norms[0]
        for a, b, span in ((norms[0], norms[1], 4), (norms[1], norms[2], 4)):
            assert b / a < 5.0 * rate ** span
        assert norms[2] <= 10.0 * rate ** 12


def test_shifted_rotation_matches_digit_membership_m2(sys2, cloud_m2_100k):
    # the deterministic offset keeps every shifted orbit point inside the
    # interior of its level-1 cell, so geometric membership (arc test
    # against the transformed subcloud hull) must agree with the digit rule
    from mbonacci.spectral import contraction_matrix, lattice_coords, rotation_orbit

    k, N = 1, 50
    offset = default_offset(sys2, k, N)
    mat = contraction_matrix(2, cloud_m2_100k.phi)
    gamma = np.asarray(lattice_coords(2, cloud_m2_100k.phi, [1, 0]))
    cell1 = (cloud_m2_100k.letter_points(1) @ mat.T + gamma) % 1.0
    lo, hi = float(cell1.min()), float(cell1.max())
    assert hi - lo < 0.5  # the digit-one cell is a single arc, no wrap
    assert abs((hi - lo) - sys2.neg_power(2)) < 1e-3
    shifted = (rotation_orbit(sys2, N) + offset.array()) % 1.0
    for n in range(N):
        geometric = lo <= shifted[n, 0] <= hi
        digit = encode(sys2, n).digit(0) == 1
        assert geometric == digit, f"membership mismatch at n={n}"


def test_rotation_orbit_applies_offset(sys3):
    from mbonacci.spectral import TorusPoint, rotation_orbit

    off = TorusPoint((0.25, 0.75))
    plain = rotation_orbit(sys3, 40)
    moved = rotation_orbit(sys3, 40, offset=off)
    recon = (plain + off.array()) % 1.0
    assert np.max(np.abs(moved - recon)) < 1e-12


def test_membership_oracle_examples(sys2):
    addr0 = subtile_of(sys2, 0, 3)
    assert membership_oracle(sys2, 0, addr0)
    # n = 4 has digit 1 at position 2; an address with an all-zero prefix
    # at level 3 cannot match it
    assert not membership_oracle(sys2, 4, addr0)


@pytest.mark.parametrize("m", [2, 3])
def test_memberships_partition_indices(m):
    sys = make_system(m, 700)
    for k in (0, 1, 4, 8):
        addrs = level_addresses(m, k)
        for n in range(0, 600, 7):
            hits = [a for a in addrs if membership_oracle(sys, n, a)]
            assert len(hits) == 1
            own = subtile_of(sys, n, k)
            assert (hits[0].digits, hits[0].letter) == (own.digits, own.letter)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_level_addresses_counts_and_measures(m):
    sys = make_system(m, 10 ** 3)
    for k in range(0, 9):
        addrs = level_addresses(m, k)
        strings = {a.digits for a in addrs}
        assert len(strings) == sys.basis[k] if k else 1
        total = sum(sys.neg_power(k + a.letter) for a in addrs)
        assert abs(total - 1.0) < 1e-12


def test_membership_counts_match_scalar(sys2):
    counts = membership_counts(sys2, 3, 400)
    assert sum(counts.values()) == 400
    addrs = level_addresses(2, 3)
    for a in addrs:
        scalar = sum(1 for n in range(400) if membership_oracle(sys2, n, a))
        assert counts[(a.digits, a.letter)] == scalar


def test_local_discrepancy_k0_matches_direct_count(sys3):
    N = 2000
    letters = [subtile_of(sys3, n, 0).letter for n in range(N)]
    direct = max(
        abs(letters.count(i) / N - sys3.neg_power(i)) for i in (1, 2, 3)
    )
    assert abs(local_discrepancy(sys3, 0, N) - direct) < 1e-15


def test_local_discrepancy_bounds_and_cap(sys2):
    for k in range(0, 7):
        d = local_discrepancy(sys2, k, 1500)
        assert 0.0 <= d <= 1.0
    with pytest.raises(ValueError):
        local_discrepancy(sys2, 11, 100)
    with pytest.raises(ValueError):
        local_discrepancy(sys2, 2, 0)


def test_local_discrepancy_small_at_basis_sizes(sys2):
    N = sys2.basis[16]
    for k in range(0, 5):
        assert local_discrepancy(sys2, k, N) <= 50.0 / N
