import numpy as np
import pytest
from numpy.testing import assert_allclose

from eimlab.errors import ContractError, KernelShapeError
from eimlab import kernels
from eimlab.kernels import (
    builtin_kernel,
    dc_kernel,
    decompose,
    decompose_1d,
    dihedral_average,
    embed_in_3x3,
    energy,
    grad_theta_kernel,
    grad_x_kernel,
    grad_y_kernel,
    mix,
    offset_impulse_kernel,
    standard_kernel,
)


def dihedral_average_oracle(a):
    """Independent oracle: enumerate the 8 symmetry images coordinate-wise.

    Evaluates the kernel at (sx*x, sy*y) and at the swapped pair (sy*y, sx*x)
    for all four sign choices, in centered coordinates, and averages.
    """
    k = a.shape[0]
    c = (k - 1) / 2.0
    out = np.zeros_like(a, dtype=float)
    for i in range(k):
        for j in range(k):
            x, y = j - c, i - c
            total = 0.0
            for sx in (1.0, -1.0):
                for sy in (1.0, -1.0):
                    total += a[int(round(sy * y + c)), int(round(sx * x + c))]
                    total += a[int(round(sx * x + c)), int(round(sy * y + c))]
            out[i, j] = total / 8.0
    return out


def dihedral_images(a):
    t = a.T
    return [a, a[:, ::-1], a[::-1, :], a[::-1, ::-1],
            t, t[:, ::-1], t[::-1, :], t[::-1, ::-1]]


class TestDihedralAverage:
    @pytest.mark.parametrize("k", [2, 3, 4, 5, 7])
    def test_matches_coordinate_oracle(self, k):
        rng = np.random.default_rng(42)
        for _ in range(25):
            a = rng.normal(size=(k, k))
            assert_allclose(dihedral_average(a), dihedral_average_oracle(a),
                            rtol=0, atol=1e-12)

    def test_offset_impulse_average_is_quarter_at_edge_midpoints(self):
        expected = np.array([[0.0, 0.25, 0.0],
                             [0.25, 0.0, 0.25],
                             [0.0, 0.25, 0.0]])
        assert_allclose(dihedral_average(offset_impulse_kernel(3, "right")),
                        expected, rtol=0, atol=0)

    def test_invariant_under_all_eight_maps(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(5, 5))
        avg = dihedral_average(a)
        for image in dihedral_images(avg):
            assert_allclose(image, avg, rtol=0, atol=1e-12)

    def test_rejects_non_square(self):
        with pytest.raises(KernelShapeError):
            dihedral_average(np.zeros((2, 3)))
        with pytest.raises(KernelShapeError):
            dihedral_average(np.zeros(4))


class TestDecompose:
    @pytest.mark.parametrize("k", [2, 3, 4, 5, 7])
    def test_reconstruction_orthogonality_energy(self, k):
        rng = np.random.default_rng(42)
        for _ in range(50):
            a = rng.normal(size=(k, k))
            split = decompose(a)
            total = energy(a)
            assert_allclose(split.even + split.odd, a, rtol=1e-12, atol=0)
            assert abs(np.sum(split.even * split.odd)) <= 1e-9 * total
            assert abs(split.energy_even + split.energy_odd - total) <= 1e-9 * total
            assert 0.0 <= split.beta_sq <= 1.0

    def test_projection_is_idempotent_and_linear(self):
        rng = np.random.default_rng(3)
        a, b = rng.normal(size=(5, 5)), rng.normal(size=(5, 5))
        pa, pb = dihedral_average(a), dihedral_average(b)
        assert_allclose(dihedral_average(pa), pa, rtol=0, atol=1e-12)
        assert_allclose(dihedral_average(2.5 * a - 0.5 * b), 2.5 * pa - 0.5 * pb,
                        rtol=0, atol=1e-12)

    def test_offset_impulse_energies(self):
        split = decompose(offset_impulse_kernel(3, "right"))
        assert_allclose(split.energy_even, 0.25, rtol=0, atol=1e-15)
        assert_allclose(split.energy_odd, 0.75, rtol=0, atol=1e-15)
        assert abs(split.beta_sq - 0.75) <= 1e-12

    def test_pure_parity_endpoints(self):
        even = decompose(dc_kernel(3))
        assert even.beta_sq == 0.0
        assert_allclose(even.odd, 0.0, rtol=0, atol=0)
        odd = decompose(grad_x_kernel(3))
        assert odd.beta_sq == 1.0
        assert_allclose(odd.even, 0.0, rtol=0, atol=0)

    def test_zero_kernel_has_zero_ratio(self):
        assert decompose(np.zeros((4, 4))).beta_sq == 0.0

    def test_1d_two_pixel_example(self):
        split = decompose_1d([0.0, 2.0])
        assert_allclose(split.even, [1.0, 1.0], rtol=0, atol=0)
        assert_allclose(split.odd, [-1.0, 1.0], rtol=0, atol=0)
        assert split.beta_sq == 0.5

    def test_1d_reconstruction(self):
        rng = np.random.default_rng(11)
        v = rng.normal(size=9)
        split = decompose_1d(v)
        assert_allclose(split.even + split.odd, v, rtol=1e-12, atol=0)
        assert abs(np.dot(split.even, split.odd)) <= 1e-9 * energy(v)


class TestMix:
    def test_round_trip_recovers_ratio(self):
        for beta_sq in np.linspace(0.0, 1.0, 21):
            k = mix(dc_kernel(3), grad_x_kernel(3), np.sqrt(beta_sq))
            assert abs(decompose(k).beta_sq - beta_sq) <= 1e-12
            assert_allclose(energy(k), 1.0, rtol=0, atol=1e-12)

    def test_magnitude_scales_energy(self):
        k = mix(dc_kernel(3), grad_x_kernel(3), 0.5, magnitude=2.0)
        assert_allclose(energy(k), 4.0, rtol=1e-12, atol=0)
        assert abs(decompose(k).beta_sq - 0.25) <= 1e-12

    def test_rejects_bad_arguments(self):
        with pytest.raises(ContractError):
            mix(dc_kernel(3), grad_x_kernel(3), 1.5)
        with pytest.raises(ContractError):
            mix(dc_kernel(3), grad_x_kernel(3), 0.5, magnitude=0.0)
        with pytest.raises(ContractError):
            mix(2.0 * dc_kernel(3), grad_x_kernel(3), 0.5)
        with pytest.raises(ContractError):
            mix(offset_impulse_kernel(3), grad_x_kernel(3), 0.5)
        with pytest.raises(ContractError):
            mix(dc_kernel(3), offset_impulse_kernel(3), 0.5)
        with pytest.raises(KernelShapeError):
            mix(dc_kernel(3), grad_x_kernel(5), 0.5)


class TestStandardKernels:
    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_unit_energy(self, k):
        assert_allclose(energy(dc_kernel(k)), 1.0, rtol=0, atol=1e-12)
        assert_allclose(energy(grad_x_kernel(k)), 1.0, rtol=0, atol=1e-12)
        assert_allclose(energy(grad_y_kernel(k)), 1.0, rtol=0, atol=1e-12)
        assert_allclose(energy(grad_theta_kernel(k, 0.3)), 1.0, rtol=0, atol=1e-12)

    def test_grad_x_column_ramp(self):
        g3 = grad_x_kernel(3) * np.sqrt(6.0)
        assert_allclose(g3, np.tile([-1.0, 0.0, 1.0], (3, 1)), rtol=0, atol=1e-12)
        g5 = grad_x_kernel(5) * np.sqrt(50.0)
        assert_allclose(g5, np.tile([-2.0, -1.0, 0.0, 1.0, 2.0], (5, 1)),
                        rtol=0, atol=1e-12)

    def test_grad_y_is_transpose(self):
        assert_allclose(grad_y_kernel(3), grad_x_kernel(3).T, rtol=0, atol=0)

    def test_grad_theta_endpoints(self):
        assert_allclose(grad_theta_kernel(3, 0.0), grad_x_kernel(3), rtol=0, atol=1e-12)
        assert_allclose(grad_theta_kernel(3, np.pi / 2), grad_y_kernel(3),
                        rtol=0, atol=1e-12)

    def test_offset_impulse_directions(self):
        right = offset_impulse_kernel(3, "right")
        assert right[1, 2] == 1.0 and np.sum(right) == 1.0
        up = offset_impulse_kernel(3, "up")
        assert up[0, 1] == 1.0
        explicit = offset_impulse_kernel(3, (-1, 0))
        assert explicit[1, 0] == 1.0

    def test_embed_in_3x3_corners(self):
        base = np.array([[1.0, 2.0], [3.0, 4.0]])
        lo = embed_in_3x3(base, 0)
        assert_allclose(lo, [[1, 2, 0], [3, 4, 0], [0, 0, 0]], rtol=0, atol=0)
        hi = embed_in_3x3(base, 1)
        assert_allclose(hi, [[0, 0, 0], [0, 1, 2], [0, 3, 4]], rtol=0, atol=0)
        with pytest.raises(ContractError):
            embed_in_3x3(base, 2)
        with pytest.raises(KernelShapeError):
            embed_in_3x3(np.zeros((3, 3)), 0)

    def test_size_contract(self):
        with pytest.raises(ContractError):
            grad_x_kernel(4)
        with pytest.raises(ContractError):
            standard_kernel("dc", 7)
        with pytest.raises(ContractError):
            offset_impulse_kernel(4)

    def test_dispatcher_matches_constructors(self):
        assert_allclose(standard_kernel("gradx", 5), grad_x_kernel(5), rtol=0, atol=0)
        assert_allclose(standard_kernel("offset_impulse", 3),
                        offset_impulse_kernel(3), rtol=0, atol=0)
        assert_allclose(standard_kernel("embedded2x2", 3, parity=1),
                        embed_in_3x3(grad_x_kernel(2), 1), rtol=0, atol=0)
        with pytest.raises(ContractError):
            standard_kernel("swirl", 3)

    def test_builtin_lookup(self):
        assert_allclose(builtin_kernel("trans3"), offset_impulse_kernel(3, "right"),
                        rtol=0, atol=0)
        assert builtin_kernel("emb2x2").shape == (3, 3)
        with pytest.raises(ContractError):
            builtin_kernel("nope")
        assert "gradx5" in kernels.BUILTIN_KERNEL_NAMES
