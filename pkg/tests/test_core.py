"""Problem construction, metrics, seeding, and the instance file format."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import lqsparse as lq
from oracles import dense_spectral_norm


def small_instance(seed=0, n=24, m=12, k=3, **kw):
    return lq.make_instance(n, m, k, seed=seed, **kw)


class TestProblemInstance:
    def test_valid_roundtrip_of_fields(self):
        inst = small_instance(seed=5)
        assert (inst.m, inst.n, inst.k) == (12, 24, 3)
        assert inst.a.shape == (12, 24)
        assert inst.y.shape == (12,)
        assert inst.x0.shape == (24,)
        assert inst.noise_snr_db is None
        assert inst.seed == 5

    def test_rejects_square_or_overdetermined(self):
        a = np.zeros((5, 5))
        with pytest.raises(lq.InvalidInputError):
            lq.ProblemInstance(a=a, y=np.zeros(5), x0=None, m=5, n=5, k=1)

    def test_rejects_bad_k(self):
        inst = small_instance()
        for k in (0, 25):
            with pytest.raises(lq.InvalidInputError):
                lq.ProblemInstance(
                    a=inst.a, y=inst.y, x0=inst.x0, m=12, n=24, k=k
                )

    def test_rejects_shape_mismatch(self):
        inst = small_instance()
        with pytest.raises(lq.InvalidInputError):
            lq.ProblemInstance(
                a=inst.a, y=np.zeros(11), x0=inst.x0, m=12, n=24, k=3
            )

    def test_rejects_non_finite(self):
        inst = small_instance()
        a = inst.a.copy()
        a[0, 0] = np.nan
        with pytest.raises(lq.InvalidInputError):
            lq.ProblemInstance(a=a, y=inst.y, x0=inst.x0, m=12, n=24, k=3)


class TestSolverConfig:
    def test_defaults(self):
        cfg = lq.SolverConfig()
        assert cfg.q == 0.05
        assert cfg.lam is None
        assert cfg.tol == 1e-7
        assert cfg.max_iter == 20_000
        assert cfg.accelerate is True
        assert cfg.continuation_iters == 10_000

    @pytest.mark.parametrize(
        "kw",
        [
            dict(q=0.0),
            dict(q=1.5),
            dict(tol=0.0),
            dict(tol=-1.0),
            dict(max_iter=0),
            dict(gamma=-0.1),
            dict(lam=-1e-3),
            dict(beta=0.0),
            dict(continuation_iters=-1),
            dict(iht_step="newton"),
            dict(eps=0.0),
            dict(eps=-1.0),
        ],
    )
    def test_rejects_bad_values(self, kw):
        with pytest.raises(lq.InvalidInputError):
            lq.SolverConfig(**kw)


class TestSpectralNorm:
    @pytest.mark.parametrize("shape", [(5, 9), (9, 5), (7, 7), (1, 4), (40, 60)])
    def test_matches_dense_svd(self, shape):
        a = np.random.default_rng(hash(shape) % 2**32).standard_normal(shape)
        assert lq.spectral_norm(a) == pytest.approx(
            dense_spectral_norm(a), rel=1e-8
        )

    def test_zero_matrix(self):
        assert lq.spectral_norm(np.zeros((3, 7))) == 0.0

    def test_rejects_non_finite(self):
        a = np.ones((2, 3))
        a[1, 2] = np.inf
        with pytest.raises(lq.InvalidInputError):
            lq.spectral_norm(a)

    @given(st.integers(0, 2**31 - 1))
    def test_scaling_property(self, seed):
        a = np.random.default_rng(seed).standard_normal((4, 6))
        assert lq.spectral_norm(2.5 * a) == pytest.approx(
            2.5 * lq.spectral_norm(a), rel=1e-9
        )


class TestGenerators:
    def test_matrix_deterministic_and_seed_sensitive(self):
        a1 = lq.generate_gaussian_matrix(6, 10, False, seed=42)
        a2 = lq.generate_gaussian_matrix(6, 10, False, seed=42)
        a3 = lq.generate_gaussian_matrix(6, 10, False, seed=43)
        np.testing.assert_array_equal(a1, a2)
        assert not np.array_equal(a1, a3)

    def test_column_normalized_scales_entries(self):
        raw = lq.generate_gaussian_matrix(9, 5, False, seed=1)
        nrm = lq.generate_gaussian_matrix(9, 5, True, seed=1)
        np.testing.assert_allclose(nrm, raw / 3.0, rtol=0, atol=0)

    def test_column_normalized_unit_expected_column_norm(self):
        a = lq.generate_gaussian_matrix(200, 400, True, seed=7)
        col_norms = np.linalg.norm(a, axis=0)
        assert abs(float(np.mean(col_norms)) - 1.0) < 0.05

    @given(st.integers(0, 20), st.integers(0, 2**31 - 1))
    def test_k_sparse_support_size_exact(self, k, seed):
        x = lq.generate_k_sparse_signal(20, k, seed)
        assert x.shape == (20,)
        assert int(np.count_nonzero(x)) == k

    def test_k_sparse_rejects_bad_k(self):
        with pytest.raises(lq.InvalidInputError):
            lq.generate_k_sparse_signal(5, 6, 0)

    def test_bernoulli_gaussian_rate(self):
        x = lq.generate_bernoulli_gaussian(20000, 0.1, seed=3)
        rate = np.count_nonzero(x) / 20000
        assert 0.08 < rate < 0.12

    def test_bernoulli_gaussian_edge_rates(self):
        assert np.count_nonzero(lq.generate_bernoulli_gaussian(50, 0.0, 1)) == 0
        assert np.count_nonzero(lq.generate_bernoulli_gaussian(50, 1.0, 1)) == 50
        with pytest.raises(lq.InvalidInputError):
            lq.generate_bernoulli_gaussian(10, 1.5, 0)


class TestNoise:
    @given(st.floats(-20.0, 120.0), st.integers(0, 2**31 - 1))
    def test_snr_is_exact_not_statistical(self, snr, seed):
        y = np.random.default_rng(seed).standard_normal(30) + 0.1
        noisy = lq.add_noise_snr(y, snr, seed)
        e = noisy - y
        measured = 20.0 * np.log10(np.linalg.norm(y) / np.linalg.norm(e))
        assert measured == pytest.approx(snr, abs=1e-9)

    def test_deterministic(self):
        y = np.arange(1.0, 9.0)
        np.testing.assert_array_equal(
            lq.add_noise_snr(y, 20.0, 5), lq.add_noise_snr(y, 20.0, 5)
        )

    def test_zero_signal_rejected(self):
        with pytest.raises(lq.InvalidInputError):
            lq.add_noise_snr(np.zeros(4), 20.0, 0)


class TestMetrics:
    def test_relative_error_hand_case(self):
        assert lq.relative_error([3.0, 4.0], [0.0, 4.0]) == pytest.approx(0.75)

    def test_relative_error_zero_truth_rejected(self):
        with pytest.raises(lq.InvalidInputError):
            lq.relative_error([1.0], [0.0])

    def test_snr_consistent_with_relative_error(self):
        rng = np.random.default_rng(8)
        x0 = rng.standard_normal(12)
        x = x0 + 1e-3 * rng.standard_normal(12)
        re = lq.relative_error(x, x0)
        assert lq.snr_db(x, x0) == pytest.approx(-20.0 * np.log10(re), abs=1e-9)

    def test_snr_capped_at_exact_recovery(self):
        x0 = np.array([1.0, -2.0])
        assert lq.snr_db(x0, x0) == 300.0
        assert lq.snr_db(x0 + 1e-300, x0) == 300.0


class TestObjectives:
    def test_lq_hand_case(self):
        inst = lq.ProblemInstance(
            a=np.array([[1.0, 0.0, 0.0]]),
            y=np.array([2.0]),
            x0=None,
            m=1,
            n=3,
            k=1,
        )
        x = np.array([1.0, -4.0, 0.0])
        # data: ½(2−1)² = 0.5 ; penalty: λ(1^q + 4^q + 0)
        got = lq.objective_lq(x, inst, lam=0.5, q=0.5)
        assert got == pytest.approx(0.5 + 0.5 * (1.0 + 2.0))

    def test_lq_q1_is_l1(self):
        inst = small_instance()
        x = np.linspace(-1, 1, 24)
        want = 0.5 * np.sum((inst.y - inst.a @ x) ** 2) + 0.3 * np.sum(np.abs(x))
        assert lq.objective_lq(x, inst, 0.3, 1.0) == pytest.approx(want, rel=1e-14)

    def test_approx_below_lq_and_touching_h(self):
        inst = small_instance(seed=2)
        x = inst.x0
        lam, q, eps = 0.1, 0.5, 1.0
        approx = lq.objective_approx(x, inst, lam, q, eps)
        # |x|/(|x|+ε)^(1−q) < |x|^q for ε > 0
        assert approx < lq.objective_lq(x, inst, lam, q)
        assert lq.functional_h(x, x, inst, lam, q, eps) == approx

    def test_rejects_bad_q(self):
        inst = small_instance()
        with pytest.raises(lq.InvalidInputError):
            lq.objective_lq(inst.x0, inst, 0.1, 0.0)


class TestSeeding:
    def test_derive_seed_deterministic(self):
        assert lq.derive_seed(7, 50, 3) == lq.derive_seed(7, 50, 3)

    @given(
        st.integers(0, 1000),
        st.integers(0, 200),
        st.integers(0, 200),
        st.integers(0, 200),
        st.integers(0, 200),
    )
    def test_derive_seed_key_sensitivity(self, master, k1, t1, k2, t2):
        if (k1, t1) != (k2, t2):
            assert lq.derive_seed(master, k1, t1) != lq.derive_seed(master, k2, t2)

    def test_derive_seed_uint64_range(self):
        s = lq.derive_seed(123, 4, 5)
        assert 0 <= s < 2**64

    def test_make_instance_streams_are_split(self):
        a = small_instance(seed=9)
        b = small_instance(seed=10)
        assert not np.array_equal(a.a, b.a)
        assert not np.array_equal(a.x0, b.x0)

    def test_make_instance_deterministic(self):
        a = small_instance(seed=9)
        b = small_instance(seed=9)
        np.testing.assert_array_equal(a.a, b.a)
        np.testing.assert_array_equal(a.y, b.y)
        np.testing.assert_array_equal(a.x0, b.x0)

    def test_make_instance_noise_and_signal_options(self):
        clean = small_instance(seed=4)
        noisy = small_instance(seed=4, noise_snr_db=20.0)
        np.testing.assert_array_equal(clean.a, noisy.a)
        assert not np.array_equal(clean.y, noisy.y)
        bg = small_instance(seed=4, signal="bernoulli-gaussian", p=0.2)
        assert bg.x0.shape == (24,)
        with pytest.raises(lq.InvalidInputError):
            small_instance(signal="spikes")


class TestInstanceFiles:
    def test_roundtrip_bit_exact(self, tmp_path):
        inst = small_instance(seed=31, noise_snr_db=25.0)
        path = str(tmp_path / "inst.txt")
        lq.save_instance(inst, path)
        back = lq.load_instance(path)
        np.testing.assert_array_equal(back.a, inst.a)
        np.testing.assert_array_equal(back.y, inst.y)
        np.testing.assert_array_equal(back.x0, inst.x0)
        assert back.noise_snr_db == inst.noise_snr_db
        assert (back.m, back.n, back.k, back.seed) == (12, 24, 3, 31)

    def test_roundtrip_without_ground_truth(self, tmp_path):
        inst = small_instance(seed=1)
        bare = lq.ProblemInstance(
            a=inst.a, y=inst.y, x0=None, m=inst.m, n=inst.n, k=inst.k
        )
        path = str(tmp_path / "bare.txt")
        lq.save_instance(bare, path)
        back = lq.load_instance(path)
        assert back.x0 is None
        np.testing.assert_array_equal(back.a, inst.a)

    def test_roundtrip_extreme_values(self, tmp_path):
        a = np.array([[1e-300, -1e300, 0.0], [3.14159, -0.0, 2.0**-1074]])
        inst = lq.ProblemInstance(
            a=a, y=np.array([1.0, -1.0]), x0=None, m=2, n=3, k=1
        )
        path = str(tmp_path / "ext.txt")
        lq.save_instance(inst, path)
        np.testing.assert_array_equal(lq.load_instance(path).a, a)

    def test_truncated_file_rejected(self, tmp_path):
        inst = small_instance()
        path = str(tmp_path / "inst.txt")
        lq.save_instance(inst, path)
        lines = open(path).read().splitlines()
        short = str(tmp_path / "short.txt")
        with open(short, "w") as fh:
            fh.write("\n".join(lines[:-2]) + "\n")
        with pytest.raises(lq.FormatError):
            lq.load_instance(short)

    def test_bad_token_rejected_with_line_number(self, tmp_path):
        inst = small_instance()
        path = str(tmp_path / "inst.txt")
        lq.save_instance(inst, path)
        lines = open(path).read().splitlines()
        lines[3] = lines[3].replace(lines[3].split()[0], "bogus", 1)
        bad = str(tmp_path / "bad.txt")
        with open(bad, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        with pytest.raises(lq.FormatError, match="line 4"):
            lq.load_instance(bad)

    def test_bad_header_rejected(self, tmp_path):
        path = str(tmp_path / "h.txt")
        with open(path, "w") as fh:
            fh.write("12 24\n")
        with pytest.raises(lq.FormatError):
            lq.load_instance(path)

    def test_inconsistent_dimensions_rejected(self, tmp_path):
        # header says m=5 n=3: m >= n is structurally invalid
        path = str(tmp_path / "sq.txt")
        rows = ["1 0 0", "0 1 0", "0 0 1", "0 0 0", "0 0 0"]
        with open(path, "w") as fh:
            fh.write("5 3 1 none 0\n" + "\n".join(rows) + "\n1 2 3 4 5\nnone\n")
        with pytest.raises(lq.FormatError):
            lq.load_instance(path)


class TestIterateTrace:
    def test_len_tracks_records(self):
        tr = lq.IterateTrace()
        assert len(tr) == 0
        tr.objective.append(1.0)
        tr.rel_error.append(0.5)
        tr.residual_norm.append(0.1)
        tr.elapsed_s.append(0.01)
        assert len(tr) == 1
