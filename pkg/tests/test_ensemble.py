import numpy as np
import pytest

from phspec import ensemble as E
from phspec import metric as M


SIG8 = M.Signature(k=2, n=8)


class TestSampleGue:
    def test_hermitian_bit_exact(self):
        a = E.sample_gue(16, 1.0, 42)
        assert np.array_equal(a, a.conj().T)

    def test_deterministic(self):
        assert np.array_equal(E.sample_gue(8, 1.0, 7), E.sample_gue(8, 1.0, 7))
        assert not np.array_equal(E.sample_gue(8, 1.0, 7), E.sample_gue(8, 1.0, 8))

    def test_scaling_in_m(self):
        a1 = E.sample_gue(8, 1.0, 3)
        a2 = E.sample_gue(8, 2.0, 3)
        assert np.array_equal(a2, a1 / 2.0)

    def test_second_moment_oracle(self):
        # E[(1/n) tr A^2] = 1/m^2; 10^4-draw oracle at n=8
        n, draws = 8, 10_000
        acc = 0.0
        for i in range(draws):
            a = E.sample_gue(n, 1.0, E.mix_seed(123, i))
            acc += float(np.sum(np.abs(a) ** 2)) / n     # tr A^2 for hermitian A
        mean = acc / draws
        assert mean == pytest.approx(1.0, abs=5 * np.sqrt(2.0 / draws))

    def test_entry_variances(self):
        # diagonal variance 1/(n m^2); off-diagonal re/im each half of it
        n, draws, m = 4, 4000, 1.5
        diag, offr, offi = [], [], []
        for i in range(draws):
            a = E.sample_gue(n, m, E.mix_seed(9, i))
            diag.append(a[0, 0].real)
            offr.append(a[0, 1].real)
            offi.append(a[0, 1].imag)
        v = 1.0 / (n * m * m)
        assert np.var(diag) == pytest.approx(v, rel=0.15)
        assert np.var(offr) == pytest.approx(v / 2, rel=0.15)
        assert np.var(offi) == pytest.approx(v / 2, rel=0.15)


class TestMakePh:
    def test_identity_metric_is_plain_hermitian(self):
        a = E.sample_gue(4, 1.0, 5)
        s = E.make_ph(a, M.Signature(k=4, n=4))
        assert np.array_equal(s.phi, a)

    def test_two_by_two_example(self):
        a = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        s = E.make_ph(a, M.ExplicitDiagonal([1.0, -1.0]))
        assert np.array_equal(s.phi, np.array([[0.0, -1.0], [1.0, 0.0]]))
        eigs = sorted(np.linalg.eigvals(s.phi), key=lambda z: z.imag)
        assert np.allclose(eigs, [-1j, 1j])

    def test_intertwining_residual(self):
        for i in range(10):
            s = E.draw_sample(E.EnsembleConfig(n=32, m=1.0, metric=M.Signature(k=8, n=32),
                                               master_seed=17, num_samples=10), i)
            assert E.intertwining_residual(s) <= 1e-10

    def test_real_characteristic_polynomial(self):
        s = E.draw_sample(E.EnsembleConfig(n=16, m=1.0, metric=M.Signature(k=4, n=16),
                                           master_seed=2, num_samples=1), 0)
        coeffs = np.poly(s.phi)
        assert np.max(np.abs(coeffs.imag)) <= 1e-9 * np.max(np.abs(coeffs))


class TestStatistics:
    def test_trace_statistic_moments(self):
        n, draws = 128, 2000
        cfg = E.EnsembleConfig(n=n, m=1.0, metric=M.Signature(k=32, n=n),
                               master_seed=99, num_samples=draws)
        ts = np.array([E.trace_statistic(E.draw_sample(cfg, i)) for i in range(draws)])
        assert abs(ts.mean()) <= 4 * ts.std() / np.sqrt(draws)
        # u = (1/n) tr B^2 = 1 for a signature metric
        assert ts.var() == pytest.approx(1.0 / n**2, rel=0.15)

    def test_moment_zero_is_metric_trace(self):
        s = E.draw_sample(E.EnsembleConfig(n=16, m=1.0, metric=M.Signature(k=4, n=16),
                                           master_seed=4, num_samples=1), 0)
        assert E.moment_statistic(s, 0) == pytest.approx(2 * 0.25 - 1)

    def test_moments_vanish_for_traceless_metric(self):
        n, draws = 32, 400
        cfg = E.EnsembleConfig(n=n, m=1.0, metric=M.Signature(k=16, n=n),
                               master_seed=11, num_samples=draws)
        vals = np.array([E.moment_statistic(E.draw_sample(cfg, i), 2) for i in range(draws)])
        err = vals.std() / np.sqrt(draws)
        assert abs(vals.mean()) <= 4 * err

    def test_moment_cost_guard(self):
        s = E.draw_sample(E.EnsembleConfig(n=4, m=1.0, metric=M.Signature(k=1, n=4),
                                           master_seed=1, num_samples=1), 0)
        with pytest.raises(ValueError):
            E.moment_statistic(s, 9)


class TestSeedsAndDump:
    def test_mix_seed_is_splitmix(self):
        # frozen reference: SplitMix64 of 0 advances to 0xE220A8397B1DCDAF
        assert E.splitmix64(0) == 0xE220A8397B1DCDAF
        assert E.mix_seed(0, 0) == 0xE220A8397B1DCDAF

    def test_per_sample_seeds_differ(self):
        seeds = {E.mix_seed(123, i) for i in range(1000)}
        assert len(seeds) == 1000

    def test_dump_roundtrip(self, tmp_path):
        cfg = E.EnsembleConfig(n=6, m=1.5, metric=M.Signature(k=2, n=6),
                               master_seed=77, num_samples=1)
        s = E.draw_sample(cfg, 0)
        path = tmp_path / "phi.bin"
        E.dump_sample(s, cfg.m, path)
        phi, m, seed = E.load_sample(path)
        assert np.array_equal(phi, s.phi)
        assert (m, seed) == (1.5, s.seed)
        header = path.read_bytes()[:4]
        assert header == b"PHS1"
