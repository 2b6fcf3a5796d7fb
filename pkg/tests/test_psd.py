import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meanineq import (
    PsdClass,
    ShapeError,
    ShiftedDiagonal,
    classify_shifted_diagonal,
    classify_symmetric,
    jacobi_eigh,
    negative_direction,
)
from meanineq.psd import classify_shifted_diagonal_batch, psd_class_from_code, quadratic_form

from helpers import rng_for

PD = PsdClass.POSITIVE_DEFINITE
PSD = PsdClass.POSITIVE_SEMIDEFINITE_ONLY
IND = PsdClass.INDEFINITE


class TestClosedFormExamples:
    @pytest.mark.parametrize(
        "c0,c,expected",
        [
            (1.0, (1.0, 1.0), PD),
            (-1.0, (3.0, 3.0), PD),  # reciprocal sum -1/3, matrix [[2,-1],[-1,2]]
            (-1.0, (2.0, 2.0), PSD),  # reciprocal sum 0, matrix [[1,-1],[-1,1]]
            (-1.0, (1.0, 1.0), IND),  # reciprocal sum +1, matrix [[0,-1],[-1,0]]
            (0.0, (0.0, 1.0), PSD),  # two zeros among the shifts
        ],
    )
    def test_examples(self, c0, c, expected):
        res = classify_shifted_diagonal(ShiftedDiagonal(c0, c))
        assert res.klass is expected
        assert res.certificate

    def test_matrix_and_eigs_of_examples(self):
        m = ShiftedDiagonal(-1.0, (3.0, 3.0)).matrix()
        np.testing.assert_allclose(m, [[2, -1], [-1, 2]])
        vals, _ = jacobi_eigh(m)
        np.testing.assert_allclose(vals, [1.0, 3.0], atol=1e-12)
        vals, _ = jacobi_eigh(ShiftedDiagonal(-1.0, (2.0, 2.0)).matrix())
        np.testing.assert_allclose(vals, [0.0, 2.0], atol=1e-12)


class TestEigOracleExamples:
    def test_identity(self):
        assert classify_symmetric(np.eye(3)).klass is PD

    def test_all_ones(self):
        assert classify_symmetric(np.ones((2, 2))).klass is PSD

    def test_signature(self):
        assert classify_symmetric(np.diag([1.0, -1.0])).klass is IND

    def test_asymmetric_rejected(self):
        with pytest.raises(ShapeError):
            classify_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestOracleAgreement:
    def test_random_instances(self):
        rng = rng_for(30)
        total = 20_000
        c0 = rng.uniform(-5, 5, total)
        ks = rng.integers(2, 9, total)
        disagreements = 0
        for k in range(2, 9):
            mask = ks == k
            cs = rng.uniform(-5, 5, (int(mask.sum()), k))
            codes = classify_shifted_diagonal_batch(c0[mask], cs)
            for i in range(cs.shape[0]):
                sd = ShiftedDiagonal(float(c0[mask][i]), tuple(cs[i]))
                oracle = classify_symmetric(sd.matrix())
                closed = psd_class_from_code(codes[i])
                if closed is oracle.klass:
                    continue
                vals, _ = jacobi_eigh(sd.matrix())
                scale = max(1.0, np.abs(vals).max())
                if abs(vals[0]) > 1e-9 * scale:
                    disagreements += 1
        assert disagreements == 0

    def test_near_boundary_band(self):
        # reciprocal sums within [-1e-6, 1e-6]: classes may differ only by
        # the semidefinite-only buffer
        rng = rng_for(31)
        for _ in range(2000):
            k = int(rng.integers(2, 6))
            c = rng.uniform(0.2, 5.0, k)
            delta = float(rng.uniform(-1e-6, 1e-6))
            c0 = 1.0 / (delta - (1.0 / c).sum())
            sd = ShiftedDiagonal(c0, tuple(c))
            closed = classify_shifted_diagonal(sd).klass
            oracle = classify_symmetric(sd.matrix()).klass
            if closed is not oracle:
                vals, _ = jacobi_eigh(sd.matrix())
                assert abs(vals[0]) <= 1e-9 * max(1.0, np.abs(vals).max())
            assert not (closed is PD and oracle is IND)
            assert not (closed is IND and oracle is PD)


class TestNegativeDirection:
    def test_quadratic_form_witness(self):
        rng = rng_for(32)
        found = 0
        while found < 200:
            k = int(rng.integers(2, 7))
            sd = ShiftedDiagonal(
                float(rng.uniform(-5, 5)), tuple(rng.uniform(-5, 5, k))
            )
            if classify_shifted_diagonal(sd).klass is not IND:
                continue
            found += 1
            x = negative_direction(sd)
            assert quadratic_form(sd, x) < 0.0
            np.testing.assert_allclose(
                quadratic_form(sd, x), x @ sd.matrix() @ x, rtol=1e-9, atol=1e-12
            )

    def test_reciprocal_vector_case(self):
        sd = ShiftedDiagonal(-1.0, (1.0, 1.0))
        x = negative_direction(sd)
        assert quadratic_form(sd, x) < 0.0


class TestScaleInvariance:
    @settings(max_examples=200, deadline=None)
    @given(
        t=st.floats(1e-3, 1e3),
        c0=st.floats(-5, 5),
        c1=st.floats(-5, 5),
        c2=st.floats(-5, 5),
    )
    def test_positive_scaling(self, t, c0, c1, c2):
        vals = [c0, c1, c2]
        # keep entries off the zero threshold so scaling cannot cross it
        vals = [0.0 if abs(v) < 1e-6 else v for v in vals]
        base = classify_shifted_diagonal(ShiftedDiagonal(vals[0], (vals[1], vals[2])))
        scaled = classify_shifted_diagonal(
            ShiftedDiagonal(t * vals[0], (t * vals[1], t * vals[2]))
        )
        assert base.klass is scaled.klass


class TestJacobiEigh:
    def test_reconstruction(self):
        rng = rng_for(33)
        for k in (2, 4, 8, 16):
            a = rng.standard_normal((k, k))
            a = 0.5 * (a + a.T)
            vals, vecs = jacobi_eigh(a)
            np.testing.assert_allclose(vecs @ np.diag(vals) @ vecs.T, a, atol=1e-10)
            np.testing.assert_allclose(vecs.T @ vecs, np.eye(k), atol=1e-12)
            np.testing.assert_allclose(vals, np.sort(np.linalg.eigvalsh(a)), atol=1e-10)
