import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kboundary import (
    BaseMismatch,
    BoundaryFactorization,
    DiscreteMeasure,
    FiniteKernel,
    InvalidMeasure,
    LabelMismatch,
    MeasureMorphism,
    NotAFactorization,
    PointSet,
    RkhsElement,
    apply_V,
    apply_W,
    check_isometry,
    check_morphism,
    from_parseval_frame,
    l2_norm_squared,
    minimality_test,
    parseval_factorize,
    pullback,
    pullback_isometry_residual,
    range_projection,
    rkhs_inner,
    schwarz_bound_check,
    verify_factorization,
    verify_parseval,
)
from kboundary.factorization import projection_spectrum


def _kernel_from_gram(gram):
    g = np.asarray(gram, dtype=complex)
    return FiniteKernel(
        points=PointSet.from_points(np.arange(g.shape[0], dtype=complex)), gram=g
    )


def clark_two_atom_factorization(z1=0.3 + 0.1j, z2=-0.4 + 0.2j, tol=1e-9):
    """K(z, w) = 1 + z conj(w) factorized through e = +-1, weights 1/2."""
    zs = np.array([z1, z2])
    gram = 1.0 + zs[:, None] * np.conj(zs)[None, :]
    features = np.stack([1.0 + zs, 1.0 - zs], axis=1)
    measure = DiscreteMeasure(atoms=("0", "0.5"), weights=[0.5, 0.5])
    return BoundaryFactorization(
        kernel=_kernel_from_gram(gram), measure=measure, features=features, tol=tol
    )


def induced_factorization(rng, n, m, tol=1e-9):
    phi = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    w = rng.uniform(0.2, 1.0, size=m)
    gram = (phi * w[None, :]) @ np.conj(phi).T
    gram = (gram + np.conj(gram).T) / 2.0
    measure = DiscreteMeasure(atoms=tuple(range(m)), weights=w, normalized=False)
    return BoundaryFactorization(
        kernel=_kernel_from_gram(gram), measure=measure, features=phi, tol=tol
    )


class TestDiscreteMeasure:
    def test_positive_weights_required(self):
        with pytest.raises(InvalidMeasure):
            DiscreteMeasure(atoms=("a",), weights=[0.0])

    def test_normalization_checked(self):
        with pytest.raises(InvalidMeasure):
            DiscreteMeasure(atoms=("a", "b"), weights=[0.5, 0.6])

    def test_counting(self):
        mu = DiscreteMeasure.counting(3)
        assert mu.total_mass() == 3.0
        assert not mu.normalized


class TestVerifyFactorization:
    def test_two_atom_clark_identity(self):
        F = clark_two_atom_factorization()
        assert verify_factorization(F) <= 1e-12

    def test_parseval_bridge(self):
        rng = np.random.default_rng(23)
        A = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
        K = _kernel_from_gram(A @ np.conj(A).T)
        frame = parseval_factorize(K)
        F = from_parseval_frame(frame)
        assert verify_factorization(F) <= 1e-12
        assert abs(verify_factorization(F) - verify_parseval(frame)) <= 1e-12
        assert minimality_test(F)["is_minimal"]

    def test_zero_features(self):
        F = clark_two_atom_factorization()
        zeroed = BoundaryFactorization(
            kernel=F.kernel, measure=F.measure, features=np.zeros_like(F.features)
        )
        assert verify_factorization(zeroed) == pytest.approx(
            float(np.abs(F.kernel.gram).max())
        )


class TestMinimality:
    def test_two_atoms_two_points(self):
        assert minimality_test(clark_two_atom_factorization()) == {
            "is_minimal": True,
            "feature_rank": 2,
        }

    def test_single_atom(self):
        measure = DiscreteMeasure(atoms=("x",), weights=[1.0])
        F = BoundaryFactorization(
            kernel=_kernel_from_gram([[4.0]]),
            measure=measure,
            features=np.array([[2.0]]),
        )
        assert minimality_test(F)["is_minimal"]

    def test_more_atoms_than_points(self):
        rng = np.random.default_rng(29)
        F = induced_factorization(rng, n=2, m=5)
        result = minimality_test(F)
        assert not result["is_minimal"]
        assert result["feature_rank"] <= 2


class TestApplyW:
    def test_generator_goes_to_feature_row(self):
        F = clark_two_atom_factorization()
        for i, label in enumerate(F.kernel.points.labels):
            section = RkhsElement.kernel_section(F.kernel, label)
            np.testing.assert_allclose(apply_W(F, section), F.features[i], atol=1e-14)

    def test_zero_element(self):
        F = clark_two_atom_factorization()
        out = apply_W(F, RkhsElement(base=F.kernel, coeffs=[0, 0]))
        np.testing.assert_allclose(out, 0.0)

    def test_clark_difference(self):
        z1, z2 = 0.3 + 0.1j, -0.4 + 0.2j
        F = clark_two_atom_factorization(z1, z2)
        f = RkhsElement(base=F.kernel, coeffs=[1.0, -1.0])
        out = apply_W(F, f)
        np.testing.assert_allclose(out, [z1 - z2, -(z1 - z2)], atol=1e-14)
        assert l2_norm_squared(out, F.measure) == pytest.approx(abs(z1 - z2) ** 2)
        assert rkhs_inner(f, f).real == pytest.approx(abs(z1 - z2) ** 2)

    def test_isometry_for_complex_mixes(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            F = induced_factorization(rng, int(rng.integers(1, 6)), int(rng.integers(1, 7)))
            xi = rng.standard_normal(F.n_points) + 1j * rng.standard_normal(F.n_points)
            f = RkhsElement(base=F.kernel, coeffs=xi)
            assert l2_norm_squared(apply_W(F, f), F.measure) == pytest.approx(
                rkhs_inner(f, f).real, abs=1e-9
            )

    def test_rejects_unverified_factorization(self):
        F = clark_two_atom_factorization()
        broken = BoundaryFactorization(
            kernel=F.kernel,
            measure=F.measure,
            features=np.zeros_like(F.features),
            tol=1e-12,
        )
        with pytest.raises(NotAFactorization):
            apply_W(broken, RkhsElement.kernel_section(F.kernel, "p0"))

    def test_base_mismatch(self):
        F = clark_two_atom_factorization()
        other = _kernel_from_gram(np.eye(2))
        with pytest.raises(BaseMismatch):
            apply_W(F, RkhsElement.kernel_section(other, "p0"))


class TestApplyV:
    def test_feature_row_reproduces_gram_row(self):
        # V(k_t) evaluated on the points reduces exactly to the
        # factorization identity, i.e. the Gram row of t.
        F = clark_two_atom_factorization()
        for t in range(F.n_points):
            out = apply_V(F, F.features[t])
            np.testing.assert_allclose(out, F.kernel.gram[t, :], atol=1e-14)

    def test_vw_identity_on_generators(self):
        F = clark_two_atom_factorization()
        for t, label in enumerate(F.kernel.points.labels):
            section = RkhsElement.kernel_section(F.kernel, label)
            roundtrip = apply_V(F, apply_W(F, section))
            np.testing.assert_allclose(roundtrip, F.kernel.gram[t, :], atol=1e-14)

    def test_zero_vector(self):
        F = clark_two_atom_factorization()
        np.testing.assert_allclose(apply_V(F, np.zeros(2)), 0.0)

    def test_kernel_of_V(self):
        rng = np.random.default_rng(37)
        F = induced_factorization(rng, n=2, m=5)
        # g orthogonal in L2(mu) to every feature row lies in ker V.
        weighted = np.conj(F.features) * F.measure.weights[None, :]
        _, _, vh = np.linalg.svd(weighted)
        g = np.conj(vh[-1])
        assert np.abs(weighted @ g).max() <= 1e-12
        np.testing.assert_allclose(apply_V(F, g), 0.0, atol=1e-12)


class TestCheckIsometry:
    def test_verified_factorization(self):
        F = clark_two_atom_factorization()
        res = check_isometry(F)
        assert res["wstar_w_residual"] <= 1e-9
        assert res["projection_residual"] <= 1e-9

    def test_minimal_projection_is_identity(self):
        F = clark_two_atom_factorization()
        P = range_projection(F)
        np.testing.assert_allclose(P, np.eye(2), atol=1e-9)

    def test_nonminimal_projection_trace_equals_rank(self):
        rng = np.random.default_rng(41)
        F = induced_factorization(rng, n=3, m=7)
        P = range_projection(F)
        rank = np.linalg.matrix_rank(F.kernel.gram)
        assert abs(P.trace().real - rank) <= 1e-6
        assert np.abs(P - np.eye(7)).max() > 0.1
        spectrum = projection_spectrum(F)
        dist = np.minimum(np.abs(spectrum), np.abs(spectrum - 1.0))
        assert dist.max() <= 1e-7


class TestSchwarzBound:
    def test_zero_coefficients(self):
        F = clark_two_atom_factorization()
        res = schwarz_bound_check(F, [1.0, 2.0], [0.0, 0.0])
        assert res["lhs"] == 0.0 and res["holds"]

    def test_equality_case(self):
        rng = np.random.default_rng(43)
        F = induced_factorization(rng, n=3, m=4)
        xi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        g = F.features.T @ np.conj(xi)
        res = schwarz_bound_check(F, g, xi)
        assert res["holds"]
        assert res["lhs"] == pytest.approx(res["rhs"], rel=1e-9)

    def test_random_triples(self):
        rng = np.random.default_rng(47)
        for _ in range(100):
            F = induced_factorization(rng, int(rng.integers(1, 5)), int(rng.integers(1, 6)))
            g = rng.standard_normal(F.n_atoms) + 1j * rng.standard_normal(F.n_atoms)
            xi = rng.standard_normal(F.n_points) + 1j * rng.standard_normal(F.n_points)
            assert schwarz_bound_check(F, g, xi)["holds"]


@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_schwarz_bound_property(data):
    seed = data.draw(st.integers(min_value=0, max_value=2**32 - 1))
    rng = np.random.default_rng(seed)
    F = induced_factorization(rng, int(rng.integers(1, 5)), int(rng.integers(1, 6)))
    g = rng.standard_normal(F.n_atoms) + 1j * rng.standard_normal(F.n_atoms)
    xi = rng.standard_normal(F.n_points) + 1j * rng.standard_normal(F.n_points)
    assert schwarz_bound_check(F, g, xi)["holds"]


def _morphism_fixture():
    target = DiscreteMeasure(atoms=("a", "b"), weights=[0.5, 0.5])
    zs = np.array([0.3, -0.2 + 0.1j])
    phi = 1.0 + zs[:, None] * np.conj(np.array([1.0, -1.0]))[None, :]
    gram = (phi * target.weights[None, :]) @ np.conj(phi).T
    gram = (gram + np.conj(gram).T) / 2.0
    F1 = BoundaryFactorization(
        kernel=_kernel_from_gram(gram), measure=target, features=phi
    )
    return target, F1


class TestMorphisms:
    def test_identity_morphism(self):
        target, F1 = _morphism_fixture()
        ident = MeasureMorphism(source=target, target=target, map={"a": "a", "b": "b"})
        assert check_morphism(ident, F1, F1) == {
            "pushforward_ok": True,
            "sigma_ok": True,
            "diagram_ok": True,
        }

    def test_collapsing_map(self):
        target, F1 = _morphism_fixture()
        source = DiscreteMeasure(atoms=("0", "1", "2"), weights=[0.25, 0.25, 0.5])
        collapse = MeasureMorphism(
            source=source, target=target, map={"0": "a", "1": "a", "2": "b"}
        )
        F2 = pullback(F1, collapse)
        verdict = check_morphism(collapse, F1, F2)
        assert verdict == {"pushforward_ok": True, "sigma_ok": False, "diagram_ok": True}

    def test_wrong_weights(self):
        target = DiscreteMeasure(atoms=("a", "b"), weights=[0.6, 0.4])
        zs = np.array([0.3, -0.2 + 0.1j])
        phi = 1.0 + zs[:, None] * np.conj(np.array([1.0, -1.0]))[None, :]
        gram = (phi * target.weights[None, :]) @ np.conj(phi).T
        gram = (gram + np.conj(gram).T) / 2.0
        F1 = BoundaryFactorization(
            kernel=_kernel_from_gram(gram), measure=target, features=phi
        )
        source = DiscreteMeasure(atoms=("0", "1"), weights=[0.5, 0.5])
        wrong = MeasureMorphism(source=source, target=target, map={"0": "a", "1": "b"})
        F2 = pullback(F1, wrong)
        verdict = check_morphism(wrong, F1, F2)
        assert verdict == {"pushforward_ok": False, "sigma_ok": True, "diagram_ok": True}

    def test_pullback_isometry(self):
        target, F1 = _morphism_fixture()
        source = DiscreteMeasure(atoms=("0", "1", "2"), weights=[0.25, 0.25, 0.5])
        collapse = MeasureMorphism(
            source=source, target=target, map={"0": "a", "1": "a", "2": "b"}
        )
        rng = np.random.default_rng(53)
        for _ in range(20):
            f = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            assert pullback_isometry_residual(collapse, f) <= 1e-12

    def test_map_must_be_total(self):
        target, _ = _morphism_fixture()
        source = DiscreteMeasure(atoms=("0", "1"), weights=[0.5, 0.5])
        with pytest.raises(LabelMismatch):
            MeasureMorphism(source=source, target=target, map={"0": "a"})

    def test_map_must_hit_target_atoms(self):
        target, _ = _morphism_fixture()
        source = DiscreteMeasure(atoms=("0",), weights=[1.0])
        with pytest.raises(LabelMismatch):
            MeasureMorphism(source=source, target=target, map={"0": "zzz"})

    def test_morphism_endpoints_must_match_factorizations(self):
        target, F1 = _morphism_fixture()
        other = DiscreteMeasure(atoms=("a", "b"), weights=[0.7, 0.3])
        morph = MeasureMorphism(source=other, target=target, map={"a": "a", "b": "b"})
        with pytest.raises(LabelMismatch):
            check_morphism(morph, F1, F1)
