import numpy as np
import pytest

import biwave.geometry as geo
from biwave.errors import OffManifold, TubeExceeded
from biwave.geometry import Manifold, ProjectorJet, Sphere, TorusOfRevolution, make_manifold


@pytest.fixture(params=["sphere", "torus"])
def manifold(request):
    return Sphere(3) if request.param == "sphere" else TorusOfRevolution(2.0, 0.5)


def torus_nearest_oracle(m, p):
    """Gradient descent on |q(theta, phi) - p|^2 over the torus parametrization."""
    from scipy.optimize import minimize

    R, r = m.R_major, m.r_minor

    def q(a):
        theta, phi = a
        rad = R + r * np.cos(phi)
        return np.array([rad * np.cos(theta), rad * np.sin(theta), r * np.sin(phi)])

    def fg(a):
        theta, phi = a
        rad = R + r * np.cos(phi)
        qa = q(a)
        dq_dtheta = np.array([-rad * np.sin(theta), rad * np.cos(theta), 0.0])
        dq_dphi = np.array([-r * np.sin(phi) * np.cos(theta), -r * np.sin(phi) * np.sin(theta), r * np.cos(phi)])
        d = qa - p
        return np.sum(d * d), 2.0 * np.array([d @ dq_dtheta, d @ dq_dphi])

    theta0 = np.arctan2(p[1], p[0])
    rho = np.hypot(p[0], p[1])
    phi0 = np.arctan2(p[2], rho - m.R_major)
    best = minimize(fg, x0=[theta0, phi0], jac=True, method="BFGS",
                    options={"gtol": 1e-14, "maxiter": 500})
    return q(best.x)


class TestRetraction:
    def test_sphere_radial_projection(self):
        m = Sphere(2)
        # (2, 0) sits outside the tube; the global projection is still radial
        assert np.allclose(m.project(np.array([2.0, 0.0])), [1.0, 0.0], atol=1e-15)
        with pytest.raises(TubeExceeded):
            m.retract(np.array([2.0, 0.0]))
        assert np.allclose(m.retract(np.array([1.2, 0.0])), [1.0, 0.0], atol=1e-15)

    def test_sphere_identity_on_manifold(self):
        m = Sphere(3)
        p = np.array([0.6, 0.8, 0.0])
        assert np.allclose(m.retract(p), p, atol=1e-15)

    def test_torus_outer_equator(self):
        m = TorusOfRevolution(2.0, 0.5)
        assert np.allclose(m.retract(np.array([2.6, 0.0, 0.0])), [2.5, 0.0, 0.0], atol=1e-12)

    def test_torus_against_descent_oracle(self, rng):
        m = TorusOfRevolution(2.0, 0.5)
        for _ in range(10):
            p = m.random_point(rng) + 0.05 * rng.standard_normal(3)
            q = m.retract(p)
            q_oracle = torus_nearest_oracle(m, p)
            assert np.abs(q - q_oracle).max() <= 1e-10
            # nearest point: |q - p| equals the reported distance
            assert abs(np.linalg.norm(q - p) - m.constraint_residual(p)) <= 1e-12

    def test_retract_idempotent(self, manifold, rng):
        wiggle = 0.25 * manifold.tube_radius
        pts = manifold.random_point(rng, (200,)) + wiggle * np.tanh(rng.standard_normal((200, 3)))
        q = manifold.retract(pts)
        assert np.abs(manifold.retract(q) - q).max() <= 1e-12

    def test_tube_exceeded(self):
        with pytest.raises(TubeExceeded):
            Sphere(2).retract(np.array([1.6, 0.0]))  # distance 0.6 > 0.5
        with pytest.raises(TubeExceeded):
            TorusOfRevolution(2.0, 0.5).retract(np.array([2.0, 0.0, 0.8]))

    def test_projection_singularities(self):
        with pytest.raises(TubeExceeded):
            Sphere(2).project(np.zeros(2))
        with pytest.raises(TubeExceeded):
            TorusOfRevolution(2.0, 0.5).project(np.array([0.0, 0.0, 0.3]))
        with pytest.raises(TubeExceeded):
            TorusOfRevolution(2.0, 0.5).project(np.array([2.0, 0.0, 0.0]))


class TestConstraintResidual:
    def test_sphere_values(self):
        m = Sphere(2)
        assert m.constraint_residual(np.array([1.0, 0.0])) == 0.0
        assert m.constraint_residual(np.array([2.0, 0.0])) == 1.0

    def test_torus_tube_distance(self):
        m = TorusOfRevolution(2.0, 0.5)
        assert m.constraint_residual(np.array([2.0, 0.0, 0.6])) == pytest.approx(0.1, abs=1e-14)

    def test_zero_iff_on_manifold(self, manifold, rng):
        pts = manifold.random_point(rng, (100,))
        assert manifold.constraint_residual(pts).max() <= 1e-12


class TestTangentProjector:
    def test_sphere_closed_forms(self):
        P = Sphere(2).tangent_projector(np.array([1.0, 0.0]))
        assert np.allclose(P, [[0.0, 0.0], [0.0, 1.0]], atol=1e-15)
        P3 = Sphere(3).tangent_projector(np.array([0.0, 0.0, 1.0]))
        assert np.allclose(P3 @ np.array([1.0, 2.0, 3.0]), [1.0, 2.0, 0.0], atol=1e-15)

    def test_torus_kernel_and_fixed_directions(self):
        m = TorusOfRevolution(2.0, 0.5)
        P = m.tangent_projector(np.array([2.5, 0.0, 0.0]))
        assert np.abs(P @ np.array([1.0, 0.0, 0.0])).max() <= 1e-12
        assert np.allclose(P @ np.array([0.0, 1.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-12)
        assert np.allclose(P @ np.array([0.0, 0.0, 1.0]), [0.0, 0.0, 1.0], atol=1e-12)

    def test_against_retraction_jacobian_oracle(self, manifold, rng):
        h = 1e-5
        eye = np.eye(3)
        for _ in range(5):
            p = manifold.random_point(rng)
            jac = np.empty((3, 3))
            for c in range(3):
                jac[:, c] = (manifold.project(p + h * eye[c]) - manifold.project(p - h * eye[c])) / (2 * h)
            assert np.abs(jac - manifold.tangent_projector(p)).max() <= 1e-7

    def test_projector_invariants_bulk(self, manifold, rng):
        pts = manifold.random_point(rng, (10_000,))
        P = manifold.tangent_projector(pts)
        assert np.abs(P - np.swapaxes(P, -1, -2)).max() <= 1e-12
        assert np.abs(np.einsum("pab,pbc->pac", P, P) - P).max() <= 1e-10
        assert np.abs(np.einsum("paa->p", P) - manifold.manifold_dim).max() <= 1e-10
        # tangency annihilation: (I - P) kills P v
        v = rng.standard_normal(pts.shape)
        tv = np.einsum("pab,pb->pa", P, v)
        assert np.abs(tv - np.einsum("pab,pb->pa", P, tv)).max() <= 1e-10

    def test_sphere_normal_annihilated(self, rng):
        m = Sphere(4)
        p = m.random_point(rng, (50,))
        P = m.tangent_projector(p)
        assert np.abs(np.einsum("pab,pb->pa", P, p)).max() <= 1e-10

    def test_off_manifold_rejected(self):
        with pytest.raises(OffManifold):
            Sphere(2).tangent_projector(np.array([1.5, 0.0]))
        with pytest.raises(OffManifold):
            TorusOfRevolution(2.0, 0.5).tangent_projector(np.array([2.6, 0.0, 0.2]))


class TestProjectorJet:
    def test_sphere_dp_examples(self):
        jet = Sphere(2).projector_jet(np.array([1.0, 0.0]))
        out = np.einsum("abc,b,c->a", jet.dP, np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        assert np.allclose(out, [0.0, -1.0], atol=1e-15)
        jet3 = Sphere(3).projector_jet(np.array([0.0, 0.0, 1.0]))
        out3 = np.einsum("abc,b,c->a", jet3.dP, np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
        assert np.allclose(out3, [-1.0, 0.0, 0.0], atol=1e-15)

    def test_sphere_entrywise_closed_form(self, rng):
        m = Sphere(3)
        p = m.random_point(rng)
        jet = m.projector_jet(p)
        w = jet.P @ rng.standard_normal(3)
        v = rng.standard_normal(3)
        expected = -np.dot(v, w) * p - np.dot(p, v) * w
        got = np.einsum("abc,b,c->a", jet.dP, v, w)
        assert np.abs(got - expected).max() <= 1e-13

    def test_sphere_dp_matches_finite_differences(self, rng):
        m = Sphere(3)
        pts = m.random_point(rng, (1000,))
        jet = m.projector_jet(pts)
        w = np.einsum("pab,pb->pa", jet.P, rng.standard_normal(pts.shape))
        closed = np.einsum("pabc,pc->pab", jet.dP, w)
        h = 1e-5
        fd = (
            m.tangent_projector(m.project(pts + h * w))
            - m.tangent_projector(m.project(pts - h * w))
        ) / (2 * h)
        assert np.abs(closed - fd).max() <= 1e-7

    def test_torus_jet_matches_fd_oracle(self, rng):
        m = TorusOfRevolution(2.0, 0.5)
        for _ in range(10):
            p = m.random_point(rng)
            jet = m.projector_jet(p)
            w = jet.P @ rng.standard_normal(3)
            h = 1e-5
            fd = (m.tangent_projector(m.project(p + h * w)) - m.tangent_projector(m.project(p - h * w))) / (2 * h)
            assert np.abs(np.einsum("abc,c->ab", jet.dP, w) - fd).max() <= 1e-6

    def test_second_order_jet(self, rng):
        m = Sphere(3)
        p = m.random_point(rng)
        closed = m.projector_jet(p, order=2)
        generic = Manifold.projector_jet(m, p, order=2)
        w = closed.P @ rng.standard_normal(3)
        v = closed.P @ rng.standard_normal(3)
        a = np.einsum("abcd,c,d->ab", closed.d2P, w, v)
        b = np.einsum("abcd,c,d->ab", generic.d2P, w, v)
        assert np.abs(a - b).max() <= 1e-6
        assert isinstance(closed, ProjectorJet) and closed.d2P is not None

    def test_dp_is_normal_valued_on_tangent_pairs(self, manifold, rng):
        # dP(w) v for tangent w, v is the second fundamental form: normal valued
        pts = manifold.random_point(rng, (100,))
        jet = manifold.projector_jet(pts)
        w = np.einsum("pab,pb->pa", jet.P, rng.standard_normal(pts.shape))
        v = np.einsum("pab,pb->pa", jet.P, rng.standard_normal(pts.shape))
        out = np.einsum("pabc,pb,pc->pa", jet.dP, v, w)
        tangential = np.einsum("pab,pb->pa", jet.P, out)
        assert np.abs(tangential).max() <= 1e-6

    def test_bad_order(self):
        with pytest.raises(ValueError):
            Sphere(2).projector_jet(np.array([1.0, 0.0]), order=3)


class TestFactory:
    def test_make_manifold(self):
        assert isinstance(make_manifold("sphere", 3), Sphere)
        t = make_manifold("torus", 2.0, 0.5)
        assert isinstance(t, TorusOfRevolution) and t.tube_radius == pytest.approx(0.2)
        with pytest.raises(ValueError):
            make_manifold("klein", 1)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            Sphere(1)
        with pytest.raises(ValueError):
            Sphere(3, tube_radius=1.5)
        with pytest.raises(ValueError):
            TorusOfRevolution(0.5, 2.0)
