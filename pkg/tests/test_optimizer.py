import numpy as np
import pytest

from kmsa import (
    DimensionError,
    GraphRecipe,
    KernelSpec,
    KmsaConfig,
    MultiviewDataset,
    WeightDomainWarning,
    fit,
    transform,
)
from kmsa.graphs import constraint_matrix, laplacian, pca_graph
from kmsa.kernels import build_kernel
from kmsa.optimizer import (
    OptState,
    build_h,
    closed_form_weights,
    gram_divergence,
    objective,
    objective_terms,
    update_view,
    update_weights,
    view_trace_terms,
)
from kmsa.types import ViewState

from conftest import random_dataset
from oracles import kpca_oracle, simplex_oracle, weight_objective


def make_state(rng, m=2, n=6, d=2, recipe="pca"):
    """Hand-assembled optimizer state over random Gaussian-kernel views."""
    states = []
    for v in range(m):
        X = rng.standard_normal((3, n))
        K = build_kernel(X, KernelSpec())
        pair = pca_graph(n)
        P = laplacian(pair.S)
        M = constraint_matrix(K, pair, ridge=1e-6)
        U = rng.standard_normal((n, d))
        states.append(ViewState(K=K, P=P, M=M, U=U))
    return OptState(
        states=states, alpha=np.full(m, 1.0 / m), iter=0, objective_trace=[]
    )


class TestObjective:
    def test_single_view_reduces_to_trace_plus_kappa(self, rng):
        state = make_state(rng, m=1)
        state.alpha = np.array([1.0])
        cfg = KmsaConfig(d=2)
        vs = state.states[0]
        expected = np.trace(vs.U.T @ vs.K @ vs.P @ vs.K @ vs.U) + cfg.kappa
        assert objective(state, cfg) == pytest.approx(expected, rel=1e-12)

    def test_zero_coefficients_leave_only_regularizer(self, rng):
        m = 3
        state = make_state(rng, m=m)
        for v in range(m):
            state.states[v] = ViewState(
                K=state.states[v].K,
                P=state.states[v].P,
                M=state.states[v].M,
                U=np.zeros_like(state.states[v].U),
            )
        cfg = KmsaConfig(d=2)
        assert objective(state, cfg) == pytest.approx(
            cfg.kappa * m * (1.0 / m) ** cfg.r, rel=1e-12
        )

    def test_two_view_scalar_expansion(self):
        # N=3, d=1: expand every term by hand
        K1 = np.array([[1.0, 0.5, 0.2], [0.5, 1.0, 0.4], [0.2, 0.4, 1.0]])
        K2 = np.array([[1.0, 0.1, 0.3], [0.1, 1.0, 0.6], [0.3, 0.6, 1.0]])
        P1 = laplacian(pca_graph(3).S)
        P2 = laplacian(pca_graph(3).S)
        u1 = np.array([[1.0], [2.0], [-1.0]])
        u2 = np.array([[0.5], [-1.0], [1.5]])
        alpha = np.array([0.6, 0.4])
        r, kappa, eta = 3.0, 0.1, -1.0
        state = OptState(
            states=[
                ViewState(K=K1, P=P1, M=np.eye(3), U=u1),
                ViewState(K=K2, P=P2, M=np.eye(3), U=u2),
            ],
            alpha=alpha,
            iter=0,
            objective_trace=[],
        )
        embed = (
            alpha[0] ** r * float(u1.T @ K1 @ P1 @ K1 @ u1)
            + alpha[1] ** r * float(u2.T @ K2 @ P2 @ K2 @ u2)
        )
        reg = kappa * (alpha[0] ** r + alpha[1] ** r)
        # one unordered pair; d=1 makes the alignment trace a squared dot
        align = (alpha[0] ** r + alpha[1] ** r) / (2 * eta) * float(u2.T @ u1) ** 2
        cfg = KmsaConfig(d=1, r=r, kappa=kappa, eta=eta)
        assert objective(state, cfg) == pytest.approx(embed + reg + align, rel=1e-12)

    def test_decomposes_into_three_terms(self, rng):
        state = make_state(rng, m=3, d=2)
        state.alpha = np.array([0.5, 0.3, 0.2])
        cfg = KmsaConfig(d=2)
        terms = objective_terms(state, cfg)
        total = terms["embedding"] + terms["weight_regularizer"] + terms["alignment"]
        assert objective(state, cfg) == pytest.approx(total, abs=1e-10)


class TestBuildH:
    def test_single_view_is_bare_quadratic(self, rng):
        state = make_state(rng, m=1)
        state.alpha = np.array([1.0])
        cfg = KmsaConfig(d=2)
        vs = state.states[0]
        expected = vs.K @ vs.P @ vs.K
        assert np.allclose(build_h(state, 0, cfg), 0.5 * (expected + expected.T))

    def test_uniform_weights_coefficient(self, rng):
        state = make_state(rng, m=2)
        cfg = KmsaConfig(d=2, eta=-1.0)
        vs0, vs1 = state.states
        H = build_h(state, 0, cfg)
        base = vs0.K @ vs0.P @ vs0.K
        coupling = H - 0.5 * (base + base.T)
        # (1 + 1) / (2 eta) = 1/eta = -1
        assert np.allclose(coupling, -vs1.U @ vs1.U.T, atol=1e-12)

    def test_skewed_weights_coefficient(self, rng):
        state = make_state(rng, m=2)
        state.alpha = np.array([0.8, 0.2])
        cfg = KmsaConfig(d=2, r=3.0, eta=-1.0)
        vs0, vs1 = state.states
        H = build_h(state, 0, cfg)
        base = vs0.K @ vs0.P @ vs0.K
        coupling = H - 0.5 * (base + base.T)
        coeff = (1.0 + (0.2 / 0.8) ** 3) / (2.0 * -1.0)
        assert coeff == pytest.approx(-0.5078125)
        assert np.allclose(coupling, coeff * vs1.U @ vs1.U.T, atol=1e-12)


class TestUpdateView:
    def test_diagonal_quadratic_picks_smallest_entries(self):
        H = np.diag([5.0, -1.0, 2.0, 0.0])
        state = OptState(
            states=[ViewState(K=np.eye(4), P=H, M=np.eye(4), U=np.zeros((4, 2)))],
            alpha=np.array([1.0]),
            iter=0,
            objective_trace=[],
        )
        cfg = KmsaConfig(d=2)
        U = update_view(state, 0, cfg)
        # smallest diagonal entries are -1 then 0
        assert np.allclose(np.abs(U), np.array(
            [[0, 0], [1, 0], [0, 0], [0, 1]], dtype=float), atol=1e-12)

    def test_repeated_call_is_identical(self, rng):
        state = make_state(rng, m=2, d=2)
        cfg = KmsaConfig(d=2)
        U1 = update_view(state, 0, cfg)
        U2 = update_view(state, 0, cfg)
        assert np.array_equal(U1, U2)

    def test_result_is_constraint_orthonormal(self, rng):
        state = make_state(rng, m=2, d=3, n=8)
        cfg = KmsaConfig(d=3)
        U = update_view(state, 1, cfg)
        M = state.states[1].M
        assert np.abs(U.T @ M @ U - np.eye(3)).max() < 1e-8


class TestWeights:
    def test_equal_traces_give_uniform(self):
        alpha, clamped = closed_form_weights(np.array([2.0, 2.0, 2.0]), r=3.0)
        assert np.allclose(alpha, 1.0 / 3.0)
        assert not clamped.any()

    def test_known_traces(self):
        # traces (1, 2, 4), r=3: alpha proportional to (1, 2^-1/2, 4^-1/2)
        alpha, _ = closed_form_weights(np.array([1.0, 2.0, 4.0]), r=3.0)
        raw = np.array([1.0, 2.0 ** -0.5, 4.0 ** -0.5])
        assert np.allclose(alpha, raw / raw.sum(), atol=1e-12)
        assert np.allclose(alpha, [0.453082, 0.320377, 0.226541], atol=5e-7)

    def test_beats_simplex_grid_oracle(self, rng):
        for _ in range(8):
            m = int(rng.integers(2, 4))
            traces = rng.uniform(0.5, 5.0, size=m)
            alpha, _ = closed_form_weights(traces, r=3.0)
            _, best_grid = simplex_oracle(traces, r=3.0, step=1e-3)
            mine = float(weight_objective(alpha, traces, 3.0))
            assert mine <= best_grid + 1e-6

    def test_large_r_is_nearly_uniform(self):
        alpha, _ = closed_form_weights(np.array([1.0, 2.0, 4.0]), r=100.0)
        assert np.abs(alpha - 1.0 / 3.0).max() < 1e-2

    def test_r_near_one_is_nearly_one_hot(self):
        traces = np.array([3.0, 1.0, 2.0])
        alpha, _ = closed_form_weights(traces, r=1.01)
        assert alpha[1] > 0.99

    def test_scale_invariance_bitwise_for_pow2(self):
        traces = np.array([1.3, 2.7, 0.9])
        base, _ = closed_form_weights(traces, r=3.0)
        for c in (2.0, 0.5, 4.0):
            scaled, _ = closed_form_weights(c * traces, r=3.0)
            assert np.array_equal(base, scaled)

    def test_scale_invariance_general(self):
        traces = np.array([1.3, 2.7, 0.9])
        base, _ = closed_form_weights(traces, r=3.0)
        scaled, _ = closed_form_weights(3.0 * traces, r=3.0)
        assert np.allclose(base, scaled, rtol=1e-14)

    def test_non_positive_traces_clamped(self):
        alpha, clamped = closed_form_weights(np.array([-1.0, 2.0]), r=3.0)
        assert clamped.tolist() == [True, False]
        # the clamped trace is tiny, so its view absorbs nearly all weight
        assert alpha[0] > 0.99
        assert alpha.sum() == pytest.approx(1.0)

    def test_all_zero_traces_fall_back_to_uniform(self):
        alpha, clamped = closed_form_weights(np.zeros(4), r=3.0)
        assert np.allclose(alpha, 0.25)
        assert clamped.all()

    def test_update_weights_emits_warning_on_clamp(self, rng):
        state = make_state(rng, m=2, n=8, d=2)
        cfg = KmsaConfig(d=2)
        traces = view_trace_terms(state, cfg)
        if (traces > 0).all():  # force a clamp by flipping the quadratic sign
            state.states[0] = ViewState(
                K=state.states[0].K,
                P=-10.0 * state.states[0].P,
                M=state.states[0].M,
                U=state.states[0].U,
            )
        with pytest.warns(WeightDomainWarning):
            alpha = update_weights(state, cfg)
        assert alpha.sum() == pytest.approx(1.0)


class TestFit:
    def test_single_view_matches_kernel_pca(self, rng):
        X = rng.standard_normal((6, 40))
        data = MultiviewDataset(views=[X])
        cfg = KmsaConfig(
            d=3,
            kernel=KernelSpec(kind="linear"),
            center_kernel=True,
            graph=GraphRecipe(kind="pca"),
        )
        model = fit(data, cfg)
        assert np.allclose(model.alpha, [1.0])
        U, M = model.states[0].U, model.states[0].M
        projector = U @ U.T @ M
        K_centered = build_kernel(X, KernelSpec(kind="linear"), center=True)
        _, Q = kpca_oracle(K_centered, 3)
        assert np.abs(projector - Q @ Q.T).max() < 1e-6

    def test_zero_sweeps_returns_initialization(self, rng):
        data = random_dataset(rng, m=3, n=12)
        cfg = KmsaConfig(d=2, max_iters=0)
        model = fit(data, cfg)
        assert len(model.objective_trace) == 1
        assert np.allclose(model.alpha, 1.0 / 3.0)

    def test_embeddings_are_coefficient_kernel_products(self, rng):
        data = random_dataset(rng, m=2, n=10)
        model = fit(data, KmsaConfig(d=2, max_iters=3))
        for vs, Y in zip(model.states, model.embeddings):
            assert Y.shape == (2, 10)
            assert np.array_equal(Y, vs.U.T @ vs.K)

    def test_constraint_orthonormality_invariant(self, rng):
        data = random_dataset(rng, m=2, n=12)
        model = fit(data, KmsaConfig(d=3, max_iters=5))
        for vs in model.states:
            assert np.abs(vs.U.T @ vs.M @ vs.U - np.eye(3)).max() < 1e-6

    def test_alpha_on_simplex(self, rng):
        data = random_dataset(rng, m=3, n=15)
        model = fit(data, KmsaConfig(d=2, max_iters=5))
        assert model.alpha.sum() == pytest.approx(1.0, abs=1e-10)
        assert (model.alpha > 0).all()

    @pytest.mark.parametrize("recipe", ["pca", "lpp", "lda"])
    def test_monotone_descent_at_reported_defaults(self, recipe):
        rng = np.random.default_rng(7)
        for m, n, d in [(2, 10, 2), (3, 30, 5), (2, 30, 2), (3, 10, 2)]:
            data = random_dataset(rng, m=m, n=n)
            cfg = KmsaConfig(
                d=d, graph=GraphRecipe(kind=recipe, k=min(5, n - 1)), max_iters=10
            )
            model = fit(data, cfg)
            trace = model.objective_trace
            for prev, curr in zip(trace[:-1], trace[1:]):
                assert curr <= prev + 1e-8 * (1.0 + abs(prev))

    def test_determinism(self, rng):
        data = random_dataset(rng, m=2, n=10)
        cfg = KmsaConfig(d=2, max_iters=4)
        a = fit(data, cfg)
        b = fit(data, cfg)
        assert np.array_equal(a.alpha, b.alpha)
        assert a.objective_trace == b.objective_trace
        for ua, ub in zip(a.states, b.states):
            assert np.array_equal(ua.U, ub.U)


class TestTransform:
    def test_training_points_reproduce_embeddings(self, rng):
        data = random_dataset(rng, m=2, n=10)
        model = fit(data, KmsaConfig(d=2, max_iters=2))
        out = transform(model, data.views, data)
        for Y, Z in zip(model.embeddings, out):
            assert np.array_equal(Y, Z)

    def test_empty_input(self, rng):
        data = random_dataset(rng, m=2, n=10)
        model = fit(data, KmsaConfig(d=2, max_iters=1))
        out = transform(model, [v[:, :0] for v in data.views], data)
        for Z in out:
            assert Z.shape == (2, 0)

    def test_duplicated_training_sample(self, rng):
        data = random_dataset(rng, m=2, n=10)
        model = fit(data, KmsaConfig(d=2, max_iters=2))
        j = 4
        out = transform(model, [v[:, j : j + 1] for v in data.views], data)
        for Y, Z in zip(model.embeddings, out):
            assert np.abs(Z[:, 0] - Y[:, j]).max() < 1e-10

    def test_dimension_mismatches_raise(self, rng):
        data = random_dataset(rng, m=2, n=10)
        model = fit(data, KmsaConfig(d=2, max_iters=1))
        with pytest.raises(DimensionError):
            transform(model, [data.views[0]], data)
        bad = [np.vstack([v, v]) for v in data.views]
        with pytest.raises(DimensionError):
            transform(model, bad, data)

    def test_centered_model_roundtrip(self, rng):
        # centering re-derives the kernel columns through a different
        # association order, and coefficient norms scale like ridge^-1/2,
        # so the reproduction is close but not bitwise
        data = random_dataset(rng, m=2, n=12)
        cfg = KmsaConfig(d=2, max_iters=2, center_kernel=True)
        model = fit(data, cfg)
        out = transform(model, data.views, data)
        for Y, Z in zip(model.embeddings, out):
            assert np.abs(Y - Z).max() < 1e-9


def test_gram_divergence_properties(rng):
    U = rng.standard_normal((8, 3))
    V = rng.standard_normal((8, 3))
    assert gram_divergence(U, U) == pytest.approx(0.0, abs=1e-15)
    assert gram_divergence(U, V) == pytest.approx(gram_divergence(V, U), rel=1e-12)
    assert gram_divergence(U, V) >= 0
    assert gram_divergence(np.zeros((8, 3)), np.zeros((8, 3))) == 0.0
