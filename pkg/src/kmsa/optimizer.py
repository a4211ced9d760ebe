"""Alternating minimization: per-view coefficient updates by generalized
eigendecomposition, closed-form view weights, objective tracing.

Objective convention. The recorded objective is

    G = sum_v alpha_v^r tr(U_v^T K_v P_v K_v U_v) + kappa * sum_v alpha_v^r
      + sum_{v<w} ((alpha_v^r + alpha_w^r) / (2 eta)) * ||U_w^T U_v||_F^2

Each unordered view pair contributes once, and the pair term is the squared
Frobenius norm of the cross-Gram U_w^T U_v; since eta < 0, lowering G aligns
the coefficient subspaces of every pair. Under this convention the per-view
eigenproblem below is the exact minimizer of G restricted to one U_v, which
is what makes the trace monotone under the sweep.

The weight update assumes positive per-view trace terms; non-positive ones
are clamped to a tiny floor and the event is recorded in the model log
(failing hard would make hyperparameter sweeps brittle).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .eigsolver import generalized_eigh
from .errors import DimensionError, NonMonotoneWarning, NumericError, WeightDomainWarning
from .graphs import build_graph, constraint_matrix, laplacian
from .kernels import build_kernel, cross_kernel, resolve_kernel_spec
from .types import KmsaConfig, KmsaModel, MultiviewDataset, ViewState, validate_config

MONOTONE_SLACK = 1e-8
TRACE_FLOOR = 1e-12


@dataclass
class OptState:
    """Mutable optimizer state: per-view matrices, simplex weights, sweep
    counter, and the recorded objective values."""

    states: list
    alpha: np.ndarray
    iter: int
    objective_trace: list


def _kpk(state: ViewState) -> np.ndarray:
    H = state.K @ state.P @ state.K
    return 0.5 * (H + H.T)


def objective_terms(state: OptState, cfg: KmsaConfig) -> dict:
    """The three objective components, computed independently."""
    a_r = state.alpha ** cfg.r
    embed = 0.0
    for v, vs in enumerate(state.states):
        embed += a_r[v] * float(np.sum(vs.U * (_kpk(vs) @ vs.U)))
    regularizer = cfg.kappa * float(np.sum(a_r))
    align = 0.0
    m = len(state.states)
    for v in range(m):
        for w in range(v + 1, m):
            cross = state.states[w].U.T @ state.states[v].U
            align += (a_r[v] + a_r[w]) / (2.0 * cfg.eta) * float(np.sum(cross * cross))
    return {"embedding": embed, "weight_regularizer": regularizer, "alignment": align}


def objective(state: OptState, cfg: KmsaConfig) -> float:
    terms = objective_terms(state, cfg)
    return terms["embedding"] + terms["weight_regularizer"] + terms["alignment"]


def gram_divergence(U_i: np.ndarray, U_j: np.ndarray) -> float:
    """Diagnostic divergence between two coefficient Grams, each normalized by
    its squared Frobenius norm. Zero Grams are treated as already normalized."""

    def normalized(U):
        L = U.T @ U
        nsq = float(np.sum(L * L))
        return L / nsq if nsq > 0 else L

    diff = normalized(U_i) - normalized(U_j)
    return float(np.sum(diff * diff))


def build_h(state: OptState, v: int, cfg: KmsaConfig) -> np.ndarray:
    """Quadratic form for view v's update: K P K plus the weighted sum of the
    other views' coefficient outer products, symmetrized."""
    alpha = state.alpha
    if alpha[v] <= 0.0:
        raise NumericError(f"view weight alpha[{v}] underflowed to {alpha[v]}")
    H = _kpk(state.states[v])
    for w, vs in enumerate(state.states):
        if w == v:
            continue
        coeff = (1.0 + (alpha[w] / alpha[v]) ** cfg.r) / (2.0 * cfg.eta)
        H = H + coeff * (vs.U @ vs.U.T)
    return 0.5 * (H + H.T)


def update_view(state: OptState, v: int, cfg: KmsaConfig) -> np.ndarray:
    """New coefficient matrix for view v: the d smallest generalized
    eigenvectors of (H_v, M_v)."""
    _, U = generalized_eigh(build_h(state, v, cfg), state.states[v].M, cfg.d)
    return U


def view_trace_terms(state: OptState, cfg: KmsaConfig) -> np.ndarray:
    """Per-view weight-update traces tr(U_v^T J_v U_v) with
    J_v = K P K + (r kappa / N) I + sum_{w != v} (1/(2 eta)) U_w U_w^T."""
    m = len(state.states)
    n = state.states[0].K.shape[0]
    traces = np.empty(m)
    for v, vs in enumerate(state.states):
        J = _kpk(vs) + (cfg.r * cfg.kappa / n) * np.eye(n)
        for w, other in enumerate(state.states):
            if w == v:
                continue
            J = J + (1.0 / (2.0 * cfg.eta)) * (other.U @ other.U.T)
        traces[v] = float(np.sum(vs.U * (J @ vs.U)))
    return traces


def closed_form_weights(traces: np.ndarray, r: float):
    """Simplex weights alpha_v proportional to (1/trace_v)^(1/(r-1)).

    Computed in ratio form (min positive trace over each trace) so a common
    positive scaling of the traces leaves the result unchanged and large
    1/(r-1) exponents cannot overflow. Non-positive traces are clamped to
    1e-12 * max |trace|; returns (alpha, clamped_mask).
    """
    traces = np.asarray(traces, dtype=float).copy()
    m = len(traces)
    scale = float(np.max(np.abs(traces)))
    clamped = traces <= 0.0
    if scale == 0.0:
        return np.full(m, 1.0 / m), clamped
    traces[clamped] = TRACE_FLOOR * scale
    base = traces.min()
    raw = (base / traces) ** (1.0 / (r - 1.0))
    return raw / raw.sum(), clamped


def update_weights(state: OptState, cfg: KmsaConfig) -> np.ndarray:
    """Closed-form view weights from the current coefficient matrices. Emits
    WeightDomainWarning when any trace term had to be clamped."""
    alpha, clamped = closed_form_weights(view_trace_terms(state, cfg), cfg.r)
    if clamped.any():
        warnings.warn(
            f"clamped non-positive trace terms for views {np.nonzero(clamped)[0].tolist()}",
            WeightDomainWarning,
            stacklevel=2,
        )
    return alpha


def _prepare_views(data: MultiviewDataset, cfg: KmsaConfig):
    """Kernels, graph quadratics, and ridged constraints for every view."""
    m = data.n_views
    specs = [
        resolve_kernel_spec(X, spec)
        for X, spec in zip(data.views, cfg.kernels_for(m))
    ]
    states = []
    notes = []
    for X, spec, recipe in zip(data.views, specs, cfg.graphs_for(m)):
        K = build_kernel(X, spec, center=cfg.center_kernel)
        pair = build_graph(X, data.labels, recipe)
        notes.extend(pair.notes)
        P = laplacian(pair.S)
        M = constraint_matrix(K, pair, cfg.ridge)
        states.append(ViewState(K=K, P=P, M=M, U=np.zeros((K.shape[0], cfg.d))))
    return states, tuple(specs), notes


def fit(
    data: MultiviewDataset, cfg: KmsaConfig, learn_weights: bool = True
) -> KmsaModel:
    """Alternating optimization over coefficient matrices and view weights.

    Initializes each U_v from its co-regularizer-free eigenproblem and alpha
    uniformly, then sweeps views in order (each update sees the freshest
    neighbors), refreshes the weights, and records the objective once per
    sweep. Stops when the relative objective change drops to cfg.tol or after
    cfg.max_iters sweeps. learn_weights=False keeps alpha fixed at 1/m, which
    is the ablation baseline.
    """
    validate_config(cfg, data)
    states, specs, log = _prepare_views(data, cfg)
    m = data.n_views

    for v, vs in enumerate(states):
        _, U = generalized_eigh(_kpk(vs), vs.M, cfg.d)
        states[v] = replace(vs, U=U)

    state = OptState(
        states=states,
        alpha=np.full(m, 1.0 / m),
        iter=0,
        objective_trace=[],
    )
    state.objective_trace.append(objective(state, cfg))

    warned_clamp = False
    for sweep in range(1, cfg.max_iters + 1):
        state.iter = sweep
        for v in range(m):
            state.states[v] = replace(state.states[v], U=update_view(state, v, cfg))
        if learn_weights:
            traces = view_trace_terms(state, cfg)
            alpha, clamped = closed_form_weights(traces, cfg.r)
            if clamped.any():
                views = np.nonzero(clamped)[0].tolist()
                log.append(f"sweep {sweep}: clamped non-positive traces for views {views}")
                if not warned_clamp:
                    warned_clamp = True
                    warnings.warn(
                        f"sweep {sweep}: clamped non-positive trace terms for views "
                        f"{views} (weights of clamped views coincide)",
                        WeightDomainWarning,
                        stacklevel=2,
                    )
            state.alpha = alpha

        prev = state.objective_trace[-1]
        value = objective(state, cfg)
        state.objective_trace.append(value)
        if value > prev + MONOTONE_SLACK * (1.0 + abs(prev)):
            log.append(f"sweep {sweep}: objective rose from {prev!r} to {value!r}")
            warnings.warn(
                f"sweep {sweep}: objective increased beyond slack "
                f"({prev:.6e} -> {value:.6e})",
                NonMonotoneWarning,
                stacklevel=2,
            )
        if abs(value - prev) <= cfg.tol * (1.0 + abs(prev)):
            break

    embeddings = tuple(vs.U.T @ vs.K for vs in state.states)
    return KmsaModel(
        states=tuple(state.states),
        alpha=state.alpha,
        objective_trace=tuple(state.objective_trace),
        embeddings=embeddings,
        config=cfg,
        kernels=specs,
        log=tuple(log),
    )


def transform(model: KmsaModel, new_views, data: MultiviewDataset):
    """Embed out-of-sample points: per view, U^T k_new with kernel columns of
    the new points against the training samples, under the model's resolved
    kernel spec and centering convention. Training columns reproduce the
    stored embeddings."""
    m = len(model.states)
    if len(new_views) != m:
        raise DimensionError(f"expected {m} views, got {len(new_views)}")
    if data.n_views != m:
        raise DimensionError(f"training dataset has {data.n_views} views, model has {m}")
    out = []
    for v in range(m):
        X_train = data.views[v]
        X_new = np.asarray(new_views[v], dtype=float)
        if X_new.ndim != 2 or X_new.shape[0] != X_train.shape[0]:
            raise DimensionError(
                f"view {v}: new points have {X_new.shape[0] if X_new.ndim == 2 else 'bad'}"
                f" features, training data has {X_train.shape[0]}"
            )
        if X_train.shape[1] != model.states[v].K.shape[0]:
            raise DimensionError(
                f"view {v}: training dataset has {X_train.shape[1]} samples, "
                f"model was fitted on {model.states[v].K.shape[0]}"
            )
        cols = cross_kernel(
            X_train, X_new, model.kernels[v], center=model.config.center_kernel
        )
        out.append(model.states[v].U.T @ cols)
    return out
