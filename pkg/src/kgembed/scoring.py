"""Manifold functions, triple scores, and analytic gradients.

A golden fact (h, r, t) is modeled as lying on a relation-specific manifold:
M(h, r, t) equals the squared manifold size parameter.  The score of a triple
is its squared deviation from the manifold,

    f(h, t) = (M(h, r, t) - p_r^2)^2,

so smaller scores mean more plausible triples.  Two manifold families are
supported, each optionally kernelized:

  sphere      M = |h + r - t|^2, or its Hilbert-space form
              K(h,h) + K(t,t) + K(r,r) - 2K(h,t) - 2K(r,t) + 2K(r,h)
  hyperplane  M = (h + r_head) . (t + r_tail), the elementwise-absolute
              variant |h + r_head| . |t + r_tail|, or K(h+r_head, t+r_tail)

A baseline mode scores by the plain translation distance |h + r - t|^2
(TransE), ignoring the manifold parameter.
"""

from dataclasses import dataclass, field

import numpy as np

from .kernels import (
    LINEAR,
    KernelSpec,
    kernel_eval,
    kernel_eval_rows,
    kernel_grad,
    kernel_self_rows,
)

SPHERE = "sphere"
HYPERPLANE = "hyperplane"

PREDICT_HEAD = "head"
PREDICT_TAIL = "tail"


class ConfigurationError(ValueError):
    """An invalid manifold/kernel combination was requested."""


@dataclass(frozen=True)
class ManifoldSpec:
    kind: str
    kernel: KernelSpec = field(default_factory=KernelSpec.linear)
    absolute: bool = False

    def __post_init__(self):
        if self.kind not in (SPHERE, HYPERPLANE):
            raise ConfigurationError(f"unknown manifold kind: {self.kind!r}")
        if self.absolute and self.kind != HYPERPLANE:
            raise ConfigurationError("absolute variant applies to the hyperplane manifold only")
        if self.absolute and self.kernel.kind != LINEAR:
            raise ConfigurationError("absolute variant requires the linear kernel")


@dataclass
class EmbeddingModel:
    """Dense parameter tensors for one trained (or initialized) model.

    ``relations`` holds the single relation matrix used by the sphere
    manifold and the baseline; hyperplane models use ``relations_head`` and
    ``relations_tail`` instead.  ``manifold_param`` stores one unconstrained
    real per relation which enters every score as its square.
    """

    manifold: ManifoldSpec
    entities: np.ndarray
    relations: np.ndarray | None = None
    relations_head: np.ndarray | None = None
    relations_tail: np.ndarray | None = None
    manifold_param: np.ndarray | None = None
    baseline: bool = False

    def __post_init__(self):
        e, d = self.entities.shape
        if self.uses_split_relations:
            if self.relations_head is None or self.relations_tail is None:
                raise ValueError("hyperplane model needs relations_head and relations_tail")
            r = self.relations_head.shape[0]
            shapes = [self.relations_head.shape, self.relations_tail.shape]
        else:
            if self.relations is None:
                raise ValueError("sphere/baseline model needs a relations matrix")
            r = self.relations.shape[0]
            shapes = [self.relations.shape]
        for shape in shapes:
            if shape != (r, d):
                raise ValueError(f"relation matrix shape {shape} inconsistent with ({r}, {d})")
        if self.manifold_param is None:
            self.manifold_param = np.ones(r)
        if self.manifold_param.shape != (r,):
            raise ValueError(
                f"manifold_param shape {self.manifold_param.shape} != ({r},)"
            )
        for tensor in self.parameter_tensors():
            if not np.isfinite(tensor).all():
                raise ValueError("model parameters must be finite")

    @property
    def uses_split_relations(self) -> bool:
        return self.manifold.kind == HYPERPLANE and not self.baseline

    @property
    def num_entities(self) -> int:
        return self.entities.shape[0]

    @property
    def num_relations(self) -> int:
        return self.manifold_param.shape[0]

    @property
    def dim(self) -> int:
        return self.entities.shape[1]

    def parameter_tensors(self) -> list[np.ndarray]:
        """All parameter arrays in checkpoint order."""
        if self.uses_split_relations:
            mats = [self.entities, self.relations_head, self.relations_tail]
        else:
            mats = [self.entities, self.relations]
        if self.manifold_param is not None:
            mats.append(self.manifold_param)
        return mats


@dataclass
class GradientBundle:
    """Partial derivatives of one triple's score w.r.t. its parameters.

    ``relation`` is set for sphere/baseline models, ``relation_head`` and
    ``relation_tail`` for hyperplane models.  ``manifold_param`` is the
    scalar derivative w.r.t. the stored (unsquared) manifold parameter.
    """

    head: np.ndarray
    tail: np.ndarray
    relation: np.ndarray | None = None
    relation_head: np.ndarray | None = None
    relation_tail: np.ndarray | None = None
    manifold_param: float = 0.0


def manifold_sphere(h, r, t, kernel: KernelSpec) -> float:
    """Sphere manifold value in the kernel-induced Hilbert space.

    With the linear kernel this expands to |h + r - t|^2 exactly (up to
    floating round-off).
    """
    return (
        kernel_eval(kernel, h, h)
        + kernel_eval(kernel, t, t)
        + kernel_eval(kernel, r, r)
        - 2.0 * kernel_eval(kernel, h, t)
        - 2.0 * kernel_eval(kernel, r, t)
        + 2.0 * kernel_eval(kernel, r, h)
    )


def manifold_hyperplane(h, r_head, t, r_tail, kernel: KernelSpec, absolute: bool = False) -> float:
    """Hyperplane manifold value K(h + r_head, t + r_tail).

    The absolute variant |h+r_head| . |t+r_tail| admits sign-flipped
    solutions on each coordinate; it is defined for the linear kernel only.
    """
    if absolute and kernel.kind != LINEAR:
        raise ConfigurationError("absolute variant requires the linear kernel")
    u = np.asarray(h, dtype=np.float64) + np.asarray(r_head, dtype=np.float64)
    v = np.asarray(t, dtype=np.float64) + np.asarray(r_tail, dtype=np.float64)
    if absolute:
        return float(np.abs(u) @ np.abs(v))
    return kernel_eval(kernel, u, v)


def _translation_residual(model: EmbeddingModel, h: int, r: int, t: int) -> np.ndarray:
    return model.entities[h] + model.relations[r] - model.entities[t]


def manifold_value(model: EmbeddingModel, triple) -> float:
    """M(h, r, t) under the model's manifold and kernel."""
    h, r, t = triple
    if model.manifold.kind == SPHERE:
        return manifold_sphere(
            model.entities[h], model.relations[r], model.entities[t], model.manifold.kernel
        )
    return manifold_hyperplane(
        model.entities[h],
        model.relations_head[r],
        model.entities[t],
        model.relations_tail[r],
        model.manifold.kernel,
        model.manifold.absolute,
    )


def score(model: EmbeddingModel, triple) -> float:
    """Squared deviation of the triple from its relation's manifold.

    Baseline mode returns the plain translation distance |h + r - t|^2.
    Always nonnegative; smaller means more plausible.
    """
    h, r, t = triple
    if model.baseline:
        u = _translation_residual(model, h, r, t)
        return float(u @ u)
    m = manifold_value(model, triple)
    residual = m - model.manifold_param[r] ** 2
    return residual * residual


def score_gradients(model: EmbeddingModel, triple) -> GradientBundle:
    """Analytic gradients of score() w.r.t. every participating parameter.

    Chain rule through f = (M - p^2)^2: each vector gradient is
    2(M - p^2) dM/dx, and d f/d p = -4 p (M - p^2).  The absolute hyperplane
    variant uses the subgradient convention sign(0) = 0.
    """
    h, r, t = triple
    if model.baseline:
        u = _translation_residual(model, h, r, t)
        return GradientBundle(head=2.0 * u, tail=-2.0 * u, relation=2.0 * u)

    kernel = model.manifold.kernel
    if model.manifold.kind == SPHERE:
        eh = model.entities[h]
        er = model.relations[r]
        et = model.entities[t]
        m = manifold_sphere(eh, er, et, kernel)
        # dK(a,b)/db == kernel_grad(b, a) by symmetry of K
        dm_dh = 2.0 * kernel_grad(kernel, eh, eh) - 2.0 * kernel_grad(kernel, eh, et) \
            + 2.0 * kernel_grad(kernel, eh, er)
        dm_dt = 2.0 * kernel_grad(kernel, et, et) - 2.0 * kernel_grad(kernel, et, eh) \
            - 2.0 * kernel_grad(kernel, et, er)
        dm_dr = 2.0 * kernel_grad(kernel, er, er) - 2.0 * kernel_grad(kernel, er, et) \
            + 2.0 * kernel_grad(kernel, er, eh)
    else:
        u = model.entities[h] + model.relations_head[r]
        v = model.entities[t] + model.relations_tail[r]
        if model.manifold.absolute:
            m = float(np.abs(u) @ np.abs(v))
            dm_dh = np.sign(u) * np.abs(v)
            dm_dt = np.abs(u) * np.sign(v)
        else:
            m = kernel_eval(kernel, u, v)
            dm_dh = kernel_grad(kernel, u, v)
            dm_dt = kernel_grad(kernel, v, u)

    p = model.manifold_param[r]
    chain = 2.0 * (m - p * p)
    if model.manifold.kind == SPHERE:
        return GradientBundle(
            head=chain * dm_dh,
            tail=chain * dm_dt,
            relation=chain * dm_dr,
            manifold_param=-2.0 * p * chain,
        )
    return GradientBundle(
        head=chain * dm_dh,
        tail=chain * dm_dt,
        relation_head=chain * dm_dh,
        relation_tail=chain * dm_dt,
        manifold_param=-2.0 * p * chain,
    )


class CandidateScorer:
    """Scores one query against every entity as the candidate head or tail.

    Produces the same values as score() on each corrupted triple (up to
    floating reassociation), one full entity sweep per call.  Row-norm
    caches are computed once at construction, so build a fresh scorer if the
    model parameters change.
    """

    def __init__(self, model: EmbeddingModel):
        self.model = model
        self._ent_sq = np.einsum("ij,ij->i", model.entities, model.entities)

    def scores(self, triple, direction: str) -> np.ndarray:
        if direction not in (PREDICT_HEAD, PREDICT_TAIL):
            raise ValueError(f"direction must be 'head' or 'tail', got {direction!r}")
        model = self.model
        h, r, t = triple
        if model.baseline or (model.manifold.kind == SPHERE and model.manifold.kernel.kind == LINEAR):
            m = self._sphere_linear(h, r, t, direction)
        elif model.manifold.kind == SPHERE:
            m = self._sphere_kernel(h, r, t, direction)
        else:
            m = self._hyperplane(h, r, t, direction)
        if model.baseline:
            return m
        residual = m - model.manifold_param[r] ** 2
        return residual * residual

    def _sphere_linear(self, h, r, t, direction):
        ent = self.model.entities
        if direction == PREDICT_TAIL:
            c = ent[h] + self.model.relations[r]       # |c - e|^2 over all e
        else:
            c = ent[t] - self.model.relations[r]       # |e - c|^2 over all e
        return self._ent_sq - 2.0 * (ent @ c) + c @ c

    def _sphere_kernel(self, h, r, t, direction):
        model = self.model
        kernel = model.manifold.kernel
        ent = model.entities
        er = model.relations[r]
        k_self = kernel_self_rows(kernel, ent)
        k_rel = kernel_eval_rows(kernel, ent, er)      # K(e, r) for every entity
        if direction == PREDICT_TAIL:
            eh = ent[h]
            fixed = kernel_eval(kernel, eh, eh) + kernel_eval(kernel, er, er) \
                + 2.0 * kernel_eval(kernel, er, eh)
            return fixed + k_self - 2.0 * kernel_eval_rows(kernel, ent, eh) - 2.0 * k_rel
        et = ent[t]
        fixed = kernel_eval(kernel, et, et) + kernel_eval(kernel, er, er) \
            - 2.0 * kernel_eval(kernel, er, et)
        return fixed + k_self - 2.0 * kernel_eval_rows(kernel, ent, et) + 2.0 * k_rel

    def _hyperplane(self, h, r, t, direction):
        model = self.model
        kernel = model.manifold.kernel
        ent = model.entities
        rh = model.relations_head[r]
        rt = model.relations_tail[r]
        if direction == PREDICT_TAIL:
            u = ent[h] + rh
            if model.manifold.absolute:
                return np.abs(ent + rt) @ np.abs(u)
            if kernel.kind == LINEAR:
                return ent @ u + rt @ u
            return kernel_eval_rows(kernel, ent + rt, u)
        v = ent[t] + rt
        if model.manifold.absolute:
            return np.abs(ent + rh) @ np.abs(v)
        if kernel.kind == LINEAR:
            return ent @ v + rh @ v
        return kernel_eval_rows(kernel, ent + rh, v)
