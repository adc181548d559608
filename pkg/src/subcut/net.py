"""
Generalized GMI layers and the subadditive network f_theta built from them

A layer with weights (W, v) maps y to

    phi(y) = min({Wy}/{v}, (1 - {Wy})/(1 - {v})) + max(-W/{v}, W/(1 - {v})) y

and its upper directional derivative at zero (used on continuous columns) is

    phi_bar(y) = max(Wy/{v}, -Wy/(1 - {v})) + max(-W/{v}, W/(1 - {v})) y

The net stacks lifted layers y -> [y, phi(y)], so its output keeps the
original rows on top and appends each layer's cuts below them.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, InstanceFormatError, LogDomainError, LpError
from .formats import (
    FORMAT_VERSION,
    check_format_version,
    decode_triplets,
    decode_vector,
    encode_triplets,
    read_json,
    require_keys,
    write_json,
)
from .milp import MilpInstance
from .simplex import DEFAULT_FRAC_TOL, LpProblem, LpSolution, extract_fractional_rows, solve
from .types import Variant

logger = logging.getLogger(__name__)

EPS_V = 1e-6
DUMMY_V = 0.5
LOG_DOMAIN_MARGIN = 1e-12


def clamp_fraction(v: np.ndarray) -> np.ndarray:
    """Fractional part of v clipped to [EPS_V, 1 - EPS_V]"""
    v = np.asarray(v, dtype=float)
    return np.clip(v - np.floor(v), EPS_V, 1.0 - EPS_V)


@dataclass(frozen=True, eq=False)
class GmiLayer:
    W: np.ndarray
    v: np.ndarray
    variant: Variant = Variant.GMI

    def __post_init__(self):
        W = np.array(self.W, dtype=float, ndmin=2)
        v = np.array(self.v, dtype=float).reshape(-1)
        if W.shape[0] < 1:
            raise DimensionError("Layer width must be at least 1")
        if v.size != W.shape[0]:
            raise DimensionError(f"v has {v.size} entries, W has {W.shape[0]} rows")
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(v))):
            raise ValueError("Layer weights must be finite")
        v = np.floor(v) + clamp_fraction(v)
        W.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "variant", Variant(self.variant))

    @classmethod
    def dummy(cls, width: int, indim: int, variant: Variant = Variant.GMI) -> "GmiLayer":
        """Rows (W = 0, v = 1/2): the inert inequality 0 >= 0"""
        return cls(W=np.zeros((width, indim)), v=np.full(width, DUMMY_V), variant=variant)

    @property
    def width(self) -> int:
        return self.W.shape[0]

    @property
    def indim(self) -> int:
        return self.W.shape[1]

    def __eq__(self, other):
        if not isinstance(other, GmiLayer):
            return NotImplemented
        return (
            self.variant == other.variant
            and np.array_equal(self.W, other.W)
            and np.array_equal(self.v, other.v)
        )


@dataclass(frozen=True)
class LayerGradient:
    dW: np.ndarray
    dv: np.ndarray


@dataclass(frozen=True)
class GradientSet:
    layers: Tuple[LayerGradient, ...] = ()

    def __len__(self):
        return len(self.layers)

    def flatten(self) -> np.ndarray:
        if not self.layers:
            return np.zeros(0)
        return np.concatenate([np.concatenate([g.dW.ravel(), g.dv]) for g in self.layers])

    def norm(self) -> float:
        return float(np.linalg.norm(self.flatten()))


@dataclass(frozen=True, eq=False)
class SubadditiveNet:
    input_dim: int
    layers: Tuple[GmiLayer, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.input_dim < 1:
            raise DimensionError("input_dim must be at least 1")
        dim = self.input_dim
        for index, layer in enumerate(self.layers):
            if layer.indim != dim:
                raise DimensionError(
                    f"Layer {index} expects {layer.indim} inputs, chain gives {dim}"
                )
            dim += layer.width

    @property
    def output_dim(self) -> int:
        return self.input_dim + sum(layer.width for layer in self.layers)

    @property
    def widths(self) -> List[int]:
        return [layer.width for layer in self.layers]

    @property
    def variant(self) -> Variant:
        return self.layers[0].variant if self.layers else Variant.GMI

    @property
    def num_parameters(self) -> int:
        return sum(layer.W.size + layer.v.size for layer in self.layers)

    def with_layer(self, layer: GmiLayer) -> "SubadditiveNet":
        return SubadditiveNet(self.input_dim, self.layers + (layer,))

    def step(self, grads: GradientSet, alpha: float) -> "SubadditiveNet":
        """theta - alpha * grads, as a new net"""
        if len(grads) != len(self.layers):
            raise DimensionError(f"{len(grads)} gradients for {len(self.layers)} layers")
        layers = tuple(
            GmiLayer(layer.W - alpha * g.dW, layer.v - alpha * g.dv, layer.variant)
            for layer, g in zip(self.layers, grads.layers)
        )
        return SubadditiveNet(self.input_dim, layers)

    def evaluate(self, Y: np.ndarray) -> np.ndarray:
        """f_theta applied column-wise (a vector is treated as one column)"""
        return self._run(Y, layer_phi)

    def evaluate_bar(self, Y: np.ndarray) -> np.ndarray:
        """The upper directional derivative at zero of f_theta, column-wise"""
        return self._run(Y, layer_phi_bar)

    def _run(self, Y, fn) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        vector = Y.ndim == 1
        X = _as_columns(Y, self.input_dim)
        for layer in self.layers:
            X = np.vstack([X, fn(layer, X)])
        return X[:, 0] if vector else X

    def __eq__(self, other):
        if not isinstance(other, SubadditiveNet):
            return NotImplemented
        return self.input_dim == other.input_dim and self.layers == other.layers


@dataclass
class _LayerTrace:
    """Per-layer reverse-mode bookkeeping for one evaluation path"""

    Y: np.ndarray
    f: np.ndarray
    P: np.ndarray
    slope_mask: np.ndarray
    kink: np.ndarray  # g (integer path) or Wy (continuous path)
    branch_mask: np.ndarray
    phi: Optional[np.ndarray] = None  # pre-log values, log variant only


@dataclass
class ForwardCache:
    integer_count: int
    integer_path: List[_LayerTrace] = field(default_factory=list)
    continuous_path: List[_LayerTrace] = field(default_factory=list)


def _as_columns(Y: np.ndarray, indim: int) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2 or Y.shape[0] != indim:
        raise DimensionError(f"Expected {indim} rows, got shape {Y.shape}")
    return Y


def _slopes(layer: GmiLayer, f: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """max(-W/{v}, W/(1-{v})) entrywise, with the mask of the first branch"""
    negative = -layer.W / f[:, None]
    positive = layer.W / (1.0 - f)[:, None]
    mask = negative >= positive
    return np.where(mask, negative, positive), mask


def _phi_trace(layer: GmiLayer, Y: np.ndarray) -> Tuple[np.ndarray, _LayerTrace]:
    f = clamp_fraction(layer.v)
    a = layer.W @ Y
    g = a - np.floor(a)
    left = g / f[:, None]
    right = (1.0 - g) / (1.0 - f)[:, None]
    branch = left <= right
    P, slope_mask = _slopes(layer, f)
    phi = np.where(branch, left, right) + P @ Y
    trace = _LayerTrace(Y=Y, f=f, P=P, slope_mask=slope_mask, kink=g, branch_mask=branch)

    if layer.variant == Variant.LOG:
        if np.any(phi <= -1.0 + LOG_DOMAIN_MARGIN):
            raise LogDomainError(f"log(1 + phi) undefined: min phi = {phi.min():.6g}")
        trace.phi = phi
        return np.log1p(phi), trace
    return phi, trace


def _phi_bar_trace(layer: GmiLayer, Y: np.ndarray) -> Tuple[np.ndarray, _LayerTrace]:
    # log(1 + t) has unit slope at 0, so both variants share this function
    f = clamp_fraction(layer.v)
    a = layer.W @ Y
    left = a / f[:, None]
    right = -a / (1.0 - f)[:, None]
    branch = left >= right
    P, slope_mask = _slopes(layer, f)
    value = np.where(branch, left, right) + P @ Y
    return value, _LayerTrace(Y=Y, f=f, P=P, slope_mask=slope_mask, kink=a, branch_mask=branch)


def layer_phi(layer: GmiLayer, Y: np.ndarray) -> np.ndarray:
    """
    The layer's cut-generating function, column-wise.

    Raises:
        LogDomainError: log variant with some phi <= -1
    """
    return _phi_trace(layer, _as_columns(Y, layer.indim))[0]


def layer_phi_bar(layer: GmiLayer, Y: np.ndarray) -> np.ndarray:
    return _phi_bar_trace(layer, _as_columns(Y, layer.indim))[0]


def net_forward(
    net: SubadditiveNet, A: np.ndarray, G: np.ndarray, b: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, ForwardCache]:
    """
    Lift (A, G, b) through every layer.

    Columns of A and b go through phi, columns of G through phi_bar. The first
    input_dim rows of each output are the inputs verbatim.

    Returns:
        (FA, FG, fb, cache)
    """
    A = np.asarray(A, dtype=float)
    G = np.asarray(G, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    m = net.input_dim
    if A.ndim != 2 or A.shape[0] != m:
        raise DimensionError(f"A has shape {A.shape}, net expects {m} rows")
    if G.ndim != 2 or G.shape[0] != m:
        raise DimensionError(f"G has shape {G.shape}, net expects {m} rows")
    if b.size != m:
        raise DimensionError(f"b has {b.size} entries, net expects {m}")

    k = A.shape[1]
    cache = ForwardCache(integer_count=k)
    X = np.hstack([A, b[:, None]])
    Z = G.copy()
    for layer in net.layers:
        phi, trace = _phi_trace(layer, X)
        cache.integer_path.append(trace)
        X = np.vstack([X, phi])

        phi_bar, trace = _phi_bar_trace(layer, Z)
        cache.continuous_path.append(trace)
        Z = np.vstack([Z, phi_bar])

    return X[:, :k], Z, X[:, k], cache


def cutoff_loss(
    net: SubadditiveNet, instance: MilpInstance, xbar: np.ndarray, zbar: np.ndarray
) -> Tuple[float, np.ndarray, ForwardCache]:
    """
    Mean signed slack of every row of the enlarged system at (xbar, zbar).

    violation[i] < 0 means row i cuts the point off.
    """
    xbar = np.asarray(xbar, dtype=float).reshape(-1)
    zbar = np.asarray(zbar, dtype=float).reshape(-1)
    FA, FG, fb, cache = net_forward(net, instance.A, instance.G, instance.b)
    violation = FA @ xbar + FG @ zbar - fb
    return float(violation.mean()), violation, cache


def loss_gradients(
    net: SubadditiveNet,
    instance: MilpInstance,
    xbar: np.ndarray,
    zbar: np.ndarray,
    cache: ForwardCache,
) -> GradientSet:
    """
    Gradient of cutoff_loss with respect to every (W, v), by reverse accumulation.

    Kinks use the branches recorded in cache; the fractional part has slope 1.
    """
    if not net.layers:
        return GradientSet()
    xbar = np.asarray(xbar, dtype=float).reshape(-1)
    zbar = np.asarray(zbar, dtype=float).reshape(-1)
    p = net.output_dim

    # the loss is linear in the outputs, so each column's seed is a constant row vector
    U_int = np.outer(np.full(p, 1.0 / p), np.concatenate([xbar, [-1.0]]))
    U_cont = np.outer(np.full(p, 1.0 / p), zbar)

    dW = [np.zeros_like(layer.W) for layer in net.layers]
    dv = [np.zeros_like(layer.v) for layer in net.layers]
    for index in reversed(range(len(net.layers))):
        layer = net.layers[index]
        top, width = layer.indim, layer.width

        gW, gv, dY = _phi_backward(layer, cache.integer_path[index], U_int[top : top + width])
        dW[index] += gW
        dv[index] += gv
        U_int = U_int[:top] + dY

        gW, gv, dY = _phi_bar_backward(
            layer, cache.continuous_path[index], U_cont[top : top + width]
        )
        dW[index] += gW
        dv[index] += gv
        U_cont = U_cont[:top] + dY

    return GradientSet(tuple(LayerGradient(w, v) for w, v in zip(dW, dv)))


def _slope_backward(
    layer: GmiLayer, trace: _LayerTrace, U: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    f = trace.f
    dP = U @ trace.Y.T
    dW = dP * np.where(trace.slope_mask, -1.0 / f[:, None], 1.0 / (1.0 - f)[:, None])
    dP_df = np.where(
        trace.slope_mask, layer.W / (f**2)[:, None], layer.W / ((1.0 - f) ** 2)[:, None]
    )
    df = np.sum(dP * dP_df, axis=1)
    return dW, df, trace.P.T @ U


def _phi_backward(layer: GmiLayer, trace: _LayerTrace, U: np.ndarray):
    if trace.phi is not None:
        U = U / (1.0 + trace.phi)
    f, g = trace.f, trace.kink
    d_kink = np.where(trace.branch_mask, 1.0 / f[:, None], -1.0 / (1.0 - f)[:, None])
    d_frac = np.where(
        trace.branch_mask, -g / (f**2)[:, None], (1.0 - g) / ((1.0 - f) ** 2)[:, None]
    )
    Ua = U * d_kink
    dW, df, dY = _slope_backward(layer, trace, U)
    dW = dW + Ua @ trace.Y.T
    df = df + np.sum(U * d_frac, axis=1)
    dY = dY + layer.W.T @ Ua
    return dW, df, dY


def _phi_bar_backward(layer: GmiLayer, trace: _LayerTrace, U: np.ndarray):
    f, a = trace.f, trace.kink
    d_kink = np.where(trace.branch_mask, 1.0 / f[:, None], -1.0 / (1.0 - f)[:, None])
    d_frac = np.where(trace.branch_mask, -a / (f**2)[:, None], -a / ((1.0 - f) ** 2)[:, None])
    Ua = U * d_kink
    dW, df, dY = _slope_backward(layer, trace, U)
    dW = dW + Ua @ trace.Y.T
    df = df + np.sum(U * d_frac, axis=1)
    dY = dY + layer.W.T @ Ua
    return dW, df, dY


def enlarged_lp(net: SubadditiveNet, instance: MilpInstance) -> LpProblem:
    """min c.x + h.z  s.t.  f(A) x + f_bar(G) z >= f(b)"""
    if net.input_dim != instance.m:
        raise DimensionError(f"Net input_dim {net.input_dim} != instance rows {instance.m}")
    FA, FG, fb, _ = net_forward(net, instance.A, instance.G, instance.b)
    return LpProblem(M=np.hstack([FA, FG]), q=fb, d=np.concatenate([instance.c, instance.h]))


def _ranked_gmi_layer(
    rows, instance: MilpInstance, net: SubadditiveNet, sol: LpSolution, width: Optional[int]
) -> GmiLayer:
    indim = net.output_dim
    if not rows:
        return GmiLayer.dummy(width or 1, indim)

    candidates = GmiLayer(
        W=np.vstack([row.W_row for row in rows]), v=np.array([row.v for row in rows])
    )
    FA, FG, fb, _ = net_forward(net, instance.A, instance.G, instance.b)
    cut_A = layer_phi(candidates, FA)
    cut_G = layer_phi_bar(candidates, FG)
    cut_b = layer_phi(candidates, fb)[:, 0]

    x_star, z_star = sol.primal[: instance.k], sol.primal[instance.k :]
    violation = cut_b - cut_A @ x_star - cut_G @ z_star
    norms = np.linalg.norm(np.hstack([cut_A, cut_G]), axis=1)
    score = violation / np.maximum(1.0, norms)
    order = np.argsort(-score, kind="stable")

    keep = order if width is None else order[:width]
    W = candidates.W[keep]
    v = candidates.v[keep]
    if width is not None and keep.size < width:
        pad = width - keep.size
        W = np.vstack([W, np.zeros((pad, indim))])
        v = np.concatenate([v, np.full(pad, DUMMY_V)])
    return GmiLayer(W=W, v=v)


def classical_gmi_rounds(
    instance: MilpInstance,
    widths: Sequence[Optional[int]],
    frac_tol: float = DEFAULT_FRAC_TOL,
    solver: Callable[..., LpSolution] = solve,
) -> Tuple[SubadditiveNet, List[float]]:
    """
    Classical GMI separation as a sequence of layers W_k = B_k^-1, v_k = B_k^-1 b_k.

    Each round solves the current enlarged LP, keeps the width_k most violated
    fractional-row cuts (None keeps all) and pads with dummy rows.

    Returns:
        (net, bounds) where bounds[0] is the plain LP bound and bounds[k] the
        bound after k rounds
    """
    net = SubadditiveNet(instance.m)
    bounds: List[float] = []
    for round_index, width in enumerate(widths):
        sol = solver(enlarged_lp(net, instance))
        if not sol.is_optimal:
            raise LpError(f"GMI round {round_index + 1}: LP is {sol.status.value}")
        bounds.append(sol.objective)

        rows = extract_fractional_rows(sol, frac_tol, integer_count=instance.k)
        logger.info(
            "GMI round %d: bound %.10g, %d fractional rows",
            round_index + 1,
            sol.objective,
            len(rows),
        )
        net = net.with_layer(_ranked_gmi_layer(rows, instance, net, sol, width))

    sol = solver(enlarged_lp(net, instance))
    if not sol.is_optimal:
        raise LpError(f"Final GMI LP is {sol.status.value}")
    bounds.append(sol.objective)
    return net, bounds


def gmi_warm_start(
    instance: MilpInstance,
    widths: Sequence[Optional[int]],
    frac_tol: float = DEFAULT_FRAC_TOL,
    solver: Callable[..., LpSolution] = solve,
    variant: Variant = Variant.GMI,
) -> SubadditiveNet:
    """Net holding the classical GMI weights theta_GMI for the given round widths"""
    if not widths:
        raise ValueError("widths must be nonempty")
    net, _ = classical_gmi_rounds(instance, widths, frac_tol, solver)
    if variant == Variant.GMI:
        return net
    return SubadditiveNet(
        net.input_dim, tuple(GmiLayer(layer.W, layer.v, variant) for layer in net.layers)
    )


def random_orthogonal_init(
    m: int, widths: Sequence[int], seed: int, variant: Variant = Variant.GMI
) -> SubadditiveNet:
    """
    Rows of each W are random orthonormal vectors (in blocks of indim rows), v ~ N(0, I).
    """
    if not widths:
        raise ValueError("widths must be nonempty")
    rng = np.random.default_rng(seed)
    layers = []
    indim = m
    for width in widths:
        gaussian = rng.standard_normal((width, indim))
        W = np.empty((width, indim))
        for start in range(0, width, indim):
            block = gaussian[start : start + indim]
            Q, R = np.linalg.qr(block.T)
            signs = np.where(np.diag(R) >= 0, 1.0, -1.0)
            W[start : start + block.shape[0]] = (Q * signs).T
        v = rng.standard_normal(width)
        layers.append(GmiLayer(W=W, v=v, variant=variant))
        indim += width
    return SubadditiveNet(m, tuple(layers))


def save_checkpoint(net: SubadditiveNet, path: Path) -> None:
    data = {
        "format_version": FORMAT_VERSION,
        "input_dim": net.input_dim,
        "variant": net.variant.value,
        "layers": [
            {"W": encode_triplets(layer.W), "v": [float(x) for x in layer.v]}
            for layer in net.layers
        ],
    }
    write_json(data, Path(path))


def load_checkpoint(path: Path) -> SubadditiveNet:
    data = read_json(Path(path))
    require_keys(data, ["input_dim", "variant", "layers"])
    check_format_version(data.get("format_version"))

    input_dim = data["input_dim"]
    if not isinstance(input_dim, int) or isinstance(input_dim, bool) or input_dim < 1:
        raise InstanceFormatError("'input_dim' must be a positive integer", "input_dim")
    try:
        variant = Variant(data["variant"])
    except ValueError as e:
        raise InstanceFormatError(f"Unknown variant {data['variant']!r}", "variant") from e
    if not isinstance(data["layers"], list):
        raise InstanceFormatError("'layers' must be an array", "layers")

    layers = []
    indim = input_dim
    for index, entry in enumerate(data["layers"]):
        if not isinstance(entry, dict):
            raise InstanceFormatError(f"layer {index} must be an object", "layers")
        require_keys(entry, ["W", "v"])
        v_raw = entry["v"]
        width = len(v_raw) if isinstance(v_raw, list) else 0
        v = decode_vector(v_raw, width, f"layers[{index}].v")
        W = decode_triplets(entry["W"], (width, indim), f"layers[{index}].W")
        layers.append(GmiLayer(W=W, v=v, variant=variant))
        indim += width
    return SubadditiveNet(input_dim, tuple(layers))
