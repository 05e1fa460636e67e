"""Random Tanner graphs, a quantized sum-product decoder and BER measurement."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .decomposition import snap_to_points
from .density import (
    BEC,
    BIAWGN,
    BSC,
    DEFAULT_GRID,
    ErrorProbDensity,
    Explicit,
    Mix,
    channel_to_json,
    make_density,
    to_error_prob_density,
    validate_channel,
)
from .ensemble import DegreeDistribution
from .errors import ParameterError

# 9-bit messages: integer levels -255..255 covering [-20, 20]
DECODER_RANGE = 20.0
MAX_LEVEL = 255
STEP = DECODER_RANGE / MAX_LEVEL
DEFAULT_DECODER_ITERS = 200
# 6-bit channel view: 64 error probabilities evenly spaced on [0, 1/2]
CHANNEL_POINTS = np.arange(64) / 126.0
DOUBLE_EDGE_PASSES = 100


def _phi(y):
    y = np.maximum(y, 0.0)
    with np.errstate(divide="ignore"):
        t = np.exp(-y)
        out = np.log1p(t) - np.log1p(-t)
    return np.where(y <= 1e-300, 700.0, out)


PHI_TABLE = np.ascontiguousarray(_phi(np.arange(MAX_LEVEL + 1) * STEP))
# phi is an involution, so round(phi(y) / STEP) >= k exactly when y <= phi((k - 1/2) STEP)
LEVEL_BOUNDS = np.ascontiguousarray(_phi((np.arange(1, MAX_LEVEL + 1) - 0.5) * STEP))


def quantize_llr(llr) -> np.ndarray:
    """Real LLRs to decoder levels, saturating at +-MAX_LEVEL."""
    q = np.clip(np.round(np.asarray(llr, dtype=float) / STEP), -MAX_LEVEL, MAX_LEVEL)
    return q.astype(np.int16)


# ---------------------------------------------------------------------------
# graph construction


def _largest_remainder(weights, total):
    raw = np.asarray(weights, dtype=float) * total
    out = np.floor(raw).astype(np.int64)
    short = int(total - out.sum())
    if short > 0:
        out[np.argsort(-(raw - out), kind="stable")[:short]] += 1
    return out


def _node_counts(pairs, n_nodes):
    """Node-perspective counts from edge-perspective fractions."""
    deg = np.array([d for d, _ in pairs])
    frac = np.array([f for _, f in pairs])
    node = frac / deg
    return deg, _largest_remainder(node / node.sum(), n_nodes)


def _check_degrees(dd: DegreeDistribution, n_edges: int):
    """Check-node degree list with exactly ``n_edges`` sockets."""
    deg = np.array([k for k, _ in dd.rho])
    frac = np.array([f for _, f in dd.rho])
    frac = frac / frac.sum()
    m = max(1, int(round(n_edges * float(np.sum(frac / deg)))))
    counts = _largest_remainder((frac / deg) / np.sum(frac / deg), m)
    degrees = np.repeat(deg, counts)
    # fix the socket total by nudging single check degrees by one
    diff = n_edges - int(degrees.sum())
    order = np.argsort(degrees, kind="stable")
    k = 0
    while diff != 0:
        i = order[k % m] if diff > 0 else order[-1 - (k % m)]
        step = 1 if diff > 0 else -1
        if degrees[i] + step >= 2:
            degrees[i] += step
            diff -= step
        k += 1
        if k > 4 * m + abs(diff) * m:
            raise ParameterError("cannot realize the check degrees for this block length")
    return degrees


@dataclass(frozen=True, eq=False)
class TannerGraph:
    """Bipartite graph with edges numbered in check order.

    ``edge_var[e]`` is the variable on edge e; check c owns edges
    ``chk_ptr[c]:chk_ptr[c+1]``.  ``var_edges[var_ptr[v]:var_ptr[v+1]]`` lists
    the edges of variable v.
    """

    n: int
    chk_ptr: np.ndarray
    edge_var: np.ndarray
    var_ptr: np.ndarray
    var_edges: np.ndarray
    double_edges: int = 0

    @property
    def m(self) -> int:
        return self.chk_ptr.size - 1

    @property
    def n_edges(self) -> int:
        return self.edge_var.size

    @property
    def var_degrees(self) -> np.ndarray:
        return np.diff(self.var_ptr)

    @property
    def chk_degrees(self) -> np.ndarray:
        return np.diff(self.chk_ptr)

    def edge_fractions(self):
        """Realized edge-perspective (lambda, rho) as {degree: fraction} dicts."""
        out = []
        for deg in (self.var_degrees, self.chk_degrees):
            d, c = np.unique(deg, return_counts=True)
            out.append({int(k): float(k * v) / self.n_edges for k, v in zip(d, c)})
        return tuple(out)

    def parity_matrix(self) -> np.ndarray:
        """Dense 0/1 parity-check matrix (double edges cancel mod 2)."""
        h = np.zeros((self.m, self.n), dtype=np.uint8)
        chk = np.repeat(np.arange(self.m), self.chk_degrees)
        np.add.at(h, (chk, self.edge_var), 1)
        return h & 1

    def syndrome(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64)
        chk = np.repeat(np.arange(self.m), self.chk_degrees)
        return np.bincount(chk, weights=bits[self.edge_var], minlength=self.m).astype(np.int64) & 1

    def to_adjacency(self) -> str:
        lines = []
        for c in range(self.m):
            lines.append(" ".join(str(v) for v in self.edge_var[self.chk_ptr[c] : self.chk_ptr[c + 1]]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_adjacency(cls, text: str, n: int | None = None) -> "TannerGraph":
        rows = [[int(t) for t in line.split()] for line in text.splitlines() if line.strip()]
        edge_var = np.array([v for r in rows for v in r], dtype=np.int32)
        chk_ptr = np.concatenate(([0], np.cumsum([len(r) for r in rows]))).astype(np.int32)
        if n is None:
            n = int(edge_var.max()) + 1
        return _assemble(n, chk_ptr, edge_var)


def _assemble(n, chk_ptr, edge_var, double_edges=0) -> TannerGraph:
    edge_var = np.ascontiguousarray(edge_var, dtype=np.int32)
    var_edges = np.argsort(edge_var, kind="stable").astype(np.int32)
    var_ptr = np.concatenate(([0], np.cumsum(np.bincount(edge_var, minlength=n)))).astype(np.int32)
    return TannerGraph(n, np.ascontiguousarray(chk_ptr, dtype=np.int32), edge_var, var_ptr, var_edges, double_edges)


def _duplicate_edges(chk_of_edge, edge_var):
    """Edge indices that repeat an earlier (check, variable) pair."""
    key = chk_of_edge.astype(np.int64) * (int(edge_var.max()) + 1) + edge_var
    order = np.argsort(key, kind="stable")
    dup = np.zeros(key.size, dtype=bool)
    dup[order[1:]] = key[order[1:]] == key[order[:-1]]
    return np.flatnonzero(dup)


def build_graph(dd: DegreeDistribution, n: int, seed=None) -> TannerGraph:
    """Configuration-model graph for ``dd`` with ``n`` variable nodes.

    Sockets are matched by a random permutation; edges that duplicate a
    (check, variable) pair are swapped with random partners for up to 100
    passes, and any left after that are kept.
    """
    if n < 2:
        raise ParameterError("block length must be at least 2")
    rng = np.random.default_rng(seed)
    vdeg, vcount = _node_counts(dd.lam, n)
    var_degrees = np.repeat(vdeg, vcount)
    n_edges = int(var_degrees.sum())
    chk_degrees = _check_degrees(dd, n_edges)
    if chk_degrees.size < 1 or chk_degrees.size >= n:
        raise ParameterError(f"block length {n} too short for this degree distribution")
    sockets = np.repeat(np.arange(n, dtype=np.int32), var_degrees)
    edge_var = sockets[rng.permutation(n_edges)]
    chk_of_edge = np.repeat(np.arange(chk_degrees.size), chk_degrees)
    dup = _duplicate_edges(chk_of_edge, edge_var)
    for _ in range(DOUBLE_EDGE_PASSES):
        if dup.size == 0:
            break
        partners = rng.integers(0, n_edges, size=dup.size)
        for a, b in zip(dup, partners):
            edge_var[a], edge_var[b] = edge_var[b], edge_var[a]
        dup = _duplicate_edges(chk_of_edge, edge_var)
    chk_ptr = np.concatenate(([0], np.cumsum(chk_degrees)))
    return _assemble(n, chk_ptr, edge_var, int(dup.size))


# ---------------------------------------------------------------------------
# decoding


@dataclass(frozen=True)
class DecodeResult:
    bits: np.ndarray
    iterations: int
    parity_ok: bool


def decode(graph: TannerGraph, llr_in, max_iter: int = DEFAULT_DECODER_ITERS) -> DecodeResult:
    """Flooding sum-product on 9-bit messages.

    ``llr_in`` holds real LLRs (quantized here) or int16 decoder levels.
    Decisions on a zero total break toward bit 0.
    """
    llr_in = np.asarray(llr_in)
    if llr_in.shape != (graph.n,):
        raise ParameterError(f"expected {graph.n} input LLRs, got shape {llr_in.shape}")
    levels = llr_in if llr_in.dtype == np.int16 else quantize_llr(llr_in)
    levels = np.ascontiguousarray(np.clip(levels, -MAX_LEVEL, MAX_LEVEL), dtype=np.int16)
    bits = np.zeros(graph.n, dtype=np.uint8)
    it, ok = kernels.bp_decode(levels, graph.chk_ptr, graph.edge_var, graph.var_ptr, graph.var_edges,
                               int(max_iter), MAX_LEVEL, PHI_TABLE, LEVEL_BOUNDS, bits)
    return DecodeResult(bits, int(it), bool(ok))


def random_codeword(graph: TannerGraph, rng) -> np.ndarray:
    """Uniform codeword of the graph's code, from a GF(2) null-space basis."""
    h = graph.parity_matrix().astype(bool)
    m, n = h.shape
    pivots = []
    row = 0
    for col in range(n):
        if row == m:
            break
        hit = np.flatnonzero(h[row:, col])
        if hit.size == 0:
            continue
        p = row + hit[0]
        h[[row, p]] = h[[p, row]]
        others = np.flatnonzero(h[:, col])
        others = others[others != row]
        h[others] ^= h[row]
        pivots.append(col)
        row += 1
    free = np.setdiff1d(np.arange(n), pivots)
    x = np.zeros(n, dtype=bool)
    x[free] = rng.integers(0, 2, size=free.size).astype(bool)
    for r, col in enumerate(pivots):
        x[col] = np.logical_xor.reduce(h[r, free] & x[free]) if free.size else False
    return x.astype(np.uint8)


# ---------------------------------------------------------------------------
# channels and BER


def channel_view(spec, grid=DEFAULT_GRID) -> ErrorProbDensity:
    """Error-probability view of ``spec`` with at most 64 points on [0, 1/2].

    Two-point channels stay exact; anything richer is snapped onto
    ``CHANNEL_POINTS`` with capacity preserved.
    """
    validate_channel(spec)
    if isinstance(spec, BSC):
        g = ErrorProbDensity.from_points([(min(spec.epsilon, 1.0 - spec.epsilon), 1.0)])
    elif isinstance(spec, BEC):
        g = ErrorProbDensity.from_points([(0.0, 1.0 - spec.e), (0.5, spec.e)])
    elif isinstance(spec, Explicit):
        g = spec.density
    elif isinstance(spec, Mix):
        pts = []
        for gamma, part in spec.parts:
            pts += [(p, gamma * m) for p, m in channel_view(part, grid).points]
        g = ErrorProbDensity.from_points(pts, renormalize=True)
    else:
        g = to_error_prob_density(make_density(spec, grid))
    if g.p.size > CHANNEL_POINTS.size:
        g = snap_to_points(g, CHANNEL_POINTS)
    return g


def transmit(g: ErrorProbDensity, codeword, rng) -> np.ndarray:
    """Channel LLRs for ``codeword`` through the mixture-of-BSCs channel ``g``."""
    codeword = np.asarray(codeword, dtype=np.uint8)
    n = codeword.size
    k = rng.choice(g.p.size, size=n, p=g.mass / g.mass.sum())
    p = g.p[k]
    flip = rng.random(n) < p
    with np.errstate(divide="ignore"):
        mag = np.where(p > 0, np.log((1.0 - p) / np.where(p > 0, p, 1.0)), np.inf)
    received = codeword ^ flip.astype(np.uint8)
    llr = np.where(received == 0, mag, -mag)
    return quantize_llr(np.clip(llr, -DECODER_RANGE * 2, DECODER_RANGE * 2))


@dataclass(frozen=True)
class BerPoint:
    channel: object
    capacity: float
    bits_sent: int
    bit_errors: int
    frames: int = 0
    frame_errors: int = 0

    @property
    def ber(self):
        """Bit error rate, ``None`` when nothing was sent."""
        return self.bit_errors / self.bits_sent if self.bits_sent else None

    def to_row(self):
        ber = self.ber
        return [json.dumps(channel_to_json(self.channel), sort_keys=True), repr(self.capacity), self.bits_sent,
                self.bit_errors, "" if ber is None else repr(ber)]


def measure_ber(dd: DegreeDistribution, n: int, channels, trials: int, seed=None,
                max_iter: int = DEFAULT_DECODER_ITERS, graph: TannerGraph | None = None, log=None):
    """All-zero transmissions of ``trials`` frames per channel on one random graph."""
    ss = np.random.SeedSequence(seed)
    graph_seed, *chan_seeds = ss.spawn(len(channels) + 1)
    if graph is None:
        graph = build_graph(dd, n, np.random.default_rng(graph_seed))
    zero = np.zeros(graph.n, dtype=np.uint8)
    out = []
    for spec, cs in zip(channels, chan_seeds):
        g = channel_view(spec)
        rng = np.random.default_rng(cs)
        errors = frame_errors = 0
        for t in range(trials):
            res = decode(graph, transmit(g, zero, rng), max_iter)
            e = int(res.bits.sum())
            errors += e
            frame_errors += e > 0
        point = BerPoint(spec, g.capacity(), trials * graph.n, errors, trials, frame_errors)
        if log:
            log(f"{channel_to_json(spec)} capacity={point.capacity:.4f} ber={point.ber}")
        out.append(point)
    return out


def ber_csv(points, meta=None) -> str:
    buf = io.StringIO()
    for line in meta or ():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["channel_json", "capacity", "bits_sent", "bit_errors", "ber"])
    for p in points:
        # nothing sent means no rate to report
        if p.bits_sent:
            w.writerow(p.to_row())
    return buf.getvalue()
