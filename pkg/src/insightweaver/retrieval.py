"""Embedding retrieval over insight descriptions and dual-path rank fusion.

Two query paths share one vector index: the user path embeds the user's
question, the context path reuses the focused insight's own stored vector.
Each path's top-k list is converted to rank scores and merged with a
weighted sum before the constraint pass (significance floor, per-type
diversity cap, hard K) shapes the final candidate subset.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ProviderError",
    "EmbeddingProvider",
    "StubEmbedder",
    "RemoteEmbedder",
    "VectorIndex",
    "RankedList",
    "MergeConfig",
    "dual_path_merge",
    "apply_constraints",
    "search",
]

STUB_DIMENSION = 384


class ProviderError(RuntimeError):
    """Transport or protocol failure of a remote provider; retry-safe."""

    def __init__(self, provider: str, message: str):
        super().__init__(f"{provider}: {message}")
        self.provider = provider


class EmbeddingProvider:
    """Maps equal texts to equal vectors of a fixed dimension."""

    name: str = "base"
    dimension: int = STUB_DIMENSION

    def embed(self, texts: list[str]) -> np.ndarray:
        raise NotImplementedError


class StubEmbedder(EmbeddingProvider):
    """Deterministic offline embedder: hashed character trigrams, L2-normalized.

    Not semantically meaningful, but stable across processes and platforms,
    which is what offline replay determinism needs.
    """

    name = "stub-trigram"

    def __init__(self, dimension: int = STUB_DIMENSION):
        if dimension < 8:
            raise ValueError("dimension too small")
        self.dimension = dimension

    def embed(self, texts: list[str]) -> np.ndarray:
        if any(not t for t in texts):
            raise ValueError("cannot embed empty text")
        out = np.zeros((len(texts), self.dimension), dtype=np.float64)
        for row, text in enumerate(texts):
            padded = f"\x02\x02{text}\x03\x03"
            for i in range(len(padded) - 2):
                tri = padded[i : i + 3]
                digest = hashlib.blake2b(tri.encode("utf-8"), digest_size=8).digest()
                slot = int.from_bytes(digest[:4], "big") % self.dimension
                sign = 1.0 if digest[4] & 1 else -1.0
                out[row, slot] += sign
            norm = float(np.linalg.norm(out[row]))
            if norm == 0.0:
                out[row, 0] = 1.0
            else:
                out[row] /= norm
        return out


class RemoteEmbedder(EmbeddingProvider):
    """HTTP embedding endpoint: POST {"texts": [...]} -> {"vectors": [[...]]}."""

    name = "remote-embedding"

    def __init__(self, endpoint: str, dimension: int, api_key: str | None = None, timeout: float = 30.0):
        self.endpoint = endpoint
        self.dimension = dimension
        self.api_key = api_key
        self.timeout = timeout

    def embed(self, texts: list[str]) -> np.ndarray:
        import httpx

        if any(not t for t in texts):
            raise ValueError("cannot embed empty text")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = httpx.post(
                self.endpoint, json={"texts": texts}, headers=headers, timeout=self.timeout
            )
            resp.raise_for_status()
            vectors = resp.json()["vectors"]
        except Exception as exc:  # transport, HTTP status, or shape
            raise ProviderError(self.name, str(exc)) from exc
        arr = np.asarray(vectors, dtype=np.float64)
        if arr.shape != (len(texts), self.dimension):
            raise ProviderError(self.name, f"bad vector shape {arr.shape}")
        norms = np.linalg.norm(arr, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return arr / norms


@dataclass
class VectorIndex:
    """Exact cosine search over unit vectors with per-entry metadata."""

    dimension: int
    ids: list[str] = field(default_factory=list)
    vectors: np.ndarray | None = None
    metadata: dict[str, dict] = field(default_factory=dict)

    def add(self, ids: list[str], vectors: np.ndarray, metadata: list[dict]) -> None:
        if vectors.shape != (len(ids), self.dimension):
            raise ValueError(f"expected {(len(ids), self.dimension)}, got {vectors.shape}")
        if len(ids) != len(metadata):
            raise ValueError("ids and metadata must align")
        dup = set(ids) & set(self.metadata)
        if dup:
            raise ValueError(f"duplicate ids: {sorted(dup)[:3]}")
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        unit = vectors / norms
        self.vectors = unit if self.vectors is None else np.vstack([self.vectors, unit])
        self.ids.extend(ids)
        for i, meta in zip(ids, metadata):
            self.metadata[i] = dict(meta)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, iid: str) -> bool:
        return iid in self.metadata

    def vector_of(self, iid: str) -> np.ndarray:
        return self.vectors[self.ids.index(iid)]

    def subset(self, keep: set[str]) -> "VectorIndex":
        sub = VectorIndex(dimension=self.dimension)
        rows = [k for k, i in enumerate(self.ids) if i in keep]
        if rows:
            sub.add(
                [self.ids[k] for k in rows],
                self.vectors[rows],
                [self.metadata[self.ids[k]] for k in rows],
            )
        return sub

    def dump(self) -> str:
        entries = [
            {"id": iid, "vector": [float(x) for x in self.vector_of(iid)], "metadata": self.metadata[iid]}
            for iid in sorted(self.ids)
        ]
        return json.dumps(
            {"dimension": self.dimension, "entries": entries},
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def load(cls, text: str) -> "VectorIndex":
        doc = json.loads(text)
        idx = cls(dimension=int(doc["dimension"]))
        entries = doc["entries"]
        if entries:
            idx.add(
                [e["id"] for e in entries],
                np.asarray([e["vector"] for e in entries], dtype=np.float64),
                [e["metadata"] for e in entries],
            )
        return idx


@dataclass(frozen=True)
class RankedList:
    """Ranked (id, similarity) pairs; similarity never increases down the list."""

    items: tuple[tuple[str, float], ...]
    k: int

    def __post_init__(self) -> None:
        sims = [s for _, s in self.items]
        if any(b > a + 1e-12 for a, b in zip(sims, sims[1:])):
            raise ValueError("similarities must be non-increasing")
        if len(self.items) > self.k:
            raise ValueError("more items than k")

    def position_of(self, iid: str) -> int | None:
        for pos, (i, _) in enumerate(self.items):
            if i == iid:
                return pos
        return None


def search(index: VectorIndex, query_vec: np.ndarray, k: int) -> RankedList:
    """Exact top-k by cosine similarity; ties broken by id ascending."""
    if k < 1:
        raise ValueError("k must be positive")
    if len(index) == 0:
        return RankedList(items=(), k=k)
    q = np.asarray(query_vec, dtype=np.float64).reshape(-1)
    qn = float(np.linalg.norm(q))
    if qn > 0:
        q = q / qn
    sims = index.vectors @ q
    order = sorted(range(len(index)), key=lambda i: (-sims[i], index.ids[i]))[:k]
    return RankedList(items=tuple((index.ids[i], float(sims[i])) for i in order), k=k)


@dataclass(frozen=True)
class MergeConfig:
    alpha: float = 0.7
    k: int = 20
    K: int = 10
    min_score: float = 0.0
    diversity: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.k < 1 or self.K < 1:
            raise ValueError("k and K must be positive")
        if self.K > 2 * self.k:
            raise ValueError("K cannot exceed the merged list bound 2k")
        if self.diversity < 1:
            raise ValueError("diversity must be positive")


def rank_score(ranked: RankedList, iid: str, k: int) -> float:
    """(k - position) / k with 0-based positions; 0 when absent."""
    pos = ranked.position_of(iid)
    if pos is None:
        return 0.0
    return (k - pos) / k


def dual_path_merge(c_user: RankedList, c_context: RankedList, cfg: MergeConfig) -> RankedList:
    """Weighted fusion of the two retrieval paths.

    merged(c) = alpha * rank_user(c) + (1 - alpha) * rank_context(c), over
    the union of both lists, sorted by merged score descending then id.
    """
    ids = {i for i, _ in c_user.items} | {i for i, _ in c_context.items}
    merged = [
        (
            iid,
            cfg.alpha * rank_score(c_user, iid, cfg.k)
            + (1.0 - cfg.alpha) * rank_score(c_context, iid, cfg.k),
        )
        for iid in sorted(ids)
    ]
    merged.sort(key=lambda t: (-t[1], t[0]))
    return RankedList(items=tuple(merged), k=2 * cfg.k)


def apply_constraints(merged: RankedList, index: VectorIndex, cfg: MergeConfig) -> list[str]:
    """Significance floor, per-(category, itype) diversity cap, then hard K.

    Returns an ordered id list; empty means every candidate was filtered
    away and the caller should fall back to structural candidates.
    """
    out: list[str] = []
    per_type: dict[tuple[str, str], int] = {}
    for iid, _ in merged.items:
        meta = index.metadata.get(iid)
        if meta is None:
            continue
        if float(meta.get("score", 0.0)) < cfg.min_score:
            continue
        key = (meta.get("category", ""), meta.get("itype", ""))
        if per_type.get(key, 0) >= cfg.diversity:
            continue
        per_type[key] = per_type.get(key, 0) + 1
        out.append(iid)
        if len(out) == cfg.K:
            break
    return out
