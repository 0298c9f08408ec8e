"""On-disk stripe directories: one file per node plus a JSON manifest.

Node files are named s{stripe}_n{node}.dat with 0-based indices. A node
holds `chunk` symbols, one byte each for w <= 8 and two little-endian
bytes otherwise. The manifest lists, for every stripe, the data chunk
stored by each of its systematic nodes, so stripes produced by a
conversion decode the same way as freshly encoded ones.
"""

from __future__ import annotations

import json
import logging
import shutil
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from convertible.codes import MdsCode
from convertible.config.loader import SETTINGS
from convertible.errors import ParameterError
from convertible.galois import FieldSpec, GfMatrix

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


@dataclass
class Manifest:
    version: int
    field: dict
    n: int
    k: int
    stripes: int
    payload_len: int
    seed: int
    chunk: int
    parity: list[list[int]]
    positions: list[list[int]]
    pad_stripes: int = 0
    batch_stripes: int = 1
    hints: dict = field(default_factory=dict)

    @property
    def field_spec(self) -> FieldSpec:
        return FieldSpec(self.field["w"], self.field["poly"])

    @property
    def code(self) -> MdsCode:
        return MdsCode.from_parity(GfMatrix.from_rows(self.parity, self.field_spec))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> Manifest:
        version = SETTINGS["storage"]["manifest_version"]
        if data.get("version") != version:
            raise ParameterError(f"manifest version {data.get('version')} is not {version}")
        return cls(**data)


def symbol_dtype(f: FieldSpec) -> np.dtype:
    return np.dtype(np.uint8) if f.symbol_bytes == 1 else np.dtype("<u2")


def bytes_to_symbols(data: bytes, f: FieldSpec) -> np.ndarray:
    if f.symbol_bytes == 2 and len(data) % 2:
        data += b"\x00"
    return np.frombuffer(data, dtype=symbol_dtype(f)).astype(np.int64)


def symbols_to_bytes(symbols: np.ndarray, f: FieldSpec) -> bytes:
    return np.asarray(symbols).astype(symbol_dtype(f)).tobytes()


class NodeStore:
    """A stripe directory with instrumented node reads and writes.

    Stripes at or beyond `manifest.stripes` are virtual zero stripes used to
    fill the last conversion batch; reading them returns zeros and still
    counts as an access.
    """

    def __init__(self, root: str | Path, manifest: Manifest | None = None):
        self.root = Path(root)
        self.manifest = manifest
        self.reads: list[tuple[int, int]] = []
        self.writes: list[tuple[int, int]] = []
        self.symbols_read = 0
        self.symbols_written = 0

    @classmethod
    def open(cls, root: str | Path) -> NodeStore:
        root = Path(root)
        path = root / MANIFEST
        if not path.exists():
            raise ParameterError(f"{root} has no {MANIFEST}")
        return cls(root, Manifest.from_dict(json.loads(path.read_text())))

    def node_path(self, stripe: int, node: int) -> Path:
        return self.root / f"s{stripe}_n{node}.dat"

    def exists(self, stripe: int, node: int) -> bool:
        return self.node_path(stripe, node).exists()

    def _load(self, stripe: int, node: int) -> np.ndarray:
        m = self.manifest
        if stripe >= m.stripes and not self.exists(stripe, node):
            return np.zeros(m.chunk, dtype=np.int64)
        raw = self.node_path(stripe, node).read_bytes()
        return bytes_to_symbols(raw, m.field_spec)

    def read_node(self, stripe: int, node: int) -> np.ndarray:
        symbols = self._load(stripe, node)
        self.reads.append((stripe, node))
        self.symbols_read += symbols.size
        return symbols

    def peek_node(self, stripe: int, node: int) -> np.ndarray:
        """Read without instrumentation, for verification and decoding."""
        return self._load(stripe, node)

    def write_node(self, stripe: int, node: int, symbols: np.ndarray) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.node_path(stripe, node).write_bytes(
            symbols_to_bytes(symbols, self.manifest.field_spec)
        )
        self.writes.append((stripe, node))
        self.symbols_written += int(np.asarray(symbols).size)

    def relabel_from(self, source: NodeStore, src: tuple[int, int], dst: tuple[int, int]) -> None:
        """Carry an unchanged node over to this directory; not an access."""
        self.root.mkdir(parents=True, exist_ok=True)
        if source.exists(*src):
            shutil.copyfile(source.node_path(*src), self.node_path(*dst))
        else:
            zeros = np.zeros(source.manifest.chunk, dtype=np.int64)
            self.node_path(*dst).write_bytes(symbols_to_bytes(zeros, source.manifest.field_spec))

    def save_manifest(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / MANIFEST).write_text(json.dumps(self.manifest.to_dict(), indent=2))


def chunk_size(payload_symbols: int, k: int, configured: int | None = None) -> int:
    """Symbols per node: the configured size, shrunk for small payloads."""
    configured = SETTINGS["storage"]["chunk_symbols"] if configured is None else configured
    return max(1, min(configured, -(-payload_symbols // k)))


def write_encoded(
    root: str | Path,
    payload: bytes,
    code: MdsCode,
    seed: int,
    chunk: int | None = None,
    hints: dict | None = None,
) -> Manifest:
    """Encode a payload into stripes of `code` and write the directory."""
    f = code.field
    symbols = bytes_to_symbols(payload, f)
    chunk = chunk_size(symbols.size, code.k, chunk)
    per_stripe = code.k * chunk
    stripes = -(-symbols.size // per_stripe)
    padded = np.zeros(stripes * per_stripe, dtype=np.int64)
    padded[: symbols.size] = symbols

    manifest = Manifest(
        version=SETTINGS["storage"]["manifest_version"],
        field={"w": f.w, "poly": f.reduction_poly},
        n=code.n,
        k=code.k,
        stripes=stripes,
        payload_len=len(payload),
        seed=seed,
        chunk=chunk,
        parity=code.parity.tolist(),
        positions=[list(range(s * code.k, (s + 1) * code.k)) for s in range(stripes)],
        hints=hints or {},
    )
    store = NodeStore(root, manifest)
    for s in range(stripes):
        block = padded[s * per_stripe : (s + 1) * per_stripe].reshape(code.k, chunk)
        for j, row in enumerate(code.encode(block)):
            store.write_node(s, j, row)
    store.save_manifest()
    logger.info("encoded %d bytes into %d [%d,%d] stripes", len(payload), stripes, code.n, code.k)
    return manifest
