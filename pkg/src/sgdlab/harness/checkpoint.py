"""Versioned checkpoint container: text header + little-endian float64 payload.

Layout per layer: weight matrix row-major, then bias vector, input to output.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import (CheckpointCountError, CheckpointError,
                      CheckpointTruncatedError, CheckpointVersionError)
from ..net import MlpSpec, Weights

FORMAT_VERSION = 1
MAGIC = "MLPCKPT"


@dataclass
class Checkpoint:
    spec: MlpSpec
    params: np.ndarray
    provenance: str
    seed: int
    config_fingerprint: str = ""
    created: str = ""
    format_version: int = FORMAT_VERSION

    @staticmethod
    def from_weights(spec: MlpSpec, w: Weights, config_fingerprint: str = "") -> "Checkpoint":
        return Checkpoint(spec=spec, params=w.flat(), provenance=w.provenance,
                          seed=w.seed, config_fingerprint=config_fingerprint,
                          created=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))

    def to_weights(self) -> Weights:
        return Weights.from_flat(self.spec, self.params, self.provenance, self.seed)


def save_checkpoint(c: Checkpoint, path: str) -> None:
    if c.params.size != c.spec.n_params:
        raise CheckpointCountError(
            f"spec expects {c.spec.n_params} parameters, array has {c.params.size}")
    hidden = ",".join(map(str, c.spec.hidden_widths))
    header = (
        f"{MAGIC} v{c.format_version}\n"
        f"spec {c.spec.input_dim} [{hidden}] {c.spec.n_classes}\n"
        f"provenance {c.provenance}\n"
        f"seed {c.seed}\n"
        f"fingerprint {c.config_fingerprint}\n"
        f"created {c.created}\n"
        f"params {c.params.size}\n"
        f"END\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(np.ascontiguousarray(c.params, dtype="<f8").tobytes())


def load_checkpoint(path: str) -> Checkpoint:
    with open(path, "rb") as f:
        blob = f.read()
    try:
        end = blob.index(b"END\n") + 4
    except ValueError:
        raise CheckpointError(f"{path}: missing header terminator") from None
    lines = blob[:end].decode("ascii").splitlines()
    fields = {}
    magic_line = lines[0].split()
    if magic_line[0] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    version = int(magic_line[1].lstrip("v"))
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"{path}: unsupported format version {version}")
    for line in lines[1:-1]:
        key, _, value = line.partition(" ")
        fields[key] = value
    in_dim, hidden_str, n_classes = fields["spec"].split()
    hidden = tuple(int(h) for h in hidden_str.strip("[]").split(",") if h)
    spec = MlpSpec(int(in_dim), hidden, int(n_classes))
    count = int(fields["params"])
    if count != spec.n_params:
        raise CheckpointCountError(
            f"{path}: header says {count} parameters, spec needs {spec.n_params}")
    payload = blob[end:]
    if len(payload) < 8 * count:
        raise CheckpointTruncatedError(
            f"{path}: payload has {len(payload)} bytes, need {8 * count}")
    params = np.frombuffer(payload[:8 * count], dtype="<f8").copy()
    return Checkpoint(spec=spec, params=params, provenance=fields["provenance"],
                      seed=int(fields["seed"]),
                      config_fingerprint=fields.get("fingerprint", ""),
                      created=fields.get("created", ""), format_version=version)
