"""Single-file network checkpoints: JSON manifest plus raw float64 blocks.

Byte layout, in order:

* bytes 0-7: ASCII magic ``FGCKPT01``
* bytes 8-15: little-endian uint64, byte length L of the manifest
* bytes 16 .. 16+L: UTF-8 JSON manifest
* bytes 16+L ..: concatenated parameter blocks

The manifest holds ``format_version``, the ``architecture`` dict needed to
rebuild the layer stack, and an ``arrays`` list with one entry per parameter
tensor: layer index, attribute name, shape, dtype (always ``<f8``), and
``offset``/``nbytes`` relative to the first byte after the manifest.  Blocks
are C-order little-endian float64, so a round trip is bitwise exact.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .network import Network, NetworkArchitecture, build_network

MAGIC = b"FGCKPT01"
FORMAT_VERSION = 1
_DTYPE = "<f8"


def save_checkpoint(network: Network, path, arch: NetworkArchitecture | None = None) -> None:
    """Write the network's parameters and architecture to one file atomically."""
    arch = arch or getattr(network, "architecture", None)
    if arch is None:
        raise ValueError(
            "network has no attached architecture; pass arch= so it can be rebuilt on load"
        )
    path = Path(path)
    entries = []
    blocks = []
    offset = 0
    for layer_idx, attr in network.parameters():
        arr = np.ascontiguousarray(network.get_param((layer_idx, attr)), dtype=np.float64)
        raw = arr.astype(_DTYPE, copy=False).tobytes(order="C")
        entries.append(
            {
                "name": f"layer{layer_idx}.{attr}",
                "layer": layer_idx,
                "attr": attr,
                "shape": list(arr.shape),
                "dtype": _DTYPE,
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        blocks.append(raw)
        offset += len(raw)
    manifest = json.dumps(
        {
            "format_version": FORMAT_VERSION,
            "architecture": arch.to_dict(),
            "arrays": entries,
        },
        sort_keys=True,
    ).encode("utf-8")

    fd, tmp_name = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(len(manifest).to_bytes(8, "little"))
            fh.write(manifest)
            for raw in blocks:
                fh.write(raw)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def load_checkpoint(path) -> Network:
    """Rebuild a network from a checkpoint file; parameters load bit-exactly."""
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:8] != MAGIC:
        raise ValueError(f"{path} is not a recognized checkpoint file")
    manifest_len = int.from_bytes(raw[8:16], "little")
    if len(raw) < 16 + manifest_len:
        raise ValueError(f"{path} is truncated inside the manifest")
    manifest = json.loads(raw[16 : 16 + manifest_len].decode("utf-8"))
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ValueError(
            f"unsupported checkpoint format_version {manifest.get('format_version')!r}"
        )
    arch = NetworkArchitecture.from_dict(manifest["architecture"])
    network = build_network(arch, np.random.default_rng(0))
    data_start = 16 + manifest_len
    expected_refs = set(map(tuple, ((e["layer"], e["attr"]) for e in manifest["arrays"])))
    actual_refs = set(network.parameters())
    if expected_refs != actual_refs:
        raise ValueError("checkpoint arrays do not match the declared architecture")
    for entry in manifest["arrays"]:
        if entry["dtype"] != _DTYPE:
            raise ValueError(f"array {entry['name']} has unsupported dtype {entry['dtype']!r}")
        start = data_start + entry["offset"]
        end = start + entry["nbytes"]
        if end > len(raw):
            raise ValueError(f"{path} is truncated inside array {entry['name']}")
        arr = np.frombuffer(raw[start:end], dtype=np.float64).reshape(entry["shape"]).copy()
        ref = (entry["layer"], entry["attr"])
        if network.get_param(ref).shape != arr.shape:
            raise ValueError(
                f"array {entry['name']} shape {arr.shape} does not fit the architecture"
            )
        network.set_param(ref, arr)
    return network
