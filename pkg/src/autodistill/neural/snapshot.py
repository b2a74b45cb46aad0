"""Binary weight snapshots.

Layout (little endian)::

    magic   4 bytes  b"ADWT"
    version u16      1
    count   u16      number of networks
    per network:
        name_len u16, name utf-8
        n_sizes  u16, sizes u32 * n_sizes
        params   float64 * n_params   (layer by layer: W row-major, then b)

Dueling networks are stored as two entries, ``<name>.value`` and
``<name>.adv``.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .nets import DuelingQ, Mlp

MAGIC = b"ADWT"
VERSION = 1


class SnapshotError(ValueError):
    pass


def _flatten(nets: dict) -> list[tuple[str, Mlp]]:
    out = []
    for name, net in nets.items():
        if isinstance(net, DuelingQ):
            out += [(f"{name}.value", net.value), (f"{name}.adv", net.adv)]
        else:
            out.append((name, net))
    return out


def save_weights(path: str | Path, nets: dict) -> None:
    items = _flatten(nets)
    buf = bytearray(MAGIC)
    buf += struct.pack("<HH", VERSION, len(items))
    for name, net in items:
        raw = name.encode()
        buf += struct.pack("<H", len(raw)) + raw
        buf += struct.pack("<H", len(net.sizes)) + struct.pack(f"<{len(net.sizes)}I", *net.sizes)
        buf += net.params.astype("<f8").tobytes()
    Path(path).write_bytes(bytes(buf))


def load_weights(path: str | Path) -> dict[str, Mlp]:
    """Networks by stored name (dueling streams come back as two Mlps)."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise SnapshotError("not a weight snapshot")
    version, count = struct.unpack_from("<HH", data, 4)
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    k = 8
    out = {}
    for _ in range(count):
        (n,) = struct.unpack_from("<H", data, k)
        k += 2
        name = data[k:k + n].decode()
        k += n
        (ns,) = struct.unpack_from("<H", data, k)
        k += 2
        sizes = struct.unpack_from(f"<{ns}I", data, k)
        k += 4 * ns
        net = Mlp(sizes)
        nbytes = 8 * net.n_params
        if k + nbytes > len(data):
            raise SnapshotError("truncated snapshot")
        net.params[...] = np.frombuffer(data, dtype="<f8", count=net.n_params, offset=k)
        k += nbytes
        out[name] = net
    if k != len(data):
        raise SnapshotError("trailing bytes in snapshot")
    return out


def load_into(path: str | Path, nets: dict) -> None:
    """Copy stored parameters into existing networks of matching shape."""
    stored = load_weights(path)
    for name, net in _flatten(nets):
        if name not in stored or stored[name].sizes != net.sizes:
            raise SnapshotError(f"snapshot has no compatible entry for {name}")
        net.params[...] = stored[name].params
