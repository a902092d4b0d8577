"""Binary tensor checkpoints.

Layout (all integers little-endian):

    b"RVA1" | uint8 precision flag (0 float32, 1 float64) | uint32 count
    count x [uint32 name length | utf-8 name | uint32 rank |
             rank x uint32 extent | raw little-endian values]
    uint32 metadata length | utf-8 JSON metadata
"""
import json
import struct
import numpy as np
from ..exceptions import CheckpointError

MAGIC = b"RVA1"
FLAGS = {"float32": 0, "float64": 1}
DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}


def dumps(arrays, precision="float32", metadata=None):
    "Encodes an ordered name -> array mapping (and JSON metadata) to bytes."
    if precision not in FLAGS:
        raise CheckpointError("unknown precision '%s'" % precision)
    dtype = DTYPES[FLAGS[precision]]
    parts = [MAGIC, struct.pack("<BI", FLAGS[precision], len(arrays))]
    for name, value in arrays.items():
        value = np.asarray(value, dtype=dtype)
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<I%iI" % value.ndim, value.ndim,
                                 *value.shape))
        parts.append(value.tobytes(order="C"))
    meta = json.dumps(metadata or {}, sort_keys=True).encode("utf-8")
    parts.append(struct.pack("<I", len(meta)))
    parts.append(meta)
    return b"".join(parts)


class _Reader:
    "Cursor over a checkpoint's bytes."
    def __init__(self, data):
        self.data = data
        self.pos = 0
        self.where = "header"

    def take(self, n):
        "The next n bytes."
        if self.pos + n > len(self.data):
            raise CheckpointError("truncated checkpoint in %s" % self.where)
        chunk = self.data[self.pos:self.pos+n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        "The next struct-packed values."
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def loads(data):
    "Decodes bytes to (arrays, precision, metadata)."
    reader = _Reader(data)
    if reader.take(4) != MAGIC:
        raise CheckpointError("not an RVA1 checkpoint (bad magic)")
    flag, count = reader.unpack("<BI")
    if flag not in DTYPES:
        raise CheckpointError("unknown precision flag %i" % flag)
    dtype = DTYPES[flag]
    arrays = {}
    for i in range(count):
        reader.where = "record %i" % i
        namelen, = reader.unpack("<I")
        try:
            name = reader.take(namelen).decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointError("record %i: name is not utf-8" % i) from None
        rank, = reader.unpack("<I")
        shape = reader.unpack("<%iI" % rank)
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        values = np.frombuffer(reader.take(nbytes), dtype=dtype)
        arrays[name] = values.reshape(shape).astype(dtype.newbyteorder("="))
    reader.where = "metadata"
    metalen, = reader.unpack("<I")
    try:
        metadata = json.loads(reader.take(metalen).decode("utf-8"))
    except ValueError as err:
        raise CheckpointError("bad metadata: %s" % err) from None
    if reader.pos != len(data):
        raise CheckpointError("%i trailing bytes after metadata"
                              % (len(data) - reader.pos))
    return arrays, {v: k for k, v in FLAGS.items()}[flag], metadata


def save(path, arrays, precision="float32", metadata=None):
    "Writes a checkpoint file."
    with open(path, "wb") as f:
        f.write(dumps(arrays, precision, metadata))


def load(path):
    "Reads a checkpoint file: (arrays, precision, metadata)."
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as err:
        raise CheckpointError("cannot read %s: %s" % (path, err)) from None
    return loads(data)
