"""Versioned on-disk container shared by every trained model.

Format: a numpy .npz archive holding
  __kind__     0-d unicode array naming the model type ("forest", "mlp")
  __version__  0-d int64 array, currently 1
  __meta__     0-d unicode array with a JSON object of scalar metadata
  plus one entry per model array, stored verbatim.

Arrays round-trip bit-exactly; metadata round-trips through JSON, which
preserves ints, bools, strings, and float64 values exactly.
"""

import json
import zipfile

import numpy as np

FORMAT_VERSION = 1


def save_model(path, kind, meta, arrays):
    """Write a model container.  Array names must not start with '__'."""
    for name in arrays:
        if name.startswith("__"):
            raise ValueError(f"reserved array name {name!r}")
    payload = {
        "__kind__": np.array(kind),
        "__version__": np.array(FORMAT_VERSION, dtype=np.int64),
        "__meta__": np.array(json.dumps(meta, sort_keys=True)),
    }
    payload.update(arrays)
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_model(path, expect_kind=None):
    """Read a model container back as (kind, meta, arrays).

    Raises ValueError on a wrong kind, an unsupported version, or a file
    that is not a model container.
    """
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError, zipfile.BadZipFile) as exc:
        raise ValueError(f"{path}: cannot read model container: {exc}") from exc
    if not hasattr(archive, "files"):  # a bare .npy array, not an archive
        raise ValueError(f"{path}: not a model container")
    with archive:
        names = set(archive.files)
        if "__kind__" not in names or "__version__" not in names:
            raise ValueError(f"{path}: not a model container")
        version = int(archive["__version__"])
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported container version {version}")
        kind = str(archive["__kind__"])
        meta = json.loads(str(archive["__meta__"]))
        arrays = {
            name: archive[name]
            for name in archive.files
            if not name.startswith("__")
        }
    if expect_kind is not None and kind != expect_kind:
        raise ValueError(f"{path}: container holds {kind!r}, expected {expect_kind!r}")
    return kind, meta, arrays
