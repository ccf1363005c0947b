"""Flat key-value text files: one `key = value` per line, `#` comments."""


def read_kv(path):
    """Parse a key-value file into an ordered dict of strings.

    Blank lines and lines starting with '#' are skipped.  A line without
    '=' or a duplicated key raises ValueError (typos in sweep configs
    should fail loudly).
    """
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not key:
                raise ValueError(f"{path}:{lineno}: empty key")
            if key in out:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value
    return out
