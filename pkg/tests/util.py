"""Shared test fixtures: minimal binary-format writers and builders.

The writers here are independent of the package's readers: they pack
bytes straight from the published format layouts so parser tests have
a second opinion to check against.
"""

from __future__ import annotations

import numpy as np


def pad(text: str, width: int) -> bytes:
    raw = text.encode("ascii")
    assert len(raw) <= width, (text, width)
    return raw.ljust(width)


def write_edf(
    path,
    channels,
    record_duration: float = 1.0,
    n_records: int | None = None,
    bdf: bool = False,
):
    """Write an EDF/BDF file.

    ``channels`` is a list of dicts with keys ``label``, ``digital``
    (int array, multiple of samples_per_record), ``phys_min``,
    ``phys_max``, ``dig_min``, ``dig_max``, ``samples_per_record``.
    """
    ns = len(channels)
    if n_records is None:
        n_records = len(channels[0]["digital"]) // channels[0]["samples_per_record"]
    with open(path, "wb") as fh:
        if bdf:
            fh.write(b"\xff" + pad("BIOSEMI", 7))
        else:
            fh.write(pad("0", 8))
        fh.write(pad("patient", 80))
        fh.write(pad("recording", 80))
        fh.write(pad("01.01.20", 8))
        fh.write(pad("00.00.00", 8))
        fh.write(pad(str(256 * (ns + 1)), 8))
        fh.write(pad("24BIT" if bdf else "", 44))
        fh.write(pad(str(n_records), 8))
        fh.write(pad(str(record_duration), 8))
        fh.write(pad(str(ns), 4))

        def col(key, width, fmt=str):
            for ch in channels:
                fh.write(pad(fmt(ch[key]), width))

        col("label", 16)
        for ch in channels:
            fh.write(pad("transducer", 80))
        for ch in channels:
            fh.write(pad("mV", 8))
        col("phys_min", 8)
        col("phys_max", 8)
        col("dig_min", 8)
        col("dig_max", 8)
        for ch in channels:
            fh.write(pad("", 80))
        col("samples_per_record", 8)
        for ch in channels:
            fh.write(pad("", 32))

        for r in range(n_records):
            for ch in channels:
                spr = ch["samples_per_record"]
                block = np.asarray(ch["digital"][r * spr : (r + 1) * spr])
                if bdf:
                    vals = block.astype(np.int32)
                    vals = np.where(vals < 0, vals + (1 << 24), vals)
                    out = np.empty(spr * 3, dtype=np.uint8)
                    out[0::3] = vals & 0xFF
                    out[1::3] = (vals >> 8) & 0xFF
                    out[2::3] = (vals >> 16) & 0xFF
                    fh.write(out.tobytes())
                else:
                    fh.write(block.astype("<i2").tobytes())


def write_wfdb(
    stem,
    digital,
    sample_rate: float = 360.0,
    fmt: int = 212,
    gain: float = 200.0,
    baseline: int = 1024,
    description: str = "MLII",
):
    """Write a single-signal WFDB record (header + data file)."""
    digital = np.asarray(digital, dtype=np.int32)
    name = stem.name if hasattr(stem, "name") else str(stem).rsplit("/", 1)[-1]
    with open(f"{stem}.hea", "w", encoding="ascii") as fh:
        fh.write(f"{name} 1 {sample_rate:g} {digital.size}\n")
        fh.write(
            f"{name}.dat {fmt} {gain:g} 11 {baseline} "
            f"{digital[0] if digital.size else 0} 0 0 {description}\n"
        )
    with open(f"{stem}.dat", "wb") as fh:
        if fmt == 212:
            if digital.size % 2:
                digital = np.concatenate([digital, digital[-1:]])
            vals = np.where(digital < 0, digital + 4096, digital)
            first, second = vals[0::2], vals[1::2]
            out = np.empty(first.size * 3, dtype=np.uint8)
            out[0::3] = first & 0xFF
            out[1::3] = ((first >> 8) & 0x0F) | (((second >> 8) & 0x0F) << 4)
            out[2::3] = second & 0xFF
            fh.write(out.tobytes())
        elif fmt == 16:
            fh.write(digital.astype("<i2").tobytes())
        else:
            raise ValueError(fmt)


#: symbol -> WFDB annotation type code (beat + event subset)
WFDB_SYMBOL_CODES = {
    "N": 1, "L": 2, "R": 3, "a": 4, "V": 5, "F": 6, "J": 7, "A": 8, "S": 9,
    "E": 10, "j": 11, "/": 12, "Q": 13, "~": 14, "|": 16, '"': 22, "+": 28,
    "!": 31, "[": 32, "]": 33, "e": 34, "f": 38,
}


def write_wfdb_annotations(path, samples, symbols):
    """Encode a WFDB annotation stream (delta + type byte pairs)."""
    out = bytearray()
    prev = 0
    for sample, symbol in zip(samples, symbols):
        code = WFDB_SYMBOL_CODES[symbol]
        delta = int(sample) - prev
        prev = int(sample)
        if delta > 1023:
            out += bytes([0, 59 << 2])  # SKIP, then 4-byte offset
            out += bytes(
                [
                    (delta >> 16) & 0xFF,
                    (delta >> 24) & 0xFF,
                    delta & 0xFF,
                    (delta >> 8) & 0xFF,
                ]
            )
            delta = 0
        out += bytes([delta & 0xFF, (code << 2) | ((delta >> 8) & 0x03)])
    out += bytes([0, 0])
    with open(path, "wb") as fh:
        fh.write(out)


def dyadic(rng, lo=0.3, hi=1.8, step=2.0 ** -8):
    """Random duration on a dyadic grid so float sums are exact."""
    k_lo = int(np.ceil(lo / step))
    k_hi = int(np.floor(hi / step))
    return float(rng.integers(k_lo, k_hi + 1) * step)


def dyadic_series(rng, n, lo=0.3, hi=1.8, step=2.0 ** -8):
    k_lo = int(np.ceil(lo / step))
    k_hi = int(np.floor(hi / step))
    return rng.integers(k_lo, k_hi + 1, size=n) * step
