"""File formats: PFM images, PGM previews, result CSV and plan files.

Plan files are plain ``key = value`` text; ``#`` starts a comment. Example::

    # noise sweep for Case I
    combo = I none tan
    combo = I none sin
    sigmas = 0, 0.5, 1
    trials = 20
    delta_true = 1.0471975511965976
    base_seed = 20210
    width = 256
    height = 256
    fringe_scale = 20
    aggregator = median

``combo`` may repeat; each names a case, a pre-filter and an estimator.
Omitted keys take the defaults of :class:`~gsstep.harness.ExperimentPlan`.
"""

from __future__ import annotations

import csv
import io
import math
import re
from pathlib import Path
from typing import Iterable

import numpy as np

from .gs import Estimator
from .harness import Combo, ExperimentPlan, ExperimentRecord
from .prefilter import Prefilter
from .synth import Case


class FormatError(ValueError):
    """Malformed input file; the message carries the path and, where known, the line."""


# --- PFM -------------------------------------------------------------------

def encode_pfm(field) -> bytes:
    """Grayscale PFM bytes: little-endian float32 rows, bottom row first."""
    arr = np.asarray(field, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"PFM needs a 2D field, got shape {arr.shape}")
    height, width = arr.shape
    header = f"Pf\n{width} {height}\n-1.0\n".encode("ascii")
    return header + np.ascontiguousarray(arr[::-1], dtype="<f4").tobytes()


_PFM_HEADER = re.compile(rb"\A(P[fF])\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s")


def decode_pfm(data: bytes, source: str = "<bytes>") -> np.ndarray:
    """Parse grayscale PFM bytes into a float64 array (top row first)."""
    m = _PFM_HEADER.match(data)
    if not m:
        raise FormatError(f"{source}: not a PFM file (bad header)")
    if m.group(1) != b"Pf":
        raise FormatError(f"{source}: color PFM is not supported, expected grayscale 'Pf'")
    width, height = int(m.group(2)), int(m.group(3))
    try:
        scale = float(m.group(4))
    except ValueError:
        raise FormatError(f"{source}: bad PFM scale factor {m.group(4)!r}") from None
    if scale == 0 or width == 0 or height == 0:
        raise FormatError(f"{source}: invalid PFM header values")
    dtype = "<f4" if scale < 0 else ">f4"
    payload = data[m.end():]
    expected = width * height * 4
    if len(payload) != expected:
        raise FormatError(f"{source}: expected {expected} data bytes, found {len(payload)}")
    arr = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return arr[::-1].astype(np.float64)


def write_pfm(path, field) -> None:
    Path(path).write_bytes(encode_pfm(field))


def read_pfm(path) -> np.ndarray:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from exc
    return decode_pfm(data, str(path))


def write_pgm_preview(path, field) -> None:
    """8-bit binary PGM with linear min-max scaling, for eyeballing only."""
    arr = np.asarray(field, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    span = hi - lo if hi > lo else 1.0
    pix = np.round((arr - lo) / span * 255.0).astype(np.uint8)
    height, width = pix.shape
    Path(path).write_bytes(f"P5\n{width} {height}\n255\n".encode("ascii") + pix.tobytes())


# --- result CSV ------------------------------------------------------------

CSV_COLUMNS = ("case", "prefilter", "estimator", "sigma", "trial", "delta_true", "delta_hat",
               "abs_err", "status", "kappa_ratio", "mask_fraction", "seed")


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def format_records(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r.case.value, r.prefilter.value, r.estimator.value, _num(r.sigma), r.trial,
                    _num(r.delta_true), _num(r.delta_hat), _num(r.abs_err), r.status,
                    _num(r.kappa_ratio), _num(r.mask_fraction), r.seed])
    return buf.getvalue()


def write_records(path, records: Iterable[ExperimentRecord]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(format_records(records))


def _finite(text: str, what: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"{what} is not finite")
    return v


def parse_records(text: str, source: str = "<csv>") -> list[ExperimentRecord]:
    rows = csv.reader(io.StringIO(text))
    try:
        header = next(rows)
    except StopIteration:
        raise FormatError(f"{source}: empty CSV, no header row") from None
    if tuple(header) != CSV_COLUMNS:
        raise FormatError(f"{source}:1: unexpected header {','.join(header)!r}")
    out = []
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise FormatError(f"{source}:{lineno}: expected {len(CSV_COLUMNS)} columns, got {len(row)}")
        f = dict(zip(CSV_COLUMNS, row))
        try:
            status = f["status"]
            if status not in ("ok", "failed"):
                raise ValueError(f"status must be ok or failed, got {status!r}")
            if status == "ok":
                delta_hat = _finite(f["delta_hat"], "delta_hat")
                abs_err = _finite(f["abs_err"], "abs_err")
            else:
                if f["delta_hat"] or f["abs_err"]:
                    raise ValueError("failed rows must leave delta_hat and abs_err empty")
                delta_hat = abs_err = None
            rec = ExperimentRecord(
                case=Case(f["case"]), prefilter=Prefilter(f["prefilter"]),
                estimator=Estimator(f["estimator"]), sigma=_finite(f["sigma"], "sigma"),
                trial=int(f["trial"]), delta_true=_finite(f["delta_true"], "delta_true"),
                delta_hat=delta_hat, abs_err=abs_err, status=status,
                kappa_ratio=_finite(f["kappa_ratio"], "kappa_ratio"),
                mask_fraction=_finite(f["mask_fraction"], "mask_fraction"), seed=int(f["seed"]))
        except ValueError as exc:
            raise FormatError(f"{source}:{lineno}: {exc}") from None
        out.append(rec)
    return out


def read_records(path) -> list[ExperimentRecord]:
    try:
        text = Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return parse_records(text, str(path))


# --- plan files ------------------------------------------------------------

_SCALARS = {
    "trials": int,
    "delta_true": float,
    "base_seed": int,
    "width": int,
    "height": int,
    "fringe_scale": float,
    "aggregator": str,
}


def parse_plan(text: str, source: str = "<plan>") -> ExperimentPlan:
    kwargs: dict = {}
    combos = []
    seen: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key == "combo":
                parts = value.split()
                if len(parts) != 3:
                    raise ValueError("combo needs: <case> <prefilter> <estimator>")
                combos.append(Combo(*parts))
                continue
            if key in seen:
                raise ValueError(f"duplicate key {key!r} (first on line {seen[key]})")
            seen[key] = lineno
            if key == "sigmas":
                kwargs["sigmas"] = tuple(float(v) for v in value.split(",") if v.strip())
            elif key in _SCALARS:
                kwargs[key] = _SCALARS[key](value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise FormatError(f"{source}:{lineno}: {exc}") from None
    if combos:
        kwargs["combos"] = tuple(combos)
    try:
        return ExperimentPlan(**kwargs)
    except ValueError as exc:
        raise FormatError(f"{source}: invalid plan: {exc}") from None


def read_plan(path) -> ExperimentPlan:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from exc
    return parse_plan(text, str(path))


def format_plan(plan: ExperimentPlan) -> str:
    lines = [f"combo = {c.case.value} {c.prefilter.value} {c.estimator.value}" for c in plan.combos]
    lines += [
        "sigmas = " + ", ".join(repr(s) for s in plan.sigmas),
        f"trials = {plan.trials}",
        f"delta_true = {plan.delta_true!r}",
        f"base_seed = {plan.base_seed}",
        f"width = {plan.width}",
        f"height = {plan.height}",
        f"fringe_scale = {plan.fringe_scale!r}",
        f"aggregator = {plan.aggregator.value}",
    ]
    return "\n".join(lines) + "\n"
