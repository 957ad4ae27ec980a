"""Frame directories, mask images, CSV side files and the trajectory export.

The export is JSON Lines: a header object, one ``point`` record per frame
and one ``homography`` record per frame pair. Floats are written with
``repr`` precision so a round trip is bit-exact.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DimensionMismatch, EmptyDirectory, IoError, ParseError
from .features import Frame
from .geometry import Homography
from .masking import StaticMask
from .reconstruction import FrameRecord, SpeedSeries, Trajectory
from .tracking import BBox

EXPORT_SCHEMA = "piste-traj/1"


# --- PNG -------------------------------------------------------------------

def read_png(path) -> Frame:
    try:
        with Image.open(path) as im:
            im.load()
            return Frame(np.asarray(im.convert("RGB")))
    except FileNotFoundError:
        raise IoError(f"{path}: no such file") from None
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"{path}: cannot decode image ({exc})") from None


def write_png(frame: Frame | np.ndarray, path) -> None:
    rgb = frame.rgb if isinstance(frame, Frame) else np.asarray(frame, dtype=np.uint8)
    try:
        Image.fromarray(rgb).save(path, format="PNG")
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from None


def _image_size(path: Path) -> tuple[int, int]:
    try:
        with Image.open(path) as im:
            return im.size
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"{path}: cannot decode image ({exc})") from None


@dataclass(frozen=True)
class FrameSequence:
    """PNG frames of one video; file name order is time order."""

    paths: tuple[Path, ...]
    width: int
    height: int

    def __len__(self) -> int:
        return len(self.paths)

    def __getitem__(self, t: int) -> Frame:
        frame = read_png(self.paths[t])
        if frame.size != (self.width, self.height):
            raise DimensionMismatch(f"{self.paths[t].name} is {frame.width}x{frame.height}, "
                                    f"expected {self.width}x{self.height}")
        return frame

    def __iter__(self) -> Iterator[Frame]:
        for t in range(len(self)):
            yield self[t]


def load_sequence(directory) -> FrameSequence:
    d = Path(directory)
    if not d.is_dir():
        raise IoError(f"{d}: not a directory")
    paths = sorted((p for p in d.iterdir() if p.suffix.lower() == ".png" and p.is_file()),
                   key=lambda p: p.name)
    if len(paths) < 2:
        raise EmptyDirectory(f"{d}: need at least 2 PNG frames, found {len(paths)}")
    size = _image_size(paths[0])
    for p in paths[1:]:
        other = _image_size(p)
        if other != size:
            raise DimensionMismatch(f"{p.name} is {other[0]}x{other[1]}, "
                                    f"expected {size[0]}x{size[1]} like {paths[0].name}")
    return FrameSequence(tuple(paths), size[0], size[1])


def load_mask(path) -> StaticMask:
    """Single-channel PNG; any nonzero pixel is excluded from feature detection."""
    try:
        with Image.open(path) as im:
            a = np.asarray(im.convert("L") if im.mode not in ("L", "1", "I", "I;16") else im)
    except FileNotFoundError:
        raise IoError(f"{path}: no such file") from None
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"{path}: cannot decode mask ({exc})") from None
    return StaticMask(a != 0)


# --- CSV side files --------------------------------------------------------

def _csv_rows(text: str, header: Sequence[str]) -> Iterator[tuple[int, list[str]]]:
    seen_header = False
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if not seen_header:
            seen_header = True
            if cells == list(header):
                continue
            if cells[0].lower() == header[0]:
                raise ParseError(f"expected header {','.join(header)}", lineno)
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(cells)}", lineno)
        yield lineno, cells


def _int_cell(cells: list[str], col: int, lineno: int) -> int:
    try:
        return int(cells[col])
    except ValueError:
        raise ParseError(f"not an integer: {cells[col]!r}", lineno, col + 1) from None


def parse_speed_csv(text: str) -> SpeedSeries:
    """``frame,speed_mps`` rows covering a contiguous frame range."""
    by_frame: dict[int, float] = {}
    for lineno, cells in _csv_rows(text, ("frame", "speed_mps")):
        f = _int_cell(cells, 0, lineno)
        try:
            v = float(cells[1])
        except ValueError:
            raise ParseError(f"not a number: {cells[1]!r}", lineno, 2) from None
        if f in by_frame:
            raise ParseError(f"duplicate frame {f}", lineno, 1)
        by_frame[f] = v
    try:
        return SpeedSeries.from_mapping(by_frame)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def parse_pairing_csv(text: str) -> dict[int, int]:
    """``ref_frame,other_frame`` rows; each reference frame at most once."""
    pairing: dict[int, int] = {}
    for lineno, cells in _csv_rows(text, ("ref_frame", "other_frame")):
        r, o = _int_cell(cells, 0, lineno), _int_cell(cells, 1, lineno)
        if r in pairing:
            raise ParseError(f"reference frame {r} paired twice", lineno, 1)
        pairing[r] = o
    return pairing


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from None


def load_speed_csv(path) -> SpeedSeries:
    return parse_speed_csv(_read_text(path))


def load_pairing_csv(path) -> dict[int, int]:
    return parse_pairing_csv(_read_text(path))


# --- trajectory export -----------------------------------------------------

@dataclass
class ExportedRun:
    trajectory: Trajectory
    boxes: list[BBox | None]
    records: list[dict]

    def homography_chain(self) -> list[Homography]:
        """H_1..H_t, frame k-1 -> frame k."""
        return [Homography(np.array(r["h"]).reshape(3, 3)) for r in self.records]


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def format_export(traj: Trajectory, diagnostics: Sequence[FrameRecord] = ()) -> str:
    by_frame = {r.frame: r for r in diagnostics}
    lines = [_dumps({"schema": EXPORT_SCHEMA, "frame_index": traj.frame_index, "points": len(traj)})]
    for i, ((x, y), flag) in enumerate(zip(traj.points, traj.flags)):
        rec = {"type": "point", "frame": i, "x": float(x), "y": float(y), "flag": flag}
        r = by_frame.get(i)
        if r is not None:
            rec["box"] = [float(v) for v in r.box]
        lines.append(_dumps(rec))
    for r in diagnostics:
        if r.frame == 0 or r.homography is None:
            continue
        lines.append(_dumps({
            "type": "homography", "frame": r.frame, "h": r.homography.as_list(),
            "matches": r.matches, "inliers": r.inliers, "bridged": r.bridged,
        }))
    return "\n".join(lines) + "\n"


def export_trajectory(traj: Trajectory, diagnostics: Sequence[FrameRecord], path) -> None:
    try:
        Path(path).write_text(format_export(traj, diagnostics), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from None


def parse_export(text: str) -> ExportedRun:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty export document")
    try:
        docs = [json.loads(ln) for ln in lines]
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    head = docs[0]
    if head.get("schema") != EXPORT_SCHEMA:
        raise ParseError(f"unsupported schema {head.get('schema')!r}", 1)
    pts, flags, boxes, records = [], [], [], []
    for lineno, d in enumerate(docs[1:], start=2):
        kind = d.get("type")
        if kind == "point":
            if d["frame"] != len(pts):
                raise ParseError(f"point records out of order at frame {d['frame']}", lineno)
            pts.append((d["x"], d["y"]))
            flags.append(d["flag"])
            boxes.append(BBox(*d["box"]) if "box" in d else None)
        elif kind == "homography":
            records.append(d)
        else:
            raise ParseError(f"unknown record type {kind!r}", lineno)
    if len(pts) != head.get("points", len(pts)):
        raise ParseError(f"header announces {head['points']} points, found {len(pts)}")
    traj = Trajectory(np.array(pts, dtype=np.float64).reshape(-1, 2), flags, int(head["frame_index"]))
    return ExportedRun(traj, boxes, records)


def import_trajectory(path) -> ExportedRun:
    return parse_export(_read_text(path))
