"""Persistence and encoding: session files, frame PNGs, digests, manifests.

Session files are versioned JSON, human-diffable except for the raster
payloads, which are base64 of little-endian raw bytes with their shape and
dtype declared alongside.  The instruction schema here is the one shared by
the HTTP API, the CLI, and the browser client.

canonical_json exists for cross-language fixtures: sorted keys, no spaces,
and integral floats emitted as integers so Python and ECMAScript serializers
produce identical bytes for the values our payloads use.
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .errors import SchemaError, ValidationError
from .instructions import (
    ContentInstruction,
    ImageInstruction,
    InstructionSet,
    MotionInstruction,
    Stroke,
    TrajectoryInstruction,
)
from .pipeline import EngineConfig, GenerationResult

SESSION_FORMAT = "videoloom-session"
SESSION_VERSION = 1

_MISSING = object()


# ---------------------------------------------------------------------------
# raw array payloads

def encode_array(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(np.asarray(arr, dtype=np.float64))
    return {
        "dtype": "float64",
        "shape": list(arr.shape),
        "data": base64.b64encode(arr.astype("<f8").tobytes()).decode("ascii"),
    }


def decode_array(obj, path: str) -> np.ndarray:
    if not isinstance(obj, dict):
        raise SchemaError("expected an array object", path)
    if obj.get("dtype") != "float64":
        raise SchemaError(f"unsupported dtype {obj.get('dtype')!r}", f"{path}.dtype")
    shape = obj.get("shape")
    if (
        not isinstance(shape, list)
        or not shape
        or not all(isinstance(d, int) and d > 0 for d in shape)
    ):
        raise SchemaError("shape must be a list of positive integers", f"{path}.shape")
    data = obj.get("data")
    if not isinstance(data, str):
        raise SchemaError("data must be a base64 string", f"{path}.data")
    try:
        raw = base64.b64decode(data.encode("ascii"), validate=True)
    except Exception as exc:
        raise SchemaError(f"invalid base64: {exc}", f"{path}.data") from None
    expected = int(np.prod(shape)) * 8
    if len(raw) != expected:
        raise SchemaError(
            f"payload holds {len(raw)} bytes, shape needs {expected}", f"{path}.data"
        )
    arr = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise SchemaError("array contains non-finite values", f"{path}.data")
    return arr


def encode_mask(mask: np.ndarray) -> dict:
    mask = np.asarray(mask, dtype=np.bool_)
    return {
        "shape": list(mask.shape),
        "data": base64.b64encode(mask.astype(np.uint8).tobytes()).decode("ascii"),
    }


def decode_mask(obj, path: str) -> np.ndarray:
    if not isinstance(obj, dict):
        raise SchemaError("expected a mask object", path)
    shape = obj.get("shape")
    if (
        not isinstance(shape, list)
        or len(shape) != 2
        or not all(isinstance(d, int) and d > 0 for d in shape)
    ):
        raise SchemaError("mask shape must be two positive integers", f"{path}.shape")
    data = obj.get("data")
    if not isinstance(data, str):
        raise SchemaError("data must be a base64 string", f"{path}.data")
    try:
        raw = base64.b64decode(data.encode("ascii"), validate=True)
    except Exception as exc:
        raise SchemaError(f"invalid base64: {exc}", f"{path}.data") from None
    if len(raw) != shape[0] * shape[1]:
        raise SchemaError(
            f"payload holds {len(raw)} bytes, shape needs {shape[0] * shape[1]}",
            f"{path}.data",
        )
    flat = np.frombuffer(raw, dtype=np.uint8)
    if not np.all((flat == 0) | (flat == 1)):
        raise SchemaError("mask bytes must be 0 or 1", f"{path}.data")
    return flat.reshape(shape).astype(np.bool_)


# ---------------------------------------------------------------------------
# instruction schema

def _points_to_json(points) -> list:
    return [[float(x), float(y)] for x, y in points]


def _points_from_json(obj, path: str) -> tuple[tuple[float, float], ...]:
    if not isinstance(obj, list):
        raise SchemaError("expected a list of [x, y] points", path)
    out = []
    for i, p in enumerate(obj):
        if (
            not isinstance(p, list)
            or len(p) != 2
            or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in p)
        ):
            raise SchemaError("point must be [x, y] finite numbers", f"{path}[{i}]")
        out.append((float(p[0]), float(p[1])))
    return tuple(out)


def instructions_to_dict(instructions: InstructionSet) -> dict:
    traj = instructions.trajectory
    return {
        "image": {"pixels": encode_array(instructions.image.pixels)},
        "content": {
            "text": instructions.content.text,
            "strokes": [
                {
                    "polyline": _points_to_json(s.polyline),
                    "radius": float(s.radius),
                    "color": [float(v) for v in s.color],
                }
                for s in instructions.content.strokes
            ],
        },
        "motion": {
            "motion": instructions.motion.motion,
            "magnitude": None
            if instructions.motion.magnitude is None
            else float(instructions.motion.magnitude),
        },
        "trajectory": None
        if traj is None
        else {
            "handles": _points_to_json(traj.handles),
            "targets": _points_to_json(traj.targets),
            "mask": encode_mask(traj.mask),
        },
        "lambda": float(instructions.lam),
    }


def _domain(path: str, fn):
    """Run a domain constructor, tagging its complaints with a field path."""
    try:
        return fn()
    except ValidationError as exc:
        raise SchemaError(str(exc), path) from exc


def _parse_image(obj, path: str) -> ImageInstruction:
    if not isinstance(obj, dict):
        raise SchemaError("expected an image object", path)
    pixels = decode_array(obj.get("pixels"), f"{path}.pixels")
    return _domain(path, lambda: ImageInstruction(pixels=pixels))


def _parse_content(obj, path: str) -> ContentInstruction:
    if not isinstance(obj, dict):
        raise SchemaError("expected a content object", path)
    text = obj.get("text")
    if not isinstance(text, str):
        raise SchemaError("text must be a string", f"{path}.text")
    strokes_obj = obj.get("strokes", [])
    if not isinstance(strokes_obj, list):
        raise SchemaError("strokes must be a list", f"{path}.strokes")
    strokes = []
    for i, s in enumerate(strokes_obj):
        spath = f"{path}.strokes[{i}]"
        if not isinstance(s, dict):
            raise SchemaError("expected a stroke object", spath)
        polyline = _points_from_json(s.get("polyline"), f"{spath}.polyline")
        radius = s.get("radius")
        if not isinstance(radius, (int, float)) or not math.isfinite(radius):
            raise SchemaError("radius must be a finite number", f"{spath}.radius")
        color = s.get("color")
        if not isinstance(color, list) or not all(
            isinstance(v, (int, float)) and math.isfinite(v) for v in color
        ):
            raise SchemaError("color must be a list of numbers", f"{spath}.color")
        strokes.append(
            _domain(
                spath,
                lambda pl=polyline, r=radius, c=color: Stroke(
                    polyline=pl, radius=float(r), color=tuple(float(v) for v in c)
                ),
            )
        )
    return _domain(
        path, lambda: ContentInstruction(text=text, strokes=tuple(strokes))
    )


def _parse_motion(obj, path: str) -> MotionInstruction:
    if not isinstance(obj, dict):
        raise SchemaError("expected a motion object", path)
    label = obj.get("motion")
    if not isinstance(label, str):
        raise SchemaError("motion must be a string", f"{path}.motion")
    magnitude = obj.get("magnitude")
    if magnitude is not None and (
        not isinstance(magnitude, (int, float)) or not math.isfinite(magnitude)
    ):
        raise SchemaError(
            "magnitude must be a finite number or null", f"{path}.magnitude"
        )
    return _domain(
        path,
        lambda: MotionInstruction(
            motion=label, magnitude=None if magnitude is None else float(magnitude)
        ),
    )


def _parse_trajectory(obj, path: str) -> TrajectoryInstruction:
    if not isinstance(obj, dict):
        raise SchemaError("expected a trajectory object", path)
    handles = _points_from_json(obj.get("handles"), f"{path}.handles")
    targets = _points_from_json(obj.get("targets"), f"{path}.targets")
    mask = decode_mask(obj.get("mask"), f"{path}.mask")
    return _domain(
        path,
        lambda: TrajectoryInstruction(handles=handles, targets=targets, mask=mask),
    )


def instructions_from_dict(
    obj,
    base: Optional[InstructionSet] = None,
    path: str = "instructions",
) -> InstructionSet:
    """Build an InstructionSet from its JSON form.

    With ``base`` given, absent keys keep the base value and an explicit
    null clears the trajectory; without it, image/content/motion are
    required.
    """
    if not isinstance(obj, dict):
        raise SchemaError("expected an instructions object", path)
    known = {"image", "content", "motion", "trajectory", "lambda"}
    for key in obj:
        if key not in known:
            raise SchemaError(f"unknown field {key!r}", f"{path}.{key}")

    image_obj = obj.get("image", _MISSING)
    if image_obj is _MISSING:
        if base is None:
            raise SchemaError("image is required", f"{path}.image")
        image = base.image
    else:
        image = _parse_image(image_obj, f"{path}.image")

    content_obj = obj.get("content", _MISSING)
    if content_obj is _MISSING:
        if base is None:
            raise SchemaError("content is required", f"{path}.content")
        content = base.content
    else:
        content = _parse_content(content_obj, f"{path}.content")

    motion_obj = obj.get("motion", _MISSING)
    if motion_obj is _MISSING:
        if base is None:
            raise SchemaError("motion is required", f"{path}.motion")
        motion = base.motion
    else:
        motion = _parse_motion(motion_obj, f"{path}.motion")

    traj_obj = obj.get("trajectory", _MISSING)
    if traj_obj is _MISSING:
        trajectory = None if base is None else base.trajectory
    elif traj_obj is None:
        trajectory = None
    else:
        trajectory = _parse_trajectory(traj_obj, f"{path}.trajectory")

    lam_obj = obj.get("lambda", _MISSING)
    if lam_obj is _MISSING:
        lam = 0.5 if base is None else base.lam
    elif isinstance(lam_obj, (int, float)) and math.isfinite(lam_obj):
        lam = float(lam_obj)
    else:
        raise SchemaError("lambda must be a finite number", f"{path}.lambda")

    return _domain(
        path,
        lambda: InstructionSet(
            image=image, content=content, motion=motion,
            trajectory=trajectory, lam=lam,
        ),
    )


# ---------------------------------------------------------------------------
# engine config schema

_CONFIG_FIELDS = {
    "height": int,
    "width": int,
    "channels": int,
    "num_frames": int,
    "num_steps": int,
    "beta_start": float,
    "beta_end": float,
    "schedule_kind": str,
    "strength": float,
    "sigma_image": float,
    "sigma_video": float,
    "frame_rate": float,
    "align_residual": bool,
}


def config_to_dict(config: EngineConfig) -> dict:
    out = {name: getattr(config, name) for name in _CONFIG_FIELDS}
    out["background"] = [float(v) for v in config.background]
    return out


def config_from_dict(obj, path: str = "config") -> EngineConfig:
    if not isinstance(obj, dict):
        raise SchemaError("expected a config object", path)
    kwargs = {}
    for key, value in obj.items():
        if key == "background":
            if not isinstance(value, list) or not all(
                isinstance(v, (int, float)) and math.isfinite(v) for v in value
            ):
                raise SchemaError(
                    "background must be a list of numbers", f"{path}.background"
                )
            kwargs["background"] = tuple(float(v) for v in value)
            continue
        if key not in _CONFIG_FIELDS:
            raise SchemaError(f"unknown field {key!r}", f"{path}.{key}")
        want = _CONFIG_FIELDS[key]
        if want is int:
            if not isinstance(value, int) or isinstance(value, bool):
                raise SchemaError("expected an integer", f"{path}.{key}")
            kwargs[key] = value
        elif want is float:
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise SchemaError("expected a finite number", f"{path}.{key}")
            kwargs[key] = float(value)
        elif want is bool:
            if not isinstance(value, bool):
                raise SchemaError("expected a boolean", f"{path}.{key}")
            kwargs[key] = value
        else:
            if not isinstance(value, str):
                raise SchemaError("expected a string", f"{path}.{key}")
            kwargs[key] = value
    return _domain(path, lambda: EngineConfig(**kwargs))


# ---------------------------------------------------------------------------
# session files

def session_payload(
    config: EngineConfig,
    instructions: InstructionSet,
    seed: int,
    digests: Optional[dict] = None,
) -> dict:
    return {
        "format": SESSION_FORMAT,
        "version": SESSION_VERSION,
        "seed": int(seed),
        "config": config_to_dict(config),
        "instructions": instructions_to_dict(instructions),
        "digests": dict(digests) if digests else None,
    }


def parse_session_payload(obj) -> tuple[EngineConfig, InstructionSet, int, Optional[dict]]:
    if not isinstance(obj, dict):
        raise SchemaError("expected a session object", "$")
    if obj.get("format") != SESSION_FORMAT:
        raise SchemaError(f"not a {SESSION_FORMAT} file", "format")
    version = obj.get("version")
    if version != SESSION_VERSION:
        raise SchemaError(
            f"unsupported version {version!r}; this build reads version "
            f"{SESSION_VERSION}",
            "version",
        )
    seed = obj.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise SchemaError("seed must be an integer", "seed")
    config = config_from_dict(obj.get("config"), "config")
    instructions = instructions_from_dict(obj.get("instructions"), None, "instructions")
    digests = obj.get("digests")
    if digests is not None and not isinstance(digests, dict):
        raise SchemaError("digests must be an object or null", "digests")
    c, h, w = instructions.image.shape
    if (config.channels, config.height, config.width) != (c, h, w):
        raise SchemaError(
            f"instruction image is {c}x{h}x{w} but config says "
            f"{config.channels}x{config.height}x{config.width}",
            "instructions.image",
        )
    return config, instructions, seed, digests


def save_session_file(
    path: Path | str,
    config: EngineConfig,
    instructions: InstructionSet,
    seed: int,
    digests: Optional[dict] = None,
) -> Path:
    path = Path(path)
    payload = session_payload(config, instructions, seed, digests)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def load_session_file(
    path: Path | str,
) -> tuple[EngineConfig, InstructionSet, int, Optional[dict]]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read session file: {exc}", "$") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", "$") from None
    return parse_session_payload(obj)


# ---------------------------------------------------------------------------
# canonical JSON (cross-language fixture form)

def _canonicalize(value):
    if isinstance(value, dict):
        return {k: _canonicalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonicalize(v) for v in value]
    if isinstance(value, float):
        # JSON.stringify(1.0) is "1"; match it so fixtures compare bytewise
        if value.is_integer():
            return int(value)
        return value
    return value


def canonical_json(value) -> str:
    return json.dumps(
        _canonicalize(value), sort_keys=True, separators=(",", ":"), allow_nan=False
    )


# ---------------------------------------------------------------------------
# frames on disk, digests, export

def pixels_to_png_bytes(pixels: np.ndarray) -> bytes:
    """Encode a (C,H,W) [0,1] tensor as PNG bytes (8-bit, lossless)."""
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 3 or pixels.shape[0] not in (1, 3, 4):
        raise ValidationError(
            f"PNG export supports 1, 3, or 4 channels, got shape {pixels.shape}"
        )
    quantized = np.clip(np.rint(pixels * 255.0), 0, 255).astype(np.uint8)
    hwc = np.moveaxis(quantized, 0, -1)
    mode = {1: "L", 3: "RGB", 4: "RGBA"}[pixels.shape[0]]
    img = Image.fromarray(hwc[..., 0] if mode == "L" else hwc, mode=mode)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def array_digest(arr: np.ndarray) -> str:
    arr = np.ascontiguousarray(np.asarray(arr, dtype=np.float64))
    return hashlib.sha256(arr.astype("<f8").tobytes()).hexdigest()


def result_digests(result: GenerationResult) -> dict:
    return {
        "intermediate": array_digest(result.intermediate),
        "edited": array_digest(result.edited),
        "raw": array_digest(result.raw.frames),
        "aligned": array_digest(result.aligned.frames),
    }


def export_result(
    result: GenerationResult,
    out_dir: Path | str,
    config: EngineConfig,
    extra: Optional[dict] = None,
) -> dict:
    """Write frame PNGs plus a manifest; returns the manifest dict."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "intermediate.png").write_bytes(pixels_to_png_bytes(result.intermediate))
    (out_dir / "edited.png").write_bytes(pixels_to_png_bytes(result.edited))
    files = {"intermediate": "intermediate.png", "edited": "edited.png"}
    for variant in ("raw", "aligned"):
        stack: np.ndarray = getattr(result, variant).frames
        names = []
        for i in range(stack.shape[0]):
            name = f"{variant}_{i:03d}.png"
            (out_dir / name).write_bytes(pixels_to_png_bytes(stack[i]))
            names.append(name)
        files[variant] = names
    manifest = {
        "seed": result.seed,
        "lambda": result.lam,
        "config": config_to_dict(config),
        "timings": {k: float(v) for k, v in result.timings.items()},
        "digests": result_digests(result),
        "frame_count": result.raw.num_frames,
        "files": files,
    }
    if extra:
        manifest.update(extra)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest
