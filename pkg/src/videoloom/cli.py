"""Command-line entry point: serve, generate, bench, demo-scene.

Exit codes are a stable contract: 0 success, 1 runtime failure, 2 usage or
parse failure (bad flags, unreadable or invalid session files).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .errors import SchemaError, ValidationError
from .instructions import ImageInstruction, InstructionSet, ContentInstruction, MotionInstruction
from .metrics import best_label, image_alignment, measure_latency, text_alignment
from .pipeline import EngineConfig, generate
from .kernels import JIT_ENABLED
from .scenes import CONTENT_LABELS, MOTION_LABELS, render_scene_frame, sample_scene
from .serialization import (
    export_result,
    load_session_file,
    save_session_file,
)
from .sessions import service_config_from_env

logger = logging.getLogger("videoloom.cli")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

# chosen so the one_blob demo blob sits well inside the frame: a drag of
# up to 3 px in any direction keeps its full support in bounds
DEMO_SEED = 11


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="videoloom",
        description="Interactive blob-world video generation engine.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="run a session file headlessly")
    p_gen.add_argument("--session", required=True, help="session JSON file")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--seed", type=int, default=None, help="override the stored seed")
    p_gen.add_argument(
        "--lambda", dest="lam", type=float, default=None,
        help="override the stored interaction weight",
    )

    p_serve = sub.add_parser("serve", help="run the HTTP session service")
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--data-dir", default=None)

    p_bench = sub.add_parser("bench", help="latency and alignment report")
    p_bench.add_argument("--reps", type=int, default=5)
    p_bench.add_argument("--out", default=None, help="write the JSON report here")

    p_demo = sub.add_parser(
        "demo-scene", help="emit one ready-made session file per label pair"
    )
    p_demo.add_argument("--out", required=True, help="output directory")
    return parser


def _demo_instruction_set(
    content: str, motion: str, config: EngineConfig
) -> InstructionSet:
    scene = sample_scene(
        content, motion, DEMO_SEED,
        height=config.height, width=config.width,
        channels=config.channels, background=config.background,
    )
    frame = render_scene_frame(scene, 1, config.height, config.width)
    return InstructionSet(
        image=ImageInstruction(pixels=frame),
        content=ContentInstruction(text=content),
        motion=MotionInstruction(motion=motion),
        trajectory=None,
        lam=0.5,
    )


def cmd_generate(args) -> int:
    try:
        config, instructions, seed, _ = load_session_file(args.session)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    overrides = {}
    if args.seed is not None:
        seed = args.seed
        overrides["seed"] = args.seed
    if args.lam is not None:
        try:
            instructions = dataclasses.replace(instructions, lam=args.lam)
        except ValidationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        overrides["lambda"] = args.lam
    try:
        result = generate(instructions, config, seed)
        manifest = export_result(
            result, args.out, config,
            extra={"session_file": str(Path(args.session)), "overrides": overrides},
        )
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(
        f"wrote {manifest['frame_count']} raw + {manifest['frame_count']} aligned "
        f"frames to {args.out} (seed {result.seed}, lambda {result.lam})"
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    try:
        service_config = service_config_from_env(
            port=args.port, data_dir=args.data_dir
        )
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        serve(service_config)
    except OSError as exc:
        print(f"error: cannot serve: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.reps < 1:
        print("error: --reps must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    config = EngineConfig()
    instructions = _demo_instruction_set("one_blob", "drift_right", config)
    seed = 0
    # one warm-up run so compiled kernels do not pollute the medians
    generate(instructions, config, seed)
    report = measure_latency(instructions, config, args.reps, seed=seed)
    result = generate(instructions, config, seed)
    alignment = {
        "image_alignment": image_alignment(result.aligned, result.intermediate),
        "text_alignment": text_alignment(
            result.aligned, instructions.content.text,
            background=config.background[0],
        ),
        "best_label": best_label(result.aligned, background=config.background[0]),
    }
    payload = {
        "latency": report.to_dict(),
        "alignment": alignment,
        "seed": seed,
        "jit_enabled": JIT_ENABLED,
    }
    print(report.to_table())
    print(
        f"image_alignment {alignment['image_alignment']:.4f}  "
        f"text_alignment {alignment['text_alignment']:.4f}  "
        f"best_label {alignment['best_label']}"
    )
    if args.out is not None:
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"report written to {args.out}")
    else:
        print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def cmd_demo_scene(args) -> int:
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    config = EngineConfig()
    for content in CONTENT_LABELS:
        for motion in MOTION_LABELS:
            instructions = _demo_instruction_set(content, motion, config)
            name = f"session_{content}_{motion}.json"
            save_session_file(out_dir / name, config, instructions, seed=0)
    count = len(CONTENT_LABELS) * len(MOTION_LABELS)
    print(f"wrote {count} session files to {out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage already; normalize other codes
        return EXIT_USAGE if exc.code not in (0,) else EXIT_OK
    handlers = {
        "generate": cmd_generate,
        "serve": cmd_serve,
        "bench": cmd_bench,
        "demo-scene": cmd_demo_scene,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
