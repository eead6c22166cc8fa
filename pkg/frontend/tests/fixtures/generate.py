"""Regenerate the recorded payload fixtures from the engine's serializer.

The client must produce byte-identical canonical JSON for the same gestures,
so the reference bytes come from the server side. Run from this directory:

    python3 generate.py
"""

import json
from pathlib import Path

import numpy as np

from videoloom.instructions import (
    ContentInstruction,
    ImageInstruction,
    InstructionSet,
    MotionInstruction,
    Stroke,
    TrajectoryInstruction,
)
from videoloom.serialization import canonical_json, instructions_to_dict

HERE = Path(__file__).parent

HEIGHT = WIDTH = 16


def disc_mask(cx, cy, radius):
    """Same rule as the client's mask brush: pixel centers within radius."""
    mask = np.zeros((HEIGHT, WIDTH), dtype=bool)
    for y in range(HEIGHT):
        for x in range(WIDTH):
            if (x - cx) ** 2 + (y - cy) ** 2 <= radius**2:
                mask[y, x] = True
    return mask


def build_bundle():
    image = np.full((3, HEIGHT, WIDTH), 0.1)
    stroke = Stroke(
        polyline=((2.0, 3.0), (5.5, 3.0), (5.5, 7.25)),
        radius=1.5,
        color=(0.9, 0.3, 0.25),
    )
    trajectory = TrajectoryInstruction(
        handles=((8.0, 8.0),),
        targets=((10.0, 8.0),),
        mask=disc_mask(8.0, 8.0, 3.0),
    )
    return InstructionSet(
        image=ImageInstruction(pixels=image),
        content=ContentInstruction(text="one_blob", strokes=(stroke,)),
        motion=MotionInstruction(motion="static"),
        trajectory=trajectory,
        lam=0.25,
    )


def main():
    wire = instructions_to_dict(build_bundle())

    paint_patch = {"content": wire["content"]}
    drag_patch = {"trajectory": wire["trajectory"], "lambda": wire["lambda"]}
    motion_patch = {"motion": wire["motion"]}

    (HERE / "paint_patch.json").write_text(canonical_json(paint_patch))
    (HERE / "drag_patch.json").write_text(canonical_json(drag_patch))
    (HERE / "motion_patch.json").write_text(canonical_json(motion_patch))

    # assorted values for the canonical-form test
    cases = [
        {"value": {"b": 1, "a": [2.5, 3.0]}, "canonical": canonical_json({"b": 1, "a": [2.5, 3.0]})},
        {"value": {"lambda": 0.5}, "canonical": canonical_json({"lambda": 0.5})},
        {"value": {"nested": {"y": None, "x": [1.0, -2.0]}}, "canonical": canonical_json({"nested": {"y": None, "x": [1.0, -2.0]}})},
        {"value": [True, False, 0.125], "canonical": canonical_json([True, False, 0.125])},
    ]
    (HERE / "canonical_cases.json").write_text(json.dumps(cases, indent=2) + "\n")
    print("fixtures written to", HERE)


if __name__ == "__main__":
    main()
