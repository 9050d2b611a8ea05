"""Deterministic screenshot rendering.

The reference client does not do real 3D rendering. It emits a 320x180
PNG that is a pure function of (scene name, measurement list, camera):
a digest of the canonical state seeds a generator that paints a sky and
ground split plus a scatter of shapes, and one dot per measurement.
Identical state therefore yields identical bytes, which is what the
snapshot hashing and replay tests rely on.
"""

from __future__ import annotations

import hashlib
import io
import random

from PIL import Image, ImageDraw

from ..session.snapshot import canonical_json

WIDTH, HEIGHT = 320, 180


def render_screenshot(scene_name: str, measurements, camera) -> bytes:
    state = {"camera": camera, "measurements": list(measurements), "scene": scene_name}
    digest = hashlib.sha256(canonical_json(state)).digest()
    rng = random.Random(digest)

    sky = (100 + digest[0] % 100, 120 + digest[1] % 100, 160 + digest[2] % 96)
    ground = (60 + digest[3] % 80, 50 + digest[4] % 60, 30 + digest[5] % 50)
    horizon = 60 + digest[6] % 60

    img = Image.new("RGB", (WIDTH, HEIGHT), sky)
    draw = ImageDraw.Draw(img)
    draw.rectangle([0, horizon, WIDTH - 1, HEIGHT - 1], fill=ground)

    for _ in range(24):
        x0 = rng.randrange(WIDTH)
        y0 = rng.randrange(horizon, HEIGHT)
        w = rng.randrange(4, 40)
        h = rng.randrange(2, 12)
        shade = rng.randrange(-30, 31)
        color = tuple(max(0, min(255, c + shade)) for c in ground)
        draw.rectangle([x0, y0, min(WIDTH - 1, x0 + w), min(HEIGHT - 1, y0 + h)], fill=color)

    for index, measurement in enumerate(measurements):
        token = f"{index}:{measurement.get('kind', '')}:{measurement.get('id', '')}"
        mark = hashlib.sha256(token.encode()).digest()
        x = mark[0] % (WIDTH - 8) + 4
        y = mark[1] % (HEIGHT - 8) + 4
        color = (255 - mark[2] % 80, 80 + mark[3] % 100, 40 + mark[4] % 120)
        draw.ellipse([x - 3, y - 3, x + 3, y + 3], fill=color, outline=(20, 20, 20))

    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()
