#!/usr/bin/env python3
"""Generate the bundled demo GPS traces under data/demo_traces/.

Twelve vehicles do reflected random walks inside the default region
(lat 37.74..37.76, lon -122.42..-122.39), one point every 40 seconds over a
little more than an hour. Output format matches the trace parser:

    lat lon occupancy timestamp

Deterministic: rerunning reproduces the checked-in files byte for byte.
"""

import random
from pathlib import Path

LAT_MIN, LAT_MAX = 37.74, 37.76
LON_MIN, LON_MAX = -122.42, -122.39
VEHICLES = 12
POINTS = 110
STEP_SECONDS = 40
T0 = 1213084000


def reflect(value, low, high):
    if value < low:
        return 2 * low - value
    if value > high:
        return 2 * high - value
    return value


def main():
    out_dir = Path(__file__).resolve().parent.parent / "data" / "demo_traces"
    out_dir.mkdir(parents=True, exist_ok=True)

    rng = random.Random(20240615)
    manifest_lines = []
    for vid in range(1, VEHICLES + 1):
        lat = rng.uniform(LAT_MIN + 0.002, LAT_MAX - 0.002)
        lon = rng.uniform(LON_MIN + 0.003, LON_MAX - 0.003)
        occupied = rng.random() < 0.4
        lines = []
        for step in range(POINTS):
            t = T0 + step * STEP_SECONDS
            lines.append(f"{lat:.5f} {lon:.5f} {1 if occupied else 0} {t}")
            # ~100-200 m per 40 s step keeps implied speeds a few m/s.
            lat = reflect(lat + rng.uniform(-0.0015, 0.0015), LAT_MIN, LAT_MAX)
            lon = reflect(lon + rng.uniform(-0.0020, 0.0020), LON_MIN, LON_MAX)
            if rng.random() < 0.05:
                occupied = not occupied
        name = f"cab_{vid:02d}.txt"
        (out_dir / name).write_text("\n".join(lines) + "\n")
        manifest_lines.append(f"{vid} {name}")

    (out_dir / "manifest.txt").write_text("\n".join(manifest_lines) + "\n")
    print(f"wrote {VEHICLES} traces + manifest to {out_dir}")


if __name__ == "__main__":
    main()
