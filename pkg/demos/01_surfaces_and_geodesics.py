"""Surfaces 101: load a scan, measure geodesics, crop the face, subsample it.

Run:  python demos/01_surfaces_and_geodesics.py
"""

import numpy as np

from ams3d import (
    NOSE_TIP,
    crop_geodesic,
    farthest_point_sample,
    format_off,
    generate_identity,
    geodesic_distances,
    parse_off,
)

# A scan is an OFF text document with optional landmark annotations. The
# synthetic generator gives us one to play with; real deployments load the
# same format from the scan archive.
scan = generate_identity(seed=42)
print("scan:", scan)
print("landmarks:", scan.landmarks)

# Round-trip through the OFF text format is exact.
again = parse_off(format_off(scan))
print("OFF round-trip exact:", np.array_equal(again.vertices, scan.vertices))

# Geodesic distances run along the mesh edge graph, in millimeters.
nose = scan.landmarks[NOSE_TIP]
dist = geodesic_distances(scan, nose)
print(f"geodesic from nose tip: min {dist.min():.1f} mm, max {dist.max():.1f} mm")

# Cropping keeps the geodesic ball around the nose: the face region, minus
# whatever the sensor caught of the crown, neck, and ears.
face = crop_geodesic(scan, NOSE_TIP, radius=80.0)
print(f"cropped to {face.n_vertices} of {scan.n_vertices} vertices")

# Farthest-point sampling spreads a vertex budget evenly over the crop.
samples = farthest_point_sample(face, count=min(200, face.n_vertices),
                                seed_vertex=face.landmarks[NOSE_TIP])
print(f"sampled {len(samples)} vertices; first five: {samples[:5]}")

# The sample list is prefix-stable: asking for fewer points gives a prefix.
assert farthest_point_sample(face, 10, face.landmarks[NOSE_TIP]) == samples[:10]
print("prefix property holds")
