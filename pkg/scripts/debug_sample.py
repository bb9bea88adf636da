"""Trace individual synthesis samples to see where candidates die."""

import sys

import numpy as np

from engrasp.errors import InvalidStart
from engrasp.fixtures import fixture_hand, fixture_object
from engrasp.geometry import _kernels
from engrasp.geometry._kernels import build_bvh
from engrasp.hand.model import JointConfig, forward_kinematics
from engrasp.synthesis import (
    SamplingRegion,
    SynthesisParams,
    close_fingers,
    contact_set,
    evaluate_grasp,
    sample_palm_poses,
)

n = int(sys.argv[1]) if len(sys.argv) > 1 else 10
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 1

model = fixture_hand()
target = fixture_object()
region = SamplingRegion(target=target, standoff=0.002, spin=4)
params = SynthesisParams(n=n, seed=seed, step=0.005, delta=0.002)
g = target.volume_centroid()
object_bvh = build_bvh(target.triangle_coords())

bases = sample_palm_poses(region, n, seed)
for i, base in enumerate(bases):
    palm_mesh = model.links[model.palm_link].mesh.transformed(
        forward_kinematics(model, JointConfig(model), base)[model.palm_link])
    if _kernels.soup_intersects(build_bvh(palm_mesh.triangle_coords()), object_bvh):
        print(f"[{i}] palm intersects object at start")
        continue
    try:
        state = close_fingers(model, base, target, step=params.step)
    except InvalidStart as exc:
        print(f"[{i}] InvalidStart: {exc}")
        continue
    contacts = contact_set(model, state, delta=params.delta)
    result = evaluate_grasp(contacts, g)
    names = [name for name, _ in contacts]
    stops = {f: r for f, r in state.stopped.items()}
    dists = {name: round(d, 4) for name, (_, d) in state.contacts.items()}
    print(f"[{i}] caged={result.caged} d_h={result.d_h:.5f} contacts={names}")
    print(f"     stopped={stops}")
    print(f"     dists={dists}")
    cfg = state.config.as_dict()
    nz = {k: round(v, 3) for k, v in cfg.items() if v != 0.0}
    print(f"     angles={nz}")
