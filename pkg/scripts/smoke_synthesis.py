"""Quick synthesis smoke run against the built-in fixtures."""

import sys
import time

from engrasp.fixtures import fixture_hand, fixture_object
from engrasp.geometry.collision import BACKEND
from engrasp.synthesis import SamplingRegion, SynthesisParams, synthesize

n = int(sys.argv[1]) if len(sys.argv) > 1 else 20
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 1
step = float(sys.argv[3]) if len(sys.argv) > 3 else 0.005

model = fixture_hand()
target = fixture_object()
region = SamplingRegion(target=target, standoff=0.002, spin=4)
params = SynthesisParams(n=n, seed=seed, step=step, delta=0.002)

t0 = time.perf_counter()
templates = synthesize(model, region, params)
dt = time.perf_counter() - t0

print(f"backend={BACKEND} n={n} seed={seed} step={step}")
print(f"templates={len(templates)} time={dt:.2f}s ({dt / n * 1000:.1f} ms/sample)")
for t in templates[:8]:
    links = [name for name, _ in t.contacts]
    print(f"  {t.id} d_h={t.d_h:.5f} contacts={links}")
