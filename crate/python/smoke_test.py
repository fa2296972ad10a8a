#!/usr/bin/env python3
"""Build the rdo extension module and exercise its surface end to end:
spectral transforms against numpy, GP determinism, both PDE solvers,
and the generate -> train -> predict -> save/load -> evaluate loop."""

import math
import os
import shutil
import subprocess
import sys
import tempfile

import numpy as np

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build_extension() -> None:
    subprocess.run(["cargo", "build", "-p", "rdo-py"], cwd=ROOT, check=True)
    src = os.path.join(ROOT, "target", "debug", "librdo.so")
    dst_dir = tempfile.mkdtemp(prefix="rdo_py_")
    shutil.copy2(src, os.path.join(dst_dir, "rdo.so"))
    sys.path.insert(0, dst_dir)


build_extension()
import rdo  # noqa: E402

checks = 0


def ok(name: str, cond: bool) -> None:
    global checks
    assert cond, f"FAILED: {name}"
    checks += 1
    print(f"ok {checks} - {name}")


ok("version is a dotted triple", len(rdo.version().split(".")) == 3)

# Spectral pair against numpy (forward carries the 1/m normalization).
x = np.sin(np.linspace(0.0, 4.0 * np.pi, 32, endpoint=False)) + 0.25
ours = rdo.rfft(list(x))
ref = np.fft.rfft(x) / len(x)
ok(
    "rfft matches numpy/m within 1e-12",
    max(abs(complex(re, im) - r) for (re, im), r in zip(ours, ref)) < 1e-12,
)
back = rdo.irfft(ours, len(x))
ok("irfft round-trips within 1e-12", float(np.max(np.abs(np.array(back) - x))) < 1e-12)

# GP draws are a pure function of the seed.
pts = list(np.linspace(0.0, 1.0, 17))
ok(
    "gp draws reproduce for equal seeds",
    rdo.gp_sample("exponential", 1.0, 1.0, 0.0, pts, 3)
    == rdo.gp_sample("exponential", 1.0, 1.0, 0.0, pts, 3),
)
ok(
    "gp draws differ across seeds",
    rdo.gp_sample("exponential", 1.0, 1.0, 0.0, pts, 3)
    != rdo.gp_sample("exponential", 1.0, 1.0, 0.0, pts, 4),
)

# SBVP with a = 1: -u'' + 15 u = 10, u(0)=1, u(1)=0 has the closed form
# u = 2/3 + A cosh(kx) + B sinh(kx), k = sqrt(15).
k = math.sqrt(15.0)
xs = np.linspace(0.0, 1.0, 257)
A = 1.0 / 3.0
B = -(2.0 / 3.0 + A * math.cosh(k)) / math.sinh(k)
exact = 2.0 / 3.0 + A * np.cosh(k * xs) + B * np.sinh(k * xs)
u = np.array(rdo.sbvp_solution([1.0] * 257))
ok("sbvp solver matches the closed form within 1e-3", float(np.max(np.abs(u - exact))) < 1e-3)

# Burgers preserves the zero state exactly.
z = rdo.burgers_solution([0.0] * 33, 0.1, 0.01, 10)
ok("burgers keeps the zero state", max(abs(v) for row in z for v in row) == 0.0)

ok("rl2e of a doubled signal is 1", abs(rdo.rl2e([2.0, 4.0], [1.0, 2.0]) - 1.0) < 1e-15)

# End to end: generate, train a small model, predict across
# resolutions, round-trip through a checkpoint, evaluate.
tmp = tempfile.mkdtemp(prefix="rdo_smoke_")
data = os.path.join(tmp, "sbvp.rdod")
ok("dataset generation reports the sample count", rdo.gen_dataset("sbvp", 20, [9, 17], 5, data) == 20)

config = """
[experiment]
id = "sbvp"
test_resolutions = [9, 17]

[model]
kind = "rdo"
modes = 3
d_phi = 8
trunk = [1, 16, 16]

[train]
epochs = 3
batch_size = 4
train_resolution = 9
"""
m = rdo.Model.train(config, data)
ok(
    "trained model reports its identity",
    (m.kind, m.experiment, m.train_resolution) == ("rdo", "sbvp", 9),
)

grid9 = list(np.linspace(0.0, 1.0, 9))
pred9 = m.predict([1.0] * 9, grid9, 1)
ok("prediction yields one value per query", len(pred9) == 9)
pred17 = m.predict([1.0] * 17, list(np.linspace(0.0, 1.0, 17)), 1)
ok(
    "the same weights answer at a finer resolution",
    len(pred17) == 17 and all(math.isfinite(v) for v in pred17),
)

path = os.path.join(tmp, "model.rdoc")
m.save(path)
ok("checkpoint round-trip preserves predictions", rdo.Model.load(path).predict([1.0] * 9, grid9, 1) == pred9)

rows = m.evaluate(data, [9, 17])
ok("evaluation returns one row per resolution", [r[0] for r in rows] == [9, 17])
ok("rl2e cells are finite", all(r[1] is not None and math.isfinite(r[1]) for r in rows))

print(f"\nall {checks} smoke checks passed")
