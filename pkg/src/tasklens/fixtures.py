"""Built-in demo models.

unet is a 51-task segmentation network with encoder/bottleneck/decoder
groups, a code map, and a small source tree, sized so the fp16 baseline
misses its 200 fps target and leaves room for the optimizer to matter.
unet-plus appends two bottleneck convolutions, which diff picks up by
name.  random emits a seed-deterministic layered DAG for benchmarks.

Packages are written as gzip'd tars with zeroed timestamps and owners,
so the same inputs produce byte-identical archives.
"""

from __future__ import annotations

import gzip
import io
import json
import random
import tarfile
from pathlib import Path

from .formats import NumericFormat
from .ir import HardwareTask, ModelGraph, Tensor, serialize_graph, validate_graph

FIXTURE_NAMES = ("unet", "unet-plus", "random")

_MANIFEST_TIME = "2026-01-01T00:00:00Z"


class _Builder:
    def __init__(self, name: str, fps_target: float | None):
        self.name = name
        self.fps_target = fps_target
        self.tensors: dict[str, Tensor] = {}
        self.tasks: list[HardwareTask] = []

    def tensor(self, tid: str, shape: list[int]) -> str:
        elems = 1
        for d in shape:
            elems *= d
        self.tensors[tid] = Tensor(
            id=tid, elem_count=elems, format=NumericFormat.FP16, shape=tuple(shape)
        )
        return tid

    def task(
        self,
        name: str,
        kind: str,
        inputs: list[str],
        outputs: list[str],
        group: str,
        weight_count: int = 0,
        macs: int | None = None,
    ) -> int:
        tid = len(self.tasks)
        self.tasks.append(
            HardwareTask(
                id=tid,
                name=name,
                kind=kind,
                inputs=tuple(inputs),
                outputs=tuple(outputs),
                weight_count=weight_count,
                macs=macs,
                group=group,
            )
        )
        return tid

    def graph(self) -> ModelGraph:
        g = ModelGraph(
            name=self.name,
            tensors=self.tensors,
            tasks=tuple(self.tasks),
            fps_target=self.fps_target,
        )
        violations = validate_graph(g)
        if violations:
            raise AssertionError(f"fixture generator bug: {violations[0].message}")
        return g


def _conv(b: _Builder, name: str, group: str, src: str, cin: int, cout: int,
          spatial: int, kernel: int = 3) -> str:
    out = b.tensor(f"{name}.out", [1, cout, spatial, spatial])
    out_elems = cout * spatial * spatial
    b.task(
        name,
        "conv2d",
        [src],
        [out],
        group,
        weight_count=kernel * kernel * cin * cout,
        macs=out_elems * kernel * kernel * cin,
    )
    return out


def _relu(b: _Builder, name: str, group: str, src: str, shape: list[int]) -> str:
    out = b.tensor(f"{name}.out", shape)
    b.task(name, "elementwise", [src], [out], group,
           macs=shape[1] * shape[2] * shape[3])
    return out


def unet_graph(extra_bottleneck: bool = False) -> ModelGraph:
    """Segmentation U-Net on a 256x256 input: 51 tasks, 53 with the extras."""
    b = _Builder("unet-plus" if extra_bottleneck else "unet", fps_target=200.0)

    image = b.tensor("image", [1, 3, 256, 256])
    x = b.tensor("stem.norm.out", [1, 3, 256, 256])
    b.task("stem.norm", "elementwise", [image], [x], "encoder/stem", macs=3 * 256 * 256)

    # encoder: conv-relu-conv-relu-pool per block, halving spatial each time
    blocks = [(3, 32, 256), (32, 64, 128), (64, 128, 64), (128, 256, 32)]
    skips: list[tuple[str, int, int]] = []  # (tensor, channels, spatial)
    for i, (cin, cout, s) in enumerate(blocks, start=1):
        grp = f"encoder/enc{i}"
        x = _conv(b, f"enc{i}.conv1", grp, x, cin, cout, s)
        x = _relu(b, f"enc{i}.relu1", grp, x, [1, cout, s, s])
        x = _conv(b, f"enc{i}.conv2", grp, x, cout, cout, s)
        x = _relu(b, f"enc{i}.relu2", grp, x, [1, cout, s, s])
        skips.append((x, cout, s))
        pooled = b.tensor(f"enc{i}.pool.out", [1, cout, s // 2, s // 2])
        b.task(f"enc{i}.pool", "pool", [x], [pooled], grp,
               macs=cout * (s // 2) * (s // 2) * 4)
        x = pooled

    x = _conv(b, "bottleneck.conv1", "bottleneck", x, 256, 512, 16)
    x = _relu(b, "bottleneck.relu1", "bottleneck", x, [1, 512, 16, 16])
    x = _conv(b, "bottleneck.conv2", "bottleneck", x, 512, 512, 16)
    x = _relu(b, "bottleneck.relu2", "bottleneck", x, [1, 512, 16, 16])
    if extra_bottleneck:
        x = _conv(b, "bottleneck.conv3", "bottleneck", x, 512, 512, 16)
        x = _conv(b, "bottleneck.conv4", "bottleneck", x, 512, 512, 16)

    # decoder: upsample, concat the matching skip, then two convs
    ch = 512
    for i, (skip, skip_ch, s) in zip(range(4, 0, -1), reversed(skips)):
        grp = f"decoder/dec{i}"
        up = b.tensor(f"dec{i}.resize.out", [1, ch, s, s])
        b.task(f"dec{i}.resize", "resize", [x], [up], grp, macs=ch * s * s)
        cat = b.tensor(f"dec{i}.concat.out", [1, ch + skip_ch, s, s])
        b.task(f"dec{i}.concat", "concat", [up, skip], [cat], grp, macs=0)
        x = _conv(b, f"dec{i}.conv1", grp, cat, ch + skip_ch, skip_ch, s)
        x = _relu(b, f"dec{i}.relu1", grp, x, [1, skip_ch, s, s])
        x = _conv(b, f"dec{i}.conv2", grp, x, skip_ch, skip_ch, s)
        x = _relu(b, f"dec{i}.relu2", grp, x, [1, skip_ch, s, s])
        ch = skip_ch

    logits = _conv(b, "head.conv", "decoder/head", x, 32, 2, 256, kernel=1)
    probs = b.tensor("head.softmax.out", [1, 2, 256, 256])
    b.task("head.softmax", "softmax", [logits], [probs], "decoder/head",
           macs=2 * 256 * 256)
    return b.graph()


_RANDOM_KINDS = (
    "conv2d", "conv2d", "elementwise", "elementwise", "matmul",
    "pool", "softmax", "layernorm", "resize",
)


def random_graph(seed: int = 0, tasks: int = 64) -> ModelGraph:
    """Layered DAG with plausible sizes; fully determined by (seed, tasks)."""
    if tasks < 2:
        raise ValueError("random fixture needs at least 2 tasks")
    rng = random.Random(seed)
    b = _Builder(f"random-{seed}", fps_target=None)
    feed = b.tensor("in0", [1, 16, 64, 64])
    produced = [feed]
    for i in range(tasks):
        group = f"block{i // 8}"
        src = produced[-1] if i == 0 else rng.choice(produced[-min(4, len(produced)):])
        cin = b.tensors[src].shape[1]
        spatial = b.tensors[src].shape[2]
        # every eighth task merges a skip edge to keep the graph interesting
        if i % 8 == 5 and len(produced) > 3:
            other = rng.choice(produced[:-1])
            out = b.tensor(
                f"t{i}",
                [1, cin + b.tensors[other].shape[1], spatial, spatial]
                if b.tensors[other].shape[2] == spatial
                else [1, cin, spatial, spatial],
            )
            if b.tensors[other].shape[2] == spatial:
                b.task(f"n{i}.concat", "concat", [src, other], [out], group, macs=0)
            else:
                b.task(f"n{i}.eltwise", "elementwise", [src], [out], group,
                       macs=out_elems_of(b, out))
            produced.append(out)
            continue
        kind = rng.choice(_RANDOM_KINDS)
        if kind == "conv2d":
            cout = rng.choice((16, 32, 64))
            out = b.tensor(f"t{i}", [1, cout, spatial, spatial])
            b.task(f"n{i}.conv", "conv2d", [src], [out], group,
                   weight_count=9 * cin * cout,
                   macs=out_elems_of(b, out) * 9 * cin)
        elif kind == "matmul":
            k = cin * spatial * spatial
            n = rng.choice((64, 128, 256))
            out = b.tensor(f"t{i}", [1, n, 1, 1])
            b.task(f"n{i}.matmul", "matmul", [src], [out], group,
                   weight_count=k * n, macs=n * k)
        elif kind == "pool" and spatial >= 4:
            out = b.tensor(f"t{i}", [1, cin, spatial // 2, spatial // 2])
            b.task(f"n{i}.pool", "pool", [src], [out], group,
                   macs=out_elems_of(b, out) * 4)
        else:
            label = kind if kind != "pool" else "elementwise"
            out = b.tensor(f"t{i}", [1, cin, spatial, spatial])
            b.task(f"n{i}.{label}", label, [src], [out], group,
                   macs=out_elems_of(b, out))
        produced.append(out)
    return b.graph()


def out_elems_of(b: _Builder, tid: str) -> int:
    return b.tensors[tid].elem_count


# code map and source tree for the unet fixtures

_UNET_PY = """\
import torch
from torch import nn

from .blocks import ConvBlock, Decoder, Encoder


class UNet(nn.Module):
    def __init__(self, in_channels=3, classes=2, widths=(32, 64, 128, 256)):
        super().__init__()
        self.norm = nn.GroupNorm(1, in_channels)
        self.encoder = Encoder(in_channels, widths)
        self.bottleneck = ConvBlock(widths[-1], widths[-1] * 2, pool=False)
        self.decoder = Decoder(widths)
        self.head = nn.Conv2d(widths[0], classes, kernel_size=1)

    def forward(self, x):
        x = self.norm(x)
        x, skips = self.encoder(x)
        x = self.bottleneck(x)
        x = self.decoder(x, skips)
        return torch.softmax(self.head(x), dim=1)
"""

_BLOCKS_PY = """\
import torch
from torch import nn


class ConvBlock(nn.Module):
    def __init__(self, cin, cout, pool=True):
        super().__init__()
        self.conv1 = nn.Conv2d(cin, cout, 3, padding=1)
        self.conv2 = nn.Conv2d(cout, cout, 3, padding=1)
        self.pool = nn.MaxPool2d(2) if pool else None

    def forward(self, x):
        x = torch.relu(self.conv1(x))
        x = torch.relu(self.conv2(x))
        if self.pool is not None:
            return self.pool(x), x
        return x


class Encoder(nn.Module):
    def __init__(self, cin, widths):
        super().__init__()
        chans = [cin, *widths]
        self.blocks = nn.ModuleList(
            ConvBlock(a, b) for a, b in zip(chans, chans[1:])
        )

    def forward(self, x):
        skips = []
        for block in self.blocks:
            x, skip = block(x)
            skips.append(skip)
        return x, skips


class Decoder(nn.Module):
    def __init__(self, widths):
        super().__init__()
        ups = [widths[-1] * 2, *reversed(widths[1:])]
        self.blocks = nn.ModuleList(
            ConvBlock(up + skip, skip, pool=False)
            for up, skip in zip(ups, reversed(widths))
        )

    def forward(self, x, skips):
        for block, skip in zip(self.blocks, reversed(skips)):
            x = nn.functional.interpolate(x, scale_factor=2)
            x = block(torch.cat([x, skip], dim=1))
        return x
"""

_EXPORT_PY = """\
import torch

from model.unet import UNet


def export(path="unet.pt"):
    net = UNet().eval()
    sample = torch.zeros(1, 3, 256, 256)
    traced = torch.jit.trace(net, sample)
    traced.save(path)


if __name__ == "__main__":
    export()
"""

_SRC_FILES = {
    "model/unet.py": _UNET_PY,
    "model/blocks.py": _BLOCKS_PY,
    "export.py": _EXPORT_PY,
}


def _unet_code_map(g: ModelGraph) -> dict:
    """Three-deep call stacks for convs, shallower for the rest."""
    locations = [
        {"file": "model/unet.py", "line": 17, "snippet": "x = self.norm(x)"},
        {"file": "model/unet.py", "line": 18, "snippet": "x, skips = self.encoder(x)"},
        {"file": "model/unet.py", "line": 19, "snippet": "x = self.bottleneck(x)"},
        {"file": "model/unet.py", "line": 20, "snippet": "x = self.decoder(x, skips)"},
        {"file": "model/unet.py", "line": 21, "snippet": "return torch.softmax(self.head(x), dim=1)"},
        {"file": "model/blocks.py", "line": 13, "snippet": "x = torch.relu(self.conv1(x))"},
        {"file": "model/blocks.py", "line": 14, "snippet": "x = torch.relu(self.conv2(x))"},
        {"file": "model/blocks.py", "line": 16, "snippet": "return self.pool(x), x"},
        {"file": "model/blocks.py", "line": 47, "snippet": "x = nn.functional.interpolate(x, scale_factor=2)"},
        {"file": "model/blocks.py", "line": 48, "snippet": "x = block(torch.cat([x, skip], dim=1))"},
        {"file": "export.py", "line": 9, "snippet": "traced = torch.jit.trace(net, sample)"},
    ]
    NORM, ENC, BOT, DEC, HEAD, CONV1, CONV2, POOL, UP, CAT, TRACE = range(11)
    stack_for_stage = {"encoder": ENC, "bottleneck": BOT, "decoder": DEC}
    task_map: dict[str, list[int]] = {}
    for task in g.tasks:
        stage = task.group.split("/")[0]
        if task.name == "stem.norm":
            task_map[str(task.id)] = [NORM, TRACE]
        elif task.name == "head.conv" or task.name == "head.softmax":
            task_map[str(task.id)] = [HEAD, TRACE]
        elif task.kind == "conv2d":
            inner = CONV1 if task.name.endswith("conv1") or task.name.endswith("conv3") else CONV2
            task_map[str(task.id)] = [inner, stack_for_stage[stage], TRACE]
        elif task.kind == "pool":
            task_map[str(task.id)] = [POOL, ENC, TRACE]
        elif task.kind == "resize":
            task_map[str(task.id)] = [UP, DEC, TRACE]
        elif task.kind == "concat":
            task_map[str(task.id)] = [CAT, DEC, TRACE]
        elif task.kind == "elementwise":
            inner = CONV1 if task.name.endswith("relu1") else CONV2
            task_map[str(task.id)] = [inner, stack_for_stage[stage], TRACE]
        else:
            task_map[str(task.id)] = [TRACE]
    return {"locations": locations, "task_map": task_map}


# package assembly

def package_members(name: str, seed: int = 0, tasks: int = 64) -> dict[str, bytes]:
    if name == "unet":
        g = unet_graph()
    elif name == "unet-plus":
        g = unet_graph(extra_bottleneck=True)
    elif name == "random":
        g = random_graph(seed=seed, tasks=tasks)
    else:
        raise ValueError(f"unknown fixture {name!r}; choose from {FIXTURE_NAMES}")

    manifest = {
        "name": g.name,
        "created_at": _MANIFEST_TIME,
        "attributes": {"pool_window": 4},
    }
    members = {
        "graph.json": serialize_graph(g),
        "manifest.json": json.dumps(manifest, indent=2, sort_keys=True).encode() + b"\n",
    }
    if name in ("unet", "unet-plus"):
        code_map = _unet_code_map(g)
        members["code_map.json"] = (
            json.dumps(code_map, indent=2, sort_keys=True).encode() + b"\n"
        )
        for path, text in _SRC_FILES.items():
            members[f"src/{path}"] = text.encode()
    return members


def write_package(path: str | Path, members: dict[str, bytes]) -> None:
    """Deterministic .tgz: fixed metadata, sorted members, zeroed gzip mtime."""
    buf = io.BytesIO()
    with tarfile.open(fileobj=buf, mode="w", format=tarfile.USTAR_FORMAT) as tar:
        for member in sorted(members):
            data = members[member]
            info = tarfile.TarInfo(name=member)
            info.size = len(data)
            info.mtime = 0
            info.uid = 0
            info.gid = 0
            info.uname = ""
            info.gname = ""
            info.mode = 0o644
            tar.addfile(info, io.BytesIO(data))
    blob = gzip.compress(buf.getvalue(), mtime=0)
    Path(path).write_bytes(blob)


def build_fixture(name: str, out: str | Path, seed: int = 0, tasks: int = 64) -> Path:
    members = package_members(name, seed=seed, tasks=tasks)
    out = Path(out)
    write_package(out, members)
    return out
