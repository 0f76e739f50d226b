#!/usr/bin/env python3
"""Export torchvision ImageNet weights to the .cxrw archive format.

Run this on a machine with torch/torchvision installed (and network access
for the first download), then point --weights-dir of the benchmark at the
output directory:

    python tools/export_pretrained.py --out weights/

The benchmark loads one archive per architecture: alexnet.cxrw,
vgg11_bn.cxrw, squeezenet.cxrw, densenet121.cxrw.  Each archive holds the
backbone tensors under their torchvision state-dict names; the classifier
head is re-initialized by the benchmark itself, so head tensors are skipped
here.
"""

import argparse
import re
import struct
import sys
from pathlib import Path

MAGIC = b"CXRWTv1\n"

# benchmark name -> (torchvision constructor, head parameter prefix)
ARCHITECTURES = {
    "alexnet": ("alexnet", "classifier.6."),
    "vgg11_bn": ("vgg11_bn", "classifier.6."),
    "squeezenet": ("squeezenet1_0", "classifier.1."),
    "densenet121": ("densenet121", "classifier."),
}

# torchvision's densenet state dicts use legacy names like
# "features.denseblock1.denselayer1.norm.1.weight"; newer releases expose
# "...norm1.weight".  Normalize to the dotted-free form the benchmark uses.
_DENSENET_PATTERN = re.compile(
    r"^(.*denselayer\d+\.(?:norm|relu|conv))\.((?:[12]))\.(.*)$"
)


def normalize(name: str) -> str:
    m = _DENSENET_PATTERN.match(name)
    if m:
        return f"{m.group(1)}{m.group(2)}.{m.group(3)}"
    return name


def write_archive(tensors: dict, path: Path) -> None:
    with path.open("wb") as out:
        out.write(MAGIC)
        out.write(struct.pack("<Q", len(tensors)))
        for name in sorted(tensors):
            tensor = tensors[name]
            encoded = name.encode("utf-8")
            out.write(struct.pack("<I", len(encoded)))
            out.write(encoded)
            shape = list(tensor.shape)
            out.write(struct.pack("<I", len(shape)))
            for dim in shape:
                out.write(struct.pack("<i", dim))
            out.write(tensor.numpy().astype("<f4").tobytes())


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, required=True,
                        help="output directory for the .cxrw archives")
    parser.add_argument("--arch", choices=sorted(ARCHITECTURES), nargs="*",
                        help="subset of architectures (default: all)")
    args = parser.parse_args()

    try:
        import torch
        import torchvision.models as tvm
    except ImportError as exc:
        print(f"error: torch/torchvision required: {exc}", file=sys.stderr)
        return 2

    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.arch or sorted(ARCHITECTURES):
        ctor_name, head_prefix = ARCHITECTURES[name]
        ctor = getattr(tvm, ctor_name)
        model = ctor(weights="IMAGENET1K_V1")
        state = model.state_dict()
        tensors = {}
        for key, value in state.items():
            if key.startswith(head_prefix):
                continue  # the benchmark re-initializes the head
            if key.endswith("num_batches_tracked"):
                continue
            tensors[normalize(key)] = value.detach().float()
        out_path = args.out / f"{name}.cxrw"
        write_archive(tensors, out_path)
        print(f"wrote {out_path} ({len(tensors)} tensors)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
