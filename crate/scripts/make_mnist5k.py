"""Write the 5000-sample MNIST subset bundled with mlxtend as IDX files.

The source CSV is sorted by label (pixels first, label last). Samples are
interleaved round-robin by class so that any contiguous index range, including
the trailing 10% held-out split, contains every digit.

Usage: python3 scripts/make_mnist5k.py path/to/mlxtend-*.whl data/mnist5k
"""
import gzip
import struct
import sys
import zipfile


def main(wheel, out_dir):
    with zipfile.ZipFile(wheel) as z:
        raw = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
    by_class = {}
    for line in raw.splitlines():
        if not line.strip():
            continue
        fields = [int(x) for x in line.split(",")]
        by_class.setdefault(fields[-1], []).append(bytes(fields[:-1]))
    images, labels = [], []
    per_class = min(len(v) for v in by_class.values())
    for i in range(per_class):
        for label in sorted(by_class):
            images.append(by_class[label][i])
            labels.append(label)
    n = len(images)
    with open(f"{out_dir}/train-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, 28, 28))
        for img in images:
            f.write(img)
    with open(f"{out_dir}/train-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(bytes(labels))
    print(n, "samples")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
