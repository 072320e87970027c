#!/usr/bin/env python3
"""Convert a Geom-GCN style dataset folder to the hlp directory format.

Input folder: out1_node_feature_label.txt, out1_graph_edges.txt.
Feature column is comma separated: dense values, or for the actor/film set
the indices of nonzero entries (pass --sparse-indices, with --n-features).

Output folder: meta, edges.tsv, features.tsv, labels.tsv.
"""

import argparse
import pathlib
import sys


def read_rows(path):
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    return [line.split("\t") for line in lines[1:] if line.strip()]


def convert(src, dst, name, sparse_indices=False, n_features=None, split_sizes=None):
    src, dst = pathlib.Path(src), pathlib.Path(dst)
    nodes = read_rows(src / "out1_node_feature_label.txt")
    features, labels = {}, {}
    width = 0
    for row in nodes:
        if len(row) != 3:
            raise ValueError(f"bad node row: {row!r}")
        node = int(row[0])
        values = [v for v in row[1].split(",") if v != ""]
        if sparse_indices:
            entries = {int(v): 1.0 for v in values}
            width = max([width] + [i + 1 for i in entries])
        else:
            entries = {i: float(v) for i, v in enumerate(values) if float(v) != 0.0}
            width = max(width, len(values))
        features[node] = entries
        labels[node] = int(row[2])
    n = len(nodes)
    if sorted(labels) != list(range(n)):
        raise ValueError("node ids are not 0..n-1")
    d = n_features if n_features is not None else width
    if width > d:
        raise ValueError(f"feature index {width - 1} exceeds --n-features {d}")
    edges = sorted({(int(r[0]), int(r[1])) for r in read_rows(src / "out1_graph_edges.txt")})

    dst.mkdir(parents=True, exist_ok=True)
    meta = [f"name={name}", f"n_nodes={n}", f"n_features={d}", f"n_classes={max(labels.values()) + 1}"]
    if split_sizes:
        meta.append(f"split_sizes={split_sizes}")
    (dst / "meta").write_text("\n".join(meta) + "\n")
    with open(dst / "edges.tsv", "w") as f:
        for a, b in edges:
            f.write(f"{a}\t{b}\n")
    with open(dst / "features.tsv", "w") as f:
        for node in range(n):
            for j, v in sorted(features[node].items()):
                f.write(f"{node}\t{j}\t{v:.17g}\n")
    with open(dst / "labels.tsv", "w") as f:
        for node in range(n):
            f.write(f"{node}\t{labels[node]}\n")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--name", help="dataset name (default: destination folder name)")
    p.add_argument("--sparse-indices", action="store_true", help="feature column lists nonzero indices")
    p.add_argument("--n-features", type=int)
    p.add_argument("--split-sizes", help="absolute train,val,test counts recorded in meta")
    args = p.parse_args(argv)
    try:
        convert(args.src, args.dst, args.name or pathlib.Path(args.dst).name, args.sparse_indices,
                args.n_features, args.split_sizes)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
