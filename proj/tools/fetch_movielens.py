#!/usr/bin/env python3
"""Materialize MovieLens-100k as a u.data file.

Tries the GroupLens archive first and falls back to the copy bundled in the
`recbole` wheel (same 100,000 records, same order, converted from its atomic
.inter format). Usage: fetch_movielens.py OUT_DIR
"""
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
INTER = "recbole/dataset_example/ml-100k/ml-100k.inter"


def from_grouplens():
    with urllib.request.urlopen(GROUPLENS, timeout=30) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data").decode()


def from_recbole():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "recbole==1.2.1",
             "--no-deps", "-d", tmp, "-q"],
            check=True)
        wheel = next(pathlib.Path(tmp).glob("recbole-*.whl"))
        lines = zipfile.ZipFile(wheel).read(INTER).decode().splitlines()
    out = []
    for line in lines[1:]:
        user, item, rating, ts = line.split("\t")
        out.append(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}")
    return "\n".join(out) + "\n"


def main():
    if len(sys.argv) != 2:
        sys.exit("usage: fetch_movielens.py OUT_DIR")
    out_dir = pathlib.Path(sys.argv[1])
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        text = from_grouplens()
    except Exception as err:  # network blocked, DNS failure, ...
        print(f"grouplens unavailable ({err}); using recbole copy", file=sys.stderr)
        text = from_recbole()
    target = out_dir / "u.data"
    target.write_text(text)
    print(f"wrote {target} ({text.count(chr(10))} records)")


if __name__ == "__main__":
    main()
