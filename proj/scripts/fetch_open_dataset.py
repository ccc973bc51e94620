#!/usr/bin/env python3
"""Download, verify and index the exercise ECG dataset for full-scale runs.

The archive is expected to hold one `<id>.csv` record (`fs=` header, one
sample in uV per line) and one `<id>.ann` file per segment, the same formats
as fixtures/. Segment classes come from --classes (a two-column id,class CSV)
or from a class name embedded in the file name.

    scripts/fetch_open_dataset.py --url URL --sha256 HEX --dest data/open
    export RPEAK_OPEN_DATASET=data/open/manifest.csv
"""

import argparse
import csv
import hashlib
import shutil
import sys
import tarfile
import tempfile
import urllib.request
import zipfile
from pathlib import Path

CLASSES = ("before_VT2", "after_VT2", "before_VO2max", "VO2max", "recovery")
EXPECTED_SEGMENTS = 99


class IntegrityError(Exception):
    pass


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def download(url, out):
    with urllib.request.urlopen(url) as r, open(out, "wb") as f:
        shutil.copyfileobj(r, f)


def extract(archive, dest):
    if zipfile.is_zipfile(archive):
        with zipfile.ZipFile(archive) as z:
            z.extractall(dest)
    elif tarfile.is_tarfile(archive):
        with tarfile.open(archive) as t:
            t.extractall(dest, filter="data")
    else:
        raise IntegrityError(f"{archive}: not a zip or tar archive")


def class_of(stem, table):
    if stem in table:
        return table[stem]
    # longest first so "before_VO2max" wins over "VO2max"
    for c in sorted(CLASSES, key=len, reverse=True):
        if c.lower() in stem.lower():
            return c
    return None


def build_manifest(root, table):
    rows = []
    for rec in sorted(root.rglob("*.csv")):
        ann = rec.with_suffix(".ann")
        if not ann.exists():
            continue
        cls = class_of(rec.stem, table)
        if cls is None:
            raise IntegrityError(f"{rec.name}: cannot tell the intensity class")
        rows.append([rec.stem, cls, str(rec.relative_to(root)), sha256(rec),
                     str(ann.relative_to(root)), sha256(ann)])
    if not rows:
        raise IntegrityError("no <id>.csv / <id>.ann pairs in the archive")
    with open(root / "manifest.csv", "w", newline="") as f:
        f.write("# id,class,path,sha256,annotation_path,annotation_sha256\n")
        csv.writer(f, lineterminator="\n").writerows(rows)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--url", help="archive URL")
    src.add_argument("--archive", type=Path, help="already downloaded archive")
    ap.add_argument("--sha256", required=True, help="expected archive checksum")
    ap.add_argument("--dest", type=Path, required=True)
    ap.add_argument("--classes", type=Path, help="id,class CSV")
    a = ap.parse_args()

    table = {}
    if a.classes:
        with open(a.classes) as f:
            for row in csv.reader(f):
                if row and not row[0].startswith("#"):
                    table[row[0]] = row[1]
        bad = set(table.values()) - set(CLASSES)
        if bad:
            sys.exit(f"fetch: unknown classes {sorted(bad)}")

    a.dest.mkdir(parents=True, exist_ok=True)
    try:
        with tempfile.TemporaryDirectory() as tmp:
            archive = a.archive
            if a.url:
                archive = Path(tmp) / "download"
                download(a.url, archive)
            got = sha256(archive)
            if got != a.sha256.lower():
                raise IntegrityError(f"archive checksum {got} != {a.sha256}")
            extract(archive, a.dest)
        rows = build_manifest(a.dest, table)
    except IntegrityError as e:
        sys.exit(f"fetch: integrity error: {e}")

    print(f"{len(rows)} segments -> {a.dest / 'manifest.csv'}")
    if len(rows) != EXPECTED_SEGMENTS:
        print(f"warning: expected {EXPECTED_SEGMENTS} segments", file=sys.stderr)


if __name__ == "__main__":
    main()
