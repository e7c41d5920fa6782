#!/usr/bin/env python3
# Copyright 2026 The NEMF Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Materialize MovieLens 100K as GroupLens-format u.data / u.item files.

The GroupLens download host is not always reachable (offline CI, sandboxes).
The RecBole wheel on PyPI ships a verbatim copy of the 100K ratings in its
atomic-file layout, so this script pulls that wheel through pip and rewrites
it into the original TAB / pipe separated files the loaders expect.

If you already have the official ml-100k.zip, just unpack it into data/ml-100k
and skip this script.
"""

import argparse
import glob
import os
import subprocess
import sys
import tempfile
import zipfile

GENRES = [
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy",
    "Crime", "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror",
    "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]

INTER = "recbole/dataset_example/ml-100k/ml-100k.inter"
ITEM = "recbole/dataset_example/ml-100k/ml-100k.item"


def fetch_wheel(workdir):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "recbole==1.2.1", "--no-deps",
         "-d", workdir, "-q"],
        check=True)
    wheels = glob.glob(os.path.join(workdir, "recbole-*.whl"))
    if not wheels:
        raise SystemExit("pip did not produce a recbole wheel")
    return wheels[0]


def convert(wheel, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    with zipfile.ZipFile(wheel) as z:
        inter = z.read(INTER).decode("utf-8").splitlines()
        items = z.read(ITEM).decode("latin-1").splitlines()

    n_ratings = 0
    with open(os.path.join(out_dir, "u.data"), "w", newline="\n") as f:
        for line in inter[1:]:
            if not line.strip():
                continue
            user, item, rating, ts = line.split("\t")
            f.write(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}\n")
            n_ratings += 1

    index = {g: k for k, g in enumerate(GENRES)}
    n_items = 0
    with open(os.path.join(out_dir, "u.item"), "w", newline="\n",
              encoding="latin-1") as f:
        for line in items[1:]:
            if not line.strip():
                continue
            item, title, year, classes = line.split("\t")
            flags = [0] * len(GENRES)
            for g in classes.split():
                if g not in index:
                    raise SystemExit(f"unexpected genre {g!r} for item {item}")
                flags[index[g]] = 1
            shown = f"{title} ({year})" if year else title
            f.write("|".join([item, shown, "", "", ""] + [str(x) for x in flags]) + "\n")
            n_items += 1

    print(f"wrote {n_ratings} ratings and {n_items} items to {out_dir}")
    if n_ratings != 100000 or n_items != 1682:
        raise SystemExit("unexpected record counts; source wheel changed?")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=os.path.join(
        os.path.dirname(os.path.abspath(__file__)), "..", "data", "ml-100k"))
    parser.add_argument("--wheel", help="use an already downloaded recbole wheel")
    args = parser.parse_args()
    if args.wheel:
        convert(args.wheel, args.out)
        return
    with tempfile.TemporaryDirectory() as tmp:
        convert(fetch_wheel(tmp), args.out)


if __name__ == "__main__":
    main()
