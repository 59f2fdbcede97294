#!/usr/bin/env python3
# Copyright 2026 The spinphonon Authors
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

"""Validates every summary.json below a directory against the schema."""

import argparse
import json
import pathlib
import sys

import jsonschema


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("schema", type=pathlib.Path)
    parser.add_argument("root", type=pathlib.Path)
    args = parser.parse_args()

    validator = jsonschema.Draft202012Validator(json.loads(args.schema.read_text()))
    summaries = sorted(args.root.rglob("summary.json"))
    if not summaries:
        print(f"no summary.json files under {args.root}", file=sys.stderr)
        return 1
    failed = 0
    for path in summaries:
        errors = list(validator.iter_errors(json.loads(path.read_text())))
        for e in errors:
            print(f"{path}: {'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}", file=sys.stderr)
        failed += bool(errors)
    print(f"{len(summaries) - failed}/{len(summaries)} summaries valid")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
