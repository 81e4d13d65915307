#!/usr/bin/env python3
"""Validate a JSON document against a JSON Schema file."""
import argparse
import json
import sys

import jsonschema


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("schema")
    parser.add_argument("document")
    args = parser.parse_args()
    with open(args.schema, encoding="utf-8") as f:
        schema = json.load(f)
    with open(args.document, encoding="utf-8") as f:
        doc = json.load(f)
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as e:
        print(f"{args.document}: {e.message}", file=sys.stderr)
        return 1
    print(f"{args.document}: valid")
    return 0


if __name__ == "__main__":
    sys.exit(main())
