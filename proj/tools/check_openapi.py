"""Validate captured service responses against docs/openapi.json."""

import argparse
import json
import sys

import jsonschema


def to_json_schema(node, components):
    """Inline $refs and turn OpenAPI 3.0 `nullable` into a JSON Schema type union."""
    if isinstance(node, list):
        return [to_json_schema(n, components) for n in node]
    if not isinstance(node, dict):
        return node
    if "$ref" in node:
        name = node["$ref"].split("/")[-1]
        return to_json_schema(components[name], components)
    out = {k: to_json_schema(v, components) for k, v in node.items() if k not in ("nullable", "example")}
    if node.get("nullable"):
        out = {"anyOf": [out, {"type": "null"}]}
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("document")
    ap.add_argument("capture")
    args = ap.parse_args()

    with open(args.document) as f:
        doc = json.load(f)
    schemas = doc["components"]["schemas"]
    responses = doc["components"]["responses"]
    with open(args.capture) as f:
        exchanges = [json.loads(line) for line in f if line.strip()]
    if not exchanges:
        print("no captured exchanges", file=sys.stderr)
        return 1

    failures = 0
    for ex in exchanges:
        op = doc["paths"][ex["path"]][ex["method"]]
        resp = op["responses"][str(ex["status"])]
        if "$ref" in resp:
            resp = responses[resp["$ref"].split("/")[-1]]
        content = resp.get("content")
        label = f'{ex["method"].upper()} {ex["path"]} -> {ex["status"]}'
        if content is None:
            continue
        if ex["content_type"] not in content:
            print(f"FAIL {label}: content type {ex['content_type']} not documented")
            failures += 1
            continue
        if ex["content_type"] != "application/json":
            continue
        schema = to_json_schema(content["application/json"]["schema"], schemas)
        try:
            jsonschema.validate(ex["body"], schema)
        except jsonschema.ValidationError as e:
            print(f"FAIL {label}: {e.message} at {list(e.absolute_path)}")
            failures += 1
    print(f"{len(exchanges)} exchanges checked, {failures} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
