"""Runs the CLI on every scenario and checks the artifacts with third-party
parsers: reports against the schema with jsonschema, SVG with the stdlib XML
parser."""
import json
import pathlib
import subprocess
import sys
import tempfile
import xml.etree.ElementTree as ET

import jsonschema

tool, source = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])
schema = json.loads((source / "schemas" / "report.schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)

failures = 0
with tempfile.TemporaryDirectory() as out:
    for scenario in sorted((source / "scenarios").glob("*.json")):
        task = json.loads(scenario.read_text())["task"]
        proc = subprocess.run([tool, task, "--scenario", scenario, "--out", out, "--svg"],
                              capture_output=True, text=True)
        stem = pathlib.Path(out) / f"{scenario.stem}.{task}"
        json_path, svg_path = stem.parent / (stem.name + ".json"), stem.parent / (stem.name + ".svg")
        report = json.loads(json_path.read_text())
        errors = [e.message for e in validator.iter_errors(report)]
        svg = ET.parse(svg_path).getroot()
        ok = proc.returncode == report["exit_code"] and not errors and svg.tag.endswith("svg")
        print(f"{'ok  ' if ok else 'FAIL'} {scenario.name} exit={proc.returncode} {errors[:1]}")
        failures += not ok
sys.exit(1 if failures else 0)
