#!/usr/bin/env python3
"""Convert an OSM XML extract into the road TSV read by `streetonomics`.

Every way carrying a `highway` tag becomes one line:

    highway_class<TAB>name<TAB>LINESTRING(lon lat, ...)

Filtering (excluded classes, numbered names, duplicates) happens in the
tool itself so the rules live in one place. Ways whose nodes are missing
from the extract are skipped and counted on stderr.

    osm_to_roads.py city.osm > roads.tsv
    osmium cat city.osm.pbf -f osm | osm_to_roads.py - > roads.tsv
"""

import argparse
import sys
import xml.etree.ElementTree as ET


def clean(value):
    # Tabs and newlines would break the TSV framing.
    return " ".join(value.split())


def convert(source, out):
    nodes = {}
    written = skipped = 0
    out.write("# highway_class\tname\tWKT\n")
    for _, elem in ET.iterparse(source, events=("end",)):
        if elem.tag == "node":
            nodes[elem.get("id")] = (elem.get("lon"), elem.get("lat"))
            elem.clear()
        elif elem.tag == "way":
            tags = {t.get("k"): t.get("v") for t in elem.iter("tag")}
            highway = tags.get("highway")
            if highway:
                refs = [nd.get("ref") for nd in elem.iter("nd")]
                if refs and all(r in nodes for r in refs):
                    coords = ", ".join(f"{nodes[r][0]} {nodes[r][1]}" for r in refs)
                    out.write(f"{clean(highway)}\t{clean(tags.get('name', ''))}\tLINESTRING({coords})\n")
                    written += 1
                else:
                    skipped += 1
            elem.clear()
    print(f"osm_to_roads: {written} ways written, {skipped} skipped for missing nodes", file=sys.stderr)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("osm", help="OSM XML file, or - for stdin")
    parser.add_argument("-o", "--output", help="output TSV (default stdout)")
    args = parser.parse_args()
    source = sys.stdin.buffer if args.osm == "-" else args.osm
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as out:
            convert(source, out)
    else:
        convert(source, sys.stdout)


if __name__ == "__main__":
    main()
