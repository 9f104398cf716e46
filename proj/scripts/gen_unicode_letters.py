#!/usr/bin/env python3
"""Regenerates src/unicode_letters.cpp from the Python unicodedata tables.

Emits the sorted, merged list of [first, last] codepoint ranges whose general
category starts with 'L'. Run from the repository root:

    python3 scripts/gen_unicode_letters.py > src/unicode_letters.cpp
"""
import sys
import unicodedata

ranges = []
start = None
prev = None
for cp in range(0x110000):
    if unicodedata.category(chr(cp)).startswith("L"):
        if start is None:
            start = cp
        prev = cp
    else:
        if start is not None:
            ranges.append((start, prev))
            start = None
if start is not None:
    ranges.append((start, prev))

out = sys.stdout
out.write("// Generated by scripts/gen_unicode_letters.py (Unicode %s). Do not edit.\n"
          % unicodedata.unidata_version)
out.write("#include \"corpusprep/utf8.hpp\"\n\n")
out.write("#include <algorithm>\n\n")
out.write("namespace corpusprep::utf8 {\n")
out.write("namespace {\n\n")
out.write("struct Range { char32_t first; char32_t last; };\n\n")
out.write("constexpr Range kLetterRanges[] = {\n")
for i in range(0, len(ranges), 6):
    row = ranges[i:i + 6]
    out.write("    " + " ".join("{0x%X, 0x%X}," % r for r in row) + "\n")
out.write("};\n\n")
out.write("}  // namespace\n\n")
out.write("bool is_letter(char32_t cp) {\n")
out.write("    auto it = std::upper_bound(std::begin(kLetterRanges), std::end(kLetterRanges), cp,\n")
out.write("                               [](char32_t v, const Range& r) { return v < r.first; });\n")
out.write("    if (it == std::begin(kLetterRanges)) return false;\n")
out.write("    --it;\n")
out.write("    return cp >= it->first && cp <= it->last;\n")
out.write("}\n\n")
out.write("}  // namespace corpusprep::utf8\n")
sys.stderr.write("ranges: %d\n" % len(ranges))
