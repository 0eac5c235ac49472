#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Generate include/corpuskit/nfc_data.hpp from Python's unicodedata.

The header carries three sorted tables driving canonical normalization (NFC):
combining classes, first-level canonical decompositions, and primary
composites. Hangul is algorithmic and excluded from the tables.

Usage: python3 scripts/gen_nfc_data.py > include/corpuskit/nfc_data.hpp
"""

import sys
import unicodedata

HANGUL_BASE, HANGUL_END = 0xAC00, 0xD7A3


def main() -> None:
    cc_entries = []
    decomp_entries = []
    comp_entries = []

    for cp in range(0x110000):
        ch = chr(cp)
        ccc = unicodedata.combining(ch)
        if ccc:
            cc_entries.append((cp, ccc))
        if HANGUL_BASE <= cp <= HANGUL_END:
            continue
        d = unicodedata.decomposition(ch)
        if not d or d.startswith("<"):
            continue
        parts = [int(p, 16) for p in d.split()]
        if len(parts) == 1:
            decomp_entries.append((cp, parts[0], 0))
        elif len(parts) == 2:
            a, b = parts
            decomp_entries.append((cp, a, b))
            # Primary composite iff recomposition is canonical (this folds in
            # the composition exclusions and non-starter decompositions).
            if unicodedata.combining(chr(a)) == 0 and unicodedata.normalize(
                "NFC", chr(a) + chr(b)
            ) == ch:
                comp_entries.append(((a << 21) | b, cp))
        else:
            raise AssertionError(f"unexpected decomposition arity at U+{cp:04X}")

    comp_entries.sort()

    out = sys.stdout
    out.write(
        "// SPDX-License-Identifier: Apache-2.0\n"
        "// Generated by scripts/gen_nfc_data.py from Python unicodedata "
        f"(Unicode {unicodedata.unidata_version}).\n"
        "// Do not edit by hand.\n"
        "#pragma once\n\n"
        "#include <cstdint>\n\n"
        "namespace corpuskit::detail {\n\n"
        "struct CcEntry { char32_t cp; uint8_t ccc; };\n"
        "struct DecompEntry { char32_t cp; char32_t a; char32_t b; };  "
        "// b == 0: singleton\n"
        "struct CompEntry { uint64_t key; char32_t composed; };        "
        "// key = (a << 21) | b\n\n"
    )

    out.write(f"inline constexpr CcEntry kCombiningClass[{len(cc_entries)}] = {{\n")
    for cp, ccc in cc_entries:
        out.write(f"    {{0x{cp:04X}, {ccc}}},\n")
    out.write("};\n\n")

    out.write(
        f"inline constexpr DecompEntry kCanonicalDecomp[{len(decomp_entries)}] = {{\n"
    )
    for cp, a, b in decomp_entries:
        out.write(f"    {{0x{cp:04X}, 0x{a:04X}, 0x{b:04X}}},\n")
    out.write("};\n\n")

    out.write(f"inline constexpr CompEntry kPrimaryComposite[{len(comp_entries)}] = {{\n")
    for key, cp in comp_entries:
        out.write(f"    {{0x{key:012X}ULL, 0x{cp:04X}}},\n")
    out.write("};\n\n")

    out.write("}  // namespace corpuskit::detail\n")


if __name__ == "__main__":
    main()
