#!/usr/bin/env python3
"""Hand-derivable reference values for `patchlens verify`, computed in exact
rational arithmetic and emitted as a C++ header.

    compute_golden.py > tools/cli/golden_values.hpp
    compute_golden.py --check tools/cli/golden_values.hpp
"""
import argparse
import sys
from fractions import Fraction as F


def gd_identity(eta, y, steps):
    # K = I: w <- w - eta (w - y), from w = 0.
    w = [F(0)] * len(y)
    for _ in range(steps):
        w = [wi - eta * (wi - yi) for wi, yi in zip(w, y)]
    return w


def geometric_gain(lam, eta, t):
    if lam == 0:
        return eta * t
    return (1 - (1 - eta * lam) ** t) / lam


def b_entry(lam, m, eta, t):
    return (1 - (1 - eta * (lam + m)) ** t) / (m * (lam + m))


def woodbury_2x2(s, mu):
    # (S + mu mu^T)^{-1} mu for a 2x2 S, by the adjugate.
    a, b, c, d = (s[0][0] + mu[0] * mu[0], s[0][1] + mu[0] * mu[1],
                  s[1][0] + mu[1] * mu[0], s[1][1] + mu[1] * mu[1])
    det = a * d - b * c
    return [(d * mu[0] - b * mu[1]) / det, (-c * mu[0] + a * mu[1]) / det]


def pearson_squared(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy * sxy / (sxx * syy), sxy >= 0


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def values():
    eta = F(1, 10)
    out = []
    w1 = gd_identity(eta, [F(1), F(0)], 1)
    w2 = gd_identity(eta, [F(1), F(0)], 2)
    out += [("kGdOneStep0", w1[0]), ("kGdOneStep1", w1[1]),
            ("kGdTwoSteps0", w2[0]), ("kGdTwoSteps1", w2[1])]
    out += [("kAUnitLambdaTwoSteps", geometric_gain(F(1), eta, 2)),
            ("kAZeroLambdaNineSteps", geometric_gain(F(0), eta, 9)),
            ("kAUnitMeanOneStep", geometric_gain(F(1), eta, 1)),
            ("kBUnitMeanOneStep", b_entry(F(1), F(1), eta, 1)),
            ("kGainLambda4Eta01T3", geometric_gain(F(4), eta, 3))]
    # Lambda at mu = 0 is diagonal with l / (1 - (1 - eta l)^t) - l.
    lam, t = F(4), 3
    out.append(("kLambdaDiagL4Eta01T3", lam / (1 - (1 - eta * lam) ** t) - lam))
    wb = woodbury_2x2([[F(1), F(0)], [F(0), F(1)]], [F(1), F(0)])
    out += [("kWoodburyIdentity0", wb[0]), ("kWoodburyIdentity1", wb[1])]
    wb2 = woodbury_2x2([[F(2), F(1)], [F(1), F(3)]], [F(1), F(2)])
    out += [("kWoodburyGeneral0", wb2[0]), ("kWoodburyGeneral1", wb2[1])]
    r2, positive = pearson_squared([F(v) for v in (1, 2, 3, 4)], [F(v) for v in (1, 3, 2, 4)])
    assert positive and r2 == F(16, 25)
    out.append(("kPearson1234vs1324", F(4, 5)))
    return out


def render():
    lines = [
        "#pragma once",
        "",
        "// Generated by tools/golden/compute_golden.py from exact rational arithmetic.",
        "// Do not edit; rerun the script instead.",
        "",
        "#include <cstdint>",
        "",
        "namespace patchlens::cli::golden {",
        "",
    ]
    for name, value in values():
        lines.append(f"inline constexpr double {name} = {float(value)!r};  // {value}")
    lines.append("")
    lines.append(f'inline constexpr std::uint64_t kFnv1aOfA = 0x{fnv1a64(b"a"):016x}ULL;')
    lines.append(f'inline constexpr std::uint64_t kFnv1aOfPatchlens = 0x{fnv1a64(b"patchlens"):016x}ULL;')
    lines.append("")
    lines.append("}  // namespace patchlens::cli::golden")
    return "\n".join(lines) + "\n"


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--check", metavar="HEADER")
    args = parser.parse_args()
    text = render()
    if args.check:
        with open(args.check, encoding="utf-8") as fh:
            current = fh.read()
        if current != text:
            sys.stderr.write(f"{args.check} is stale; regenerate with compute_golden.py\n")
            return 1
        print(f"{args.check} is up to date")
        return 0
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
