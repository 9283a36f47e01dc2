#!/usr/bin/env python3
"""Convert the UCI Adult training file (adult.data) into the a9a LIBSVM layout.

a9a encodes the 14 Adult attributes as 123 binary features: each continuous
attribute is split into quantile bins (5 bins, or 2 for the mostly-zero
capital gain/loss columns) and each categorical attribute is one-hot encoded
in the category order of adult.names. Missing values ('?') set no feature.
Label is +1 for '>50K' and -1 otherwise.

The bin edges are recomputed from the data, so the output matches a9a's
layout (n=32561, d=123, q=2) but not necessarily its exact bin boundaries.

usage: make_a9a.py adult.data > a9a
"""
import sys

CATEGORIES = {
    "workclass": "Private, Self-emp-not-inc, Self-emp-inc, Federal-gov, Local-gov, "
    "State-gov, Without-pay, Never-worked",
    "education": "Bachelors, Some-college, 11th, HS-grad, Prof-school, Assoc-acdm, "
    "Assoc-voc, 9th, 7th-8th, 12th, Masters, 1st-4th, 10th, Doctorate, 5th-6th, Preschool",
    "marital-status": "Married-civ-spouse, Divorced, Never-married, Separated, Widowed, "
    "Married-spouse-absent, Married-AF-spouse",
    "occupation": "Tech-support, Craft-repair, Other-service, Sales, Exec-managerial, "
    "Prof-specialty, Handlers-cleaners, Machine-op-inspct, Adm-clerical, Farming-fishing, "
    "Transport-moving, Priv-house-serv, Protective-serv, Armed-Forces",
    "relationship": "Wife, Own-child, Husband, Not-in-family, Other-relative, Unmarried",
    "race": "White, Asian-Pac-Islander, Amer-Indian-Eskimo, Other, Black",
    "sex": "Female, Male",
    "native-country": "United-States, Cambodia, England, Puerto-Rico, Canada, Germany, "
    "Outlying-US(Guam-USVI-etc), India, Japan, Greece, South, China, Cuba, Iran, Honduras, "
    "Philippines, Italy, Poland, Jamaica, Vietnam, Mexico, Portugal, Ireland, France, "
    "Dominican-Republic, Laos, Ecuador, Taiwan, Haiti, Columbia, Hungary, Guatemala, "
    "Nicaragua, Scotland, Thailand, Yugoslavia, El-Salvador, Trinadad&Tobago, Peru, Hong, "
    "Holand-Netherlands",
}

# (name, kind, bins) in column order
COLUMNS = [
    ("age", "cont", 5),
    ("workclass", "cat", None),
    ("fnlwgt", "cont", 5),
    ("education", "cat", None),
    ("education-num", "cont", 5),
    ("marital-status", "cat", None),
    ("occupation", "cat", None),
    ("relationship", "cat", None),
    ("race", "cat", None),
    ("sex", "cat", None),
    ("capital-gain", "zero", 2),
    ("capital-loss", "zero", 2),
    ("hours-per-week", "cont", 5),
    ("native-country", "cat", None),
]


def quantile_edges(values, bins):
    s = sorted(values)
    return [s[(len(s) * k) // bins] for k in range(1, bins)]


def bin_of(value, edges):
    b = 0
    for e in edges:
        if value >= e:
            b += 1
    return b


def main():
    rows = []
    with open(sys.argv[1]) as fh:
        for line in fh:
            parts = [p.strip() for p in line.strip().split(",")]
            if len(parts) != 15:
                continue
            rows.append(parts)

    edges = {}
    for col, (name, kind, bins) in enumerate(COLUMNS):
        if kind == "cont":
            edges[col] = quantile_edges([float(r[col]) for r in rows], bins)

    offsets = []
    width = 0
    for name, kind, bins in COLUMNS:
        offsets.append(width)
        width += len(CATEGORIES[name].split(", ")) if kind == "cat" else bins
    assert width == 123, width

    out = sys.stdout
    for r in rows:
        feats = []
        for col, (name, kind, bins) in enumerate(COLUMNS):
            v = r[col]
            if v == "?":
                continue
            if kind == "cat":
                idx = CATEGORIES[name].split(", ").index(v)
            elif kind == "zero":
                idx = 0 if float(v) == 0.0 else 1
            else:
                idx = bin_of(float(v), edges[col])
            feats.append(offsets[col] + idx + 1)
        label = "+1" if r[14].startswith(">50K") else "-1"
        out.write(label + " " + " ".join(f"{f}:1" for f in sorted(feats)) + "\n")


if __name__ == "__main__":
    main()
