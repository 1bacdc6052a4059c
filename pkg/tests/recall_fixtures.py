"""Hand-written ground-truth / prediction fixtures with hand-computed mean recall.

Relation ids index ``REGISTRY``; ids 0-5 are the excluded relations.
Expected values are exact fractions worked out by hand.
"""

from fractions import Fraction

from relgen.corpus import RelationRegistry

REGISTRY = RelationRegistry.seeded().extended(
    ["holding", "riding", "eating", "looking at", "sitting on", "carrying"]
)
# 6 holding, 7 riding, 8 eating, 9 looking at, 10 sitting on, 11 carrying

FIXTURES = [
    {
        "name": "perfect predictor",
        "gt": {"a": {6, 7}, "b": {8}},
        "pred": {"a": [6, 7], "b": [8]},
        "per_class": {6: Fraction(1), 7: Fraction(1), 8: Fraction(1)},
        "mean": Fraction(1),
    },
    {
        # riding in both GTs, found once: 1/2; holding found: 1
        "name": "half recall on one class",
        "gt": {"a": {7, 6}, "b": {7}},
        "pred": {"a": [7, 6], "b": [8]},
        "per_class": {6: Fraction(1), 7: Fraction(1, 2)},
        "mean": Fraction(3, 4),
    },
    {
        # "on" (id 3) is excluded: no denominator; predicted-only class 9 ignored
        "name": "excluded and never-in-gt classes",
        "gt": {"a": {3, 6}, "b": {6}},
        "pred": {"a": [6, 9], "b": [9]},
        "per_class": {6: Fraction(1, 2)},
        "mean": Fraction(1, 2),
    },
    {
        # image a predicts nothing: holding 1/2, riding 0/1
        "name": "empty prediction",
        "gt": {"a": {6, 7}, "b": {6}},
        "pred": {"a": [], "b": [6]},
        "per_class": {6: Fraction(1, 2), 7: Fraction(0)},
        "mean": Fraction(1, 4),
    },
    {
        # holding 2/2, riding 1/2, eating 1/2 -> (1 + 1/2 + 1/2) / 3
        "name": "three images mixed",
        "gt": {"a": {6, 7, 8}, "b": {6}, "c": {7, 8}},
        "pred": {"a": [6, 7, 11], "b": [6], "c": [8, 9, 10]},
        "per_class": {6: Fraction(1), 7: Fraction(1, 2), 8: Fraction(1, 2)},
        "mean": Fraction(2, 3),
    },
]
