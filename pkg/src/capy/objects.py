"""The fixed detectable object catalog.

24 everyday classes (food, utensils, furniture, workplace tools) that the
`touches object` condition may name. The simulated detector only ever
reports these.
"""
from __future__ import annotations

OBJECT_CLASSES: tuple[str, ...] = (
    "apple",
    "banana",
    "orange",
    "carrot",
    "pizza",
    "cake",
    "donut",
    "sandwich",
    "bottle",
    "cup",
    "fork",
    "knife",
    "spoon",
    "bowl",
    "chair",
    "couch",
    "bed",
    "dining table",
    "potted plant",
    "laptop",
    "keyboard",
    "mouse",
    "cell phone",
    "book",
)

OBJECT_CLASS_SET = frozenset(OBJECT_CLASSES)

assert len(OBJECT_CLASSES) == 24
