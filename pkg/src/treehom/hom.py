"""Nondeleting, nonerasing tree homomorphisms.

A homomorphism maps every source symbol of rank k to a target-alphabet tree
over variables x1..xk.  Nondeleting: every variable occurs in the image.
Nonerasing: no image is a bare variable.  Both are enforced at construction,
so sizes never shrink under application and preimages are finite.
"""

from __future__ import annotations

from itertools import product

from .term import (
    RankedAlphabet,
    Tree,
    enumerate_trees,
    format_position,
    is_variable,
    positions,
    subtree_at,
    substitute_vars,
    tree_key,
    variable,
)
from .verdict import Verdict, verified, violated


class HomError(ValueError):
    pass


class TreeHomomorphism:
    def __init__(self, source: RankedAlphabet, target: RankedAlphabet, images: dict[str, Tree]):
        self.source = source
        self.target = target
        self.images = dict(images)
        self._validate()
        self._apply_memo: dict[Tree, Tree] = {}
        self._preimage_memo: dict[Tree, tuple[Tree, ...]] = {}

    def _validate(self):
        for name in self.target.names():
            if is_variable(name):
                raise HomError(f"target alphabet declares variable-like symbol {name}")
        for name in self.images:
            if name not in self.source:
                raise HomError(f"image given for undeclared symbol {name}")
        for name, rank in self.source.items():
            if name not in self.images:
                raise HomError(f"missing image for symbol {name}/{rank}")
            image = self.images[name]
            allowed = {variable(i) for i in range(1, rank + 1)}
            seen = set()
            for p in positions(image):
                node = subtree_at(image, p)
                if is_variable(node.label):
                    if node.children:
                        raise HomError(f"variable {node.label} used with arguments in h({name})")
                    if node.label not in allowed:
                        raise HomError(f"stray variable {node.label} in h({name}/{rank})")
                    seen.add(node.label)
                else:
                    if node.label not in self.target:
                        raise HomError(f"unknown target symbol {node.label} in h({name})")
                    if self.target.rank(node.label) != len(node.children):
                        raise HomError(
                            f"target symbol {node.label} used at wrong rank in h({name})"
                        )
            if seen != allowed:
                missing = ", ".join(sorted(allowed - seen))
                raise HomError(f"deleting homomorphism: h({name}) drops {missing}")
            if is_variable(image.label):
                raise HomError(f"erasing homomorphism: h({name}) is a bare variable")

    def image_of(self, name: str) -> Tree:
        try:
            return self.images[name]
        except KeyError:
            raise HomError(f"no image for symbol {name}") from None

    def apply(self, s: Tree) -> Tree:
        """Homomorphic image of a ground source tree."""
        hit = self._apply_memo.get(s)
        if hit is not None:
            return hit
        if s.label not in self.source:
            raise HomError(f"unknown source symbol {s.label}")
        theta = {variable(i): self.apply(c) for i, c in enumerate(s.children, start=1)}
        out = substitute_vars(self.image_of(s.label), theta)
        self._apply_memo[s] = out
        return out

    def preimage(self, t: Tree) -> tuple[Tree, ...]:
        """All ground source trees mapping onto t, sorted by (height, size, text).

        Finite because the homomorphism is nondeleting and nonerasing: any
        preimage of t has at most size(t) nodes.
        """
        hit = self._preimage_memo.get(t)
        if hit is not None:
            return hit
        found = []
        for name in sorted(self.source.names()):
            rank = self.source.rank(name)
            binding = _match_image(self.image_of(name), t)
            if binding is None:
                continue
            child_sets = [self.preimage(binding[variable(i)]) for i in range(1, rank + 1)]
            for combo in product(*child_sets):
                found.append(Tree(name, combo))
        out = tuple(sorted(found, key=tree_key))
        self._preimage_memo[t] = out
        return out

    def __repr__(self):
        return f"<hom {self.source!r} -> {self.target!r}>"


def _match_image(pattern: Tree, t: Tree, binding=None):
    """Match an image pattern against t; repeated variables must bind equal subtrees."""
    if binding is None:
        binding = {}
    if is_variable(pattern.label):
        bound = binding.get(pattern.label)
        if bound is None:
            binding[pattern.label] = t
            return binding
        return binding if bound == t else None
    if pattern.label != t.label or len(pattern.children) != len(t.children):
        return None
    for pc, tc in zip(pattern.children, t.children):
        if _match_image(pc, tc, binding) is None:
            return None
    return binding


def apply_hom(h: TreeHomomorphism, s: Tree) -> Tree:
    return h.apply(s)


def preimage(h: TreeHomomorphism, t: Tree) -> tuple[Tree, ...]:
    return h.preimage(t)


def check_tetris_free(h: TreeHomomorphism, height_bound: int) -> Verdict:
    """Bounded tetris-freeness: whenever h(s) = h(s'), the two source trees must
    have the same position set and pointwise equal symbol images.

    Checks all source trees of height <= height_bound; returns the first
    violating pair in (image group, enumeration order).
    """
    groups: dict[Tree, list[Tree]] = {}
    for s in enumerate_trees(h.source, height_bound):
        groups.setdefault(h.apply(s), []).append(s)
    for image, members in groups.items():
        first = members[0]
        first_pos = positions(first)
        for other in members[1:]:
            # Same-positions + pointwise-equal-images is an equivalence, so
            # comparing against the group's first member finds the first
            # violating pair.
            if positions(other) != first_pos:
                return violated(
                    height_bound,
                    (first, other),
                    f"position sets differ for preimages of {image.text}",
                )
            for p in first_pos:
                a = subtree_at(first, p).label
                b = subtree_at(other, p).label
                if h.image_of(a) != h.image_of(b):
                    return violated(
                        height_bound,
                        (first, other),
                        f"symbol images differ at position {format_position(p)}: "
                        f"h({a}) != h({b})",
                    )
    return verified(height_bound)
