"""Recursive-descent parser for model strings such as ``S(3,1)xS(3,1)`` or
``CoshCyl(S(5,1), alpha=2)``.

    model  := factor ('x' factor)* | 'CoshCyl(' model ',' 'alpha=' number ')'
    factor := 'S(' int ',' number ')' | 'CP(' int ',' number ')' | 'Circ(' number ')'

A number may carry a trailing ``pi`` (``2pi``) or be ``pi`` alone.
"""
from __future__ import annotations

import math
import re

from .curvature import Circle, ComplexProjective, CoshCylinder, ModelSpace, Sphere

_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_INT = re.compile(r"\d+")


class DSLError(ValueError):
    def __init__(self, text, pos, msg):
        self.text, self.pos, self.msg = text, pos, msg
        super().__init__(f"{msg} at position {pos}\n  {text}\n  {' ' * pos}^")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, msg, pos=None):
        raise DSLError(self.text, self.pos if pos is None else pos, msg)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, lit):
        self.skip()
        return self.text.startswith(lit, self.pos)

    def expect(self, lit):
        if not self.peek(lit):
            self.error(f"expected {lit!r}")
        self.pos += len(lit)

    def integer(self):
        self.skip()
        m = _INT.match(self.text, self.pos)
        if not m:
            self.error("expected an integer")
        self.pos = m.end()
        return int(m.group())

    def number(self):
        self.skip()
        if self.text.startswith("pi", self.pos):
            self.pos += 2
            return math.pi
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.error("expected a number")
        self.pos = m.end()
        val = float(m.group())
        if self.text.startswith("pi", self.pos):
            self.pos += 2
            val *= math.pi
        return val

    def build(self, ctor, start, *args):
        try:
            return ctor(*args)
        except ValueError as exc:
            self.error(str(exc), start)

    def factor(self):
        start = self.pos
        if self.peek("S("):
            self.expect("S(")
            m = self.integer()
            self.expect(",")
            k = self.number()
            self.expect(")")
            return self.build(Sphere, start, m, k)
        if self.peek("CP("):
            self.expect("CP(")
            m = self.integer()
            self.expect(",")
            c = self.number()
            self.expect(")")
            return self.build(ComplexProjective, start, m, c)
        if self.peek("Circ("):
            self.expect("Circ(")
            t = self.number()
            self.expect(")")
            return self.build(Circle, start, t)
        self.error("expected S(, CP( or Circ(")

    def model(self):
        self.skip()
        start = self.pos
        if self.peek("CoshCyl("):
            self.expect("CoshCyl(")
            self.skip()
            inner = self.pos
            base = self.model()
            if isinstance(base, CoshCylinder):
                self.error("cylinder base must be a product model", inner)
            self.expect(",")
            self.expect("alpha=")
            alpha = self.number()
            self.expect(")")
            return self.build(CoshCylinder, start, base, alpha)
        facs = [self.factor()]
        while self.peek("x"):
            self.expect("x")
            facs.append(self.factor())
        return ModelSpace(tuple(facs))


def parse_model(text: str):
    p = _Parser(text)
    m = p.model()
    p.skip()
    if p.pos != len(text):
        p.error("unexpected trailing input")
    return m
