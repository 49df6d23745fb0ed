"""State-spec strings for the command line.

    fock:<n>                      number state
    coherent:<re>[+|-<im>i]       coherent state
    sup:<w1>*<spec1>+<w2>*<spec2> weighted sum of fock/coherent specs, renormalized
    file:<path>                   JSON state file

Weights are complex numbers, optionally parenthesized: ``(0.5-1i)*fock:2``.
Parenthesize a complex weight that follows a coherent term, otherwise
``coherent:1+1i*fock:0`` reads the ``1i`` as part of the amplitude.
"""

import re
from dataclasses import dataclass

from phasekit.errors import DimensionError, StateSpecError
from phasekit.fock import (
    format_complex,
    load_state,
    make_coherent_state,
    make_fock_state,
    superpose,
)
from phasekit.special import min_coherent_dim

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_UINT = re.compile(r"\d+")


@dataclass(frozen=True)
class StateSpec:
    kind: str
    params: object


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def fail(self, message):
        raise StateSpecError(message, self.text, self.pos)

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def accept(self, token):
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def number(self):
        match = _NUMBER.match(self.text, self.pos)
        if not match:
            self.fail("expected a number")
        self.pos = match.end()
        return float(match.group())

    def complex_number(self):
        """[sign] real [(+|-) imag i] | [sign] imag i, parsed greedily with backtracking."""
        start = self.pos
        sign = 1.0
        if self.accept("-"):
            sign = -1.0
        else:
            self.accept("+")
        if self.accept("i"):
            return complex(0, sign)
        first = sign * self.number()
        if self.accept("i"):
            return complex(0, first)
        mark = self.pos
        if self.peek() in "+-":
            imag_sign = 1.0 if self.peek() == "+" else -1.0
            self.pos += 1
            match = _NUMBER.match(self.text, self.pos)
            if match and self.text.startswith("i", match.end()):
                self.pos = match.end() + 1
                return complex(first, imag_sign * float(match.group()))
            if self.accept("i"):
                return complex(first, imag_sign)
            self.pos = mark
        if self.pos == start:
            self.fail("expected a complex number")
        return complex(first, 0.0)

    def weight(self):
        if self.accept("("):
            value = self.complex_number()
            if not self.accept(")"):
                self.fail("expected ')'")
            return value
        return self.complex_number()

    def simple_spec(self):
        if self.accept("fock:"):
            match = _UINT.match(self.text, self.pos)
            if not match:
                self.fail("expected a non-negative integer")
            self.pos = match.end()
            return StateSpec("fock", int(match.group()))
        if self.accept("coherent:"):
            return StateSpec("coherent", self.complex_number())
        self.fail("expected 'fock:' or 'coherent:'")

    def superposition(self):
        terms = []
        negate = False
        while True:
            w = self.weight()
            if not self.accept("*"):
                self.fail("expected '*' after weight")
            terms.append((-w if negate else w, self.simple_spec()))
            if self.accept("+"):
                negate = False
            elif self.accept("-"):
                negate = True
            else:
                break
        return StateSpec("superposition", tuple(terms))

    def parse(self):
        if self.accept("file:"):
            path = self.text[self.pos:]
            if not path:
                self.fail("expected a path")
            self.pos = len(self.text)
            return StateSpec("file", path)
        if self.accept("sup:"):
            spec = self.superposition()
        elif self.text.startswith(("fock:", "coherent:")):
            spec = self.simple_spec()
        else:
            kind = self.text.split(":", 1)[0]
            self.fail(f"unknown state kind {kind!r}")
        if self.pos != len(self.text):
            self.fail("unexpected trailing input")
        return spec


def parse_state_spec(text):
    return _Parser(text.strip()).parse()


def _format_weight(w):
    text = format_complex(w)
    return f"({text})" if w.imag != 0 else text


def format_state_spec(spec):
    if spec.kind == "fock":
        return f"fock:{spec.params}"
    if spec.kind == "coherent":
        return f"coherent:{format_complex(spec.params)}"
    if spec.kind == "file":
        return f"file:{spec.params}"
    parts = [f"{_format_weight(w)}*{format_state_spec(s)}" for w, s in spec.params]
    return "sup:" + "+".join(parts)


def default_dim(spec):
    if spec.kind == "fock":
        return spec.params + 1
    if spec.kind == "coherent":
        return min_coherent_dim(abs(spec.params) ** 2)
    if spec.kind == "superposition":
        return max(default_dim(s) for _, s in spec.params)
    return None


def build_state(spec, dim=None, force=False):
    """Materialize a StateSpec; ``dim`` pads or truncates per the kind's rules."""
    if spec.kind == "fock":
        return make_fock_state(spec.params, dim or default_dim(spec))
    if spec.kind == "coherent":
        return make_coherent_state(spec.params, dim or default_dim(spec), force=force)
    if spec.kind == "superposition":
        size = dim or default_dim(spec)
        return superpose([(w, build_state(s, size, force)) for w, s in spec.params])
    state = load_state(spec.params)
    if dim is None or dim == state.dim:
        return state
    if dim < state.dim:
        raise DimensionError(f"state file has dim {state.dim}, larger than requested {dim}")
    return state.padded(dim)
