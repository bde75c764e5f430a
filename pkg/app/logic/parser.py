"""
Text syntax for formulas, atomic bases, support universes and proof scripts.

One lark grammar carries every start symbol; a ``Transformer`` turns the
parse tree into the immutable objects of the other modules, and the
``print_*`` functions produce canonical text that parses back to an equal
object.
"""

import logging

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, VisitError

from app.logic.atomic import AtomicRule, Base, Premise
from app.logic.errors import ArityMismatch, DanglingReference, ParseError, SourceSpan
from app.logic.hilbert import (
    MP,
    SLOT_NAMES,
    Axiom,
    Gen1,
    Gen2,
    HilbertProof,
    Hyp,
    Step,
    derived_formula,
)
from app.logic.natded import ND_RULES, NDProof
from app.logic.support import Policy, SupportUniverse
from app.logic.syntax import (
    IND_BINDERS,
    PRED_BINDERS,
    And,
    Atom,
    Bot,
    Const,
    ExistsI,
    ExistsP,
    ForallI,
    ForallP,
    Formula,
    Imp,
    Not,
    Or,
    Pred,
    PVar,
    Signature,
    Var,
    is_internal,
)

logger = logging.getLogger(__name__)

GRAMMAR = r"""
formula_start: formula
formula_list_start: (formula ("," formula)*)?
base_start: base_block
universe_start: base_block* universe_block base_block*
hilbert_start: "hilbert" UNAME "proof" "of" ESCAPED_STRING ("from" ESCAPED_STRING)? step*
nd_start: "nd" UNAME "proof" node

?formula: imp
?imp: disj ("->" | "→") imp          -> imp
    | disj
    | qexpr
?qexpr: quant
      | ("~" | "¬") qexpr             -> not_
quant: ("all" | "∀") IVAR "." formula              -> forall_i
     | ("ALL" | "Π") PVAR ":" NAT "." formula      -> forall_p
     | ("ex" | "∃") IVAR "." formula               -> exists_i
     | "EX" PVAR ":" NAT "." formula               -> exists_p
?disj: disj "|" conj                  -> or_
     | conj
?conj: conj "&" neg                   -> and_
     | neg
?neg: ("~" | "¬") neg                 -> not_
    | atomic
?atomic: "(" formula ")"
       | ("bot" | "⊥")                -> bot
       | atom
atom: pred_sym ("(" term ("," term)* ")")?
pred_sym: UNAME | PVAR | EUNAME
term: LNAME | IVAR | ELNAME

base_block: "base" name "{" base_item* "}"
?base_item: rule
          | "slice" atom ("," atom)*  -> slice_decl
rule: (premise ("," premise)*)? "=>" atom
?premise: atom                        -> plain_premise
        | "(" "[" (atom ("," atom)*)? "]" "=>" atom ")" -> discharge_premise
name: LNAME | UNAME

universe_block: "universe" name? "{" universe_item* "}"
?universe_item: "rules" "{" base_item* "}"                      -> rules_block
              | "slice_consts" (LNAME ("," LNAME)*)?             -> slice_consts
              | "slice_preds" (pred_decl ("," pred_decl)*)?      -> slice_preds
              | "budget" NAT                                     -> budget
              | "policy" UNAME                                   -> policy
              | "depth" NAT                                      -> depth
pred_decl: UNAME ":" NAT

step: NAT "." justification
?justification: "axiom" UNAME slot* ESCAPED_STRING?          -> axiom_step
              | "hyp" ESCAPED_STRING                        -> hyp_step
              | "mp" NAT NAT ESCAPED_STRING?                -> mp_step
              | "gen1" NAT IVAR ESCAPED_STRING?             -> gen1_step
              | "gen2" NAT PVAR ":" NAT ESCAPED_STRING?     -> gen2_step
slot: LNAME "=" (ESCAPED_STRING | param)

node: "(" LNAME label? param? ESCAPED_STRING node* ")"
label: "[" LNAME "]"
param: IVAR | LNAME | ELNAME
     | (PVAR | UNAME | EUNAME) ":" NAT

IVAR: /\?[a-z][A-Za-z0-9_]*/
PVAR: /\?[A-Z][A-Za-z0-9_]*/
LNAME: /[a-z][A-Za-z0-9_]*/
UNAME: /[A-Z][A-Za-z0-9_]*/
ELNAME: /\$[a-z][A-Za-z0-9_]*/
EUNAME: /\$[A-Z][A-Za-z0-9_]*/
NAT: /[0-9]+/
COMMENT: /#[^\n]*/

%import common.ESCAPED_STRING
%import common.WS
%ignore WS
%ignore COMMENT
"""

_STARTS = [
    "formula_start",
    "formula_list_start",
    "base_start",
    "universe_start",
    "hilbert_start",
    "nd_start",
]

_PARSER = Lark(GRAMMAR, start=_STARTS, parser="earley", propagate_positions=True)


def _parse_tree(text, start, source):
    try:
        return _PARSER.parse(text, start=start)
    except UnexpectedInput as exc:
        pos = getattr(exc, "pos_in_stream", None)
        if pos is None or pos < 0 or isinstance(exc, UnexpectedEOF):
            pos = len(text)
        if isinstance(exc, UnexpectedCharacters):
            expected = ", ".join(sorted(exc.allowed or [])) or "a different token"
        else:
            expected = ", ".join(sorted(getattr(exc, "expected", None) or [])) or "more input"
        found = repr(text[pos]) if pos < len(text) else "end of input"
        raise ParseError(SourceSpan(source, pos, pos), expected, found) from None


def _unquote(token):
    return str(token)[1:-1]


class _Builder(Transformer):
    """Builds workbench objects; ``offset`` shifts spans of nested string parses."""

    def __init__(self, sig, internal, source, offset=0):
        super().__init__()
        self.sig = sig
        self.internal = internal
        self.source = source
        self.offset = offset

    def _span(self, token):
        start = self.offset + (token.start_pos or 0)
        return SourceSpan(self.source, start, start + len(token))

    def _guard(self, token):
        if is_internal(str(token)) and not self.internal:
            raise ParseError(self._span(token), "a user symbol", f"reserved name {token}")

    def _nested(self, token, start="formula_start"):
        """Parse the contents of a quoted string with the shared signature."""
        shift = self._span(token).start + 1
        try:
            tree = _parse_tree(_unquote(token), start, self.source)
        except ParseError as exc:
            span = SourceSpan(self.source, exc.span.start + shift, exc.span.end + shift)
            raise ParseError(span, exc.expected, exc.found) from None
        return _run(_Builder(self.sig, self.internal, self.source, shift), tree)

    # formulas

    def formula_start(self, items):
        phi = items[0]
        _check_pvar_arities(phi)
        return phi

    def formula_list_start(self, items):
        for phi in items:
            _check_pvar_arities(phi)
        return tuple(items)

    @v_args(inline=True)
    def imp(self, left, right):
        return Imp(left, right)

    @v_args(inline=True)
    def or_(self, left, right):
        return Or(left, right)

    @v_args(inline=True)
    def and_(self, left, right):
        return And(left, right)

    @v_args(inline=True)
    def not_(self, body):
        return Not(body)

    def bot(self, _):
        return Bot()

    @v_args(inline=True)
    def forall_i(self, var, body):
        return ForallI(Var(str(var)), body)

    @v_args(inline=True)
    def forall_p(self, var, arity, body):
        return ForallP(PVar(str(var), int(arity)), body)

    @v_args(inline=True)
    def exists_i(self, var, body):
        return ExistsI(Var(str(var)), body)

    @v_args(inline=True)
    def exists_p(self, var, arity, body):
        return ExistsP(PVar(str(var), int(arity)), body)

    def atom(self, items):
        token, args = items[0], tuple(items[1:])
        self._guard(token)
        name = str(token)
        if name.startswith("?"):
            return Atom(PVar(name, len(args)), args)
        return Atom(self.sig.pred(name, len(args)), args)

    @v_args(inline=True)
    def pred_sym(self, token):
        return token

    @v_args(inline=True)
    def term(self, token):
        self._guard(token)
        name = str(token)
        return Var(name) if name.startswith("?") else Const(name)

    # bases and universes

    @v_args(inline=True)
    def name(self, token):
        return str(token)

    def slice_decl(self, atoms):
        return ("slice", tuple(atoms))

    @v_args(inline=True)
    def plain_premise(self, atom):
        return Premise(frozenset(), atom)

    def discharge_premise(self, atoms):
        return Premise(frozenset(atoms[:-1]), atoms[-1])

    def rule(self, items):
        return AtomicRule(items[-1], tuple(items[:-1]))

    def base_block(self, items):
        name, rules, sliced = items[0], [], []
        for item in items[1:]:
            if isinstance(item, tuple):
                sliced.extend(item[1])
            else:
                rules.append(item)
        return Base(name, frozenset(rules), frozenset(sliced))

    def base_start(self, items):
        return items[0]

    def rules_block(self, items):
        rules = tuple(item for item in items if isinstance(item, AtomicRule))
        return ("rules", rules)

    def slice_consts(self, items):
        return ("consts", tuple(Const(str(t)) for t in items))

    def slice_preds(self, items):
        return ("preds", tuple(items))

    @v_args(inline=True)
    def pred_decl(self, token, arity):
        return self.sig.pred(str(token), int(arity))

    @v_args(inline=True)
    def budget(self, n):
        return ("budget", int(n))

    @v_args(inline=True)
    def depth(self, n):
        return ("depth", int(n))

    @v_args(inline=True)
    def policy(self, token):
        try:
            return ("policy", Policy(str(token)))
        except ValueError:
            raise ParseError(self._span(token), "policy I or C", str(token)) from None

    def universe_block(self, items):
        name = items[0] if items and isinstance(items[0], str) else "universe"
        fields = dict(item for item in items if isinstance(item, tuple))
        return SupportUniverse(
            name=name,
            units=fields.get("rules", ()),
            consts=fields.get("consts", ()),
            preds=fields.get("preds", ()),
            budget=fields.get("budget", 1),
            policy=fields.get("policy", Policy.I),
            depth=fields.get("depth"),
        )

    def universe_start(self, items):
        universe = next(item for item in items if isinstance(item, SupportUniverse))
        bases = {item.name: item for item in items if isinstance(item, Base)}
        return universe, bases

    # Hilbert scripts

    def hilbert_start(self, items):
        system, goal_token = items[0], items[1]
        if str(system) not in ("HI", "HC"):
            raise ParseError(self._span(system), "HI or HC", str(system))
        rest = items[2:]
        hyps = ()
        if rest and isinstance(rest[0], Token):
            hyps = self._nested(rest[0], "formula_list_start")
            rest = rest[1:]
        conclusion = self._nested(goal_token)
        steps = []
        for number, just, formula_token, token in rest:
            if int(number) != len(steps) + 1:
                raise ParseError(
                    self._span(number), f"step number {len(steps) + 1}", f"step number {number}"
                )
            for cited in _citations(just):
                if not 1 <= cited <= len(steps):
                    raise DanglingReference(self._span(token), int(number), cited)
            if formula_token is not None:
                formula = self._nested(formula_token)
            else:
                formula = derived_formula(just, [s.formula for s in steps])
                if formula is None and isinstance(just, Axiom):
                    raise ParseError(self._span(token), "slots that instantiate the schema", "a failed instance")
                if formula is None:
                    raise ParseError(self._span(token), "an implication at the cited step", "a non-implication")
            steps.append(Step(formula, just))
        return HilbertProof(str(system), tuple(hyps), tuple(steps), conclusion)

    def step(self, items):
        number, (just, formula_token, token) = items
        return number, just, formula_token, token

    def axiom_step(self, items):
        tag, rest = items[0], items[1:]
        slots = [item for item in rest if isinstance(item, tuple)]
        formula = next((item for item in rest if isinstance(item, Token)), None)
        if formula is None and not slots:
            raise ParseError(self._span(tag), "a formula or slots", f"axiom {tag} with neither")
        return Axiom(str(tag), self._slots(tag, slots)), formula, tag

    def slot(self, items):
        name, value = items
        if isinstance(value, Token):
            value = self._nested(value)
        else:
            value = value[1]
        return (str(name), value, name)

    def _slots(self, tag, slots):
        """Slots in schema order, each of the kind its schema expects."""
        if not slots:
            return ()
        expected = SLOT_NAMES.get(str(tag))
        if expected is None:
            raise ParseError(self._span(tag), "an axiom schema name", str(tag))
        given = {}
        for name, value, token in slots:
            if name not in expected or name in given:
                raise ParseError(self._span(token), f"one of the slots {', '.join(expected)}", name)
            if not isinstance(value, _slot_kinds(str(tag), name)):
                raise ParseError(self._span(token), f"a fitting value for {name}", str(value))
            given[name] = value
        missing = [name for name in expected if name not in given]
        if missing:
            raise ParseError(self._span(tag), f"the slots {', '.join(expected)}", f"no {missing[0]}")
        return tuple((name, given[name]) for name in expected)

    def hyp_step(self, items):
        return Hyp(), items[0], items[0]

    def mp_step(self, items):
        major, minor = items[0], items[1]
        return MP(int(major), int(minor)), _optional(items, 2), major

    def gen1_step(self, items):
        premise, var = items[0], items[1]
        return Gen1(int(premise), Var(str(var))), _optional(items, 2), premise

    def gen2_step(self, items):
        premise, var, arity = items[0], items[1], items[2]
        return Gen2(int(premise), PVar(str(var), int(arity))), _optional(items, 3), premise

    # ND scripts

    def nd_start(self, items):
        system, root = items
        if str(system) not in ("NI", "NC"):
            raise ParseError(self._span(system), "NI or NC", str(system))
        return str(system), root

    @v_args(inline=True)
    def label(self, token):
        return ("label", str(token))

    def param(self, items):
        token = items[0]
        self._guard(token)
        name = str(token)
        if len(items) == 2:
            arity = int(items[1])
            return ("param", PVar(name, arity) if name.startswith("?") else self.sig.pred(name, arity))
        return ("param", Var(name) if name.startswith("?") else Const(name))

    def node(self, items):
        rule_token, rest = items[0], items[1:]
        if str(rule_token) not in ND_RULES:
            raise ParseError(self._span(rule_token), "an ND rule name", str(rule_token))
        label = param = None
        while rest and isinstance(rest[0], tuple):
            kind, value = rest[0]
            if kind == "label":
                label = value
            else:
                param = value
            rest = rest[1:]
        conclusion = self._nested(rest[0])
        return NDProof(str(rule_token), conclusion, tuple(rest[1:]), label, param)


def _slot_kinds(tag, name):
    if name == "var":
        return Var if tag == "AllE" else PVar
    if name == "term":
        return (Const, Var) if tag == "AllE" else (Pred, PVar)
    return Formula


def _optional(items, index):
    return items[index] if len(items) > index else None


def _citations(just):
    if isinstance(just, MP):
        return (just.major, just.minor)
    if isinstance(just, (Gen1, Gen2)):
        return (just.premise,)
    return ()


def _run(builder, tree):
    try:
        return builder.transform(tree)
    except VisitError as exc:
        raise exc.orig_exc from None


def _check_pvar_arities(phi, scope=None):
    """A predicate variable name carries one arity throughout a formula."""
    seen = {} if scope is None else scope
    for node in _nodes(phi):
        if isinstance(node, Atom) and isinstance(node.pred, PVar):
            known = seen.setdefault(node.pred.name, node.pred.arity)
            if known != node.pred.arity:
                raise ArityMismatch(
                    f"{node.pred.name} used with arity {node.pred.arity} and {known}"
                )
        elif isinstance(node, PRED_BINDERS):
            known = seen.setdefault(node.var.name, node.var.arity)
            if known != node.var.arity:
                raise ArityMismatch(f"{node.var.name} bound with arity {node.var.arity} and {known}")


def _nodes(phi):
    yield phi
    for attr in ("left", "right", "body"):
        child = getattr(phi, attr, None)
        if child is not None:
            yield from _nodes(child)


def _builder(sig, internal, source):
    return _Builder(sig if sig is not None else Signature(), internal, source)


# Public parse functions


def parse_formula(text, sig=None, internal=False, source="<formula>"):
    """
    Parse a formula; abbreviations stay as sugar nodes until ``expand``.

    Raises:
        ParseError: if the text does not match the grammar.
        ArityMismatch: if a predicate is used with two arities.
    """
    tree = _parse_tree(text, "formula_start", source)
    return _run(_builder(sig, internal, source), tree)


def parse_formula_list(text, sig=None, internal=False, source="<formulas>"):
    """Parse a comma-separated list of formulas (possibly empty)."""
    tree = _parse_tree(text, "formula_list_start", source)
    return _run(_builder(sig, internal, source), tree)


def parse_base(text, sig=None, internal=False, source="<base>"):
    tree = _parse_tree(text, "base_start", source)
    return _run(_builder(sig, internal, source), tree)


def parse_universe(text, sig=None, internal=False, source="<universe>"):
    """Parse a universe description; returns ``(SupportUniverse, {name: Base})``."""
    tree = _parse_tree(text, "universe_start", source)
    return _run(_builder(sig, internal, source), tree)


def parse_hilbert_proof(text, sig=None, internal=False, source="<hilbert>"):
    """
    Parse a Hilbert proof script.

    Raises:
        ParseError: on syntax errors or out-of-order step numbers.
        DanglingReference: when a step cites a missing or later step.
    """
    tree = _parse_tree(text, "hilbert_start", source)
    return _run(_builder(sig, internal, source), tree)


def parse_nd_proof(text, sig=None, internal=False, source="<nd>"):
    """Parse an ND proof script; returns ``(system, NDProof)``."""
    tree = _parse_tree(text, "nd_start", source)
    return _run(_builder(sig, internal, source), tree)


def detect_kind(text):
    """Object kind named by the first keyword of ``text``, or ``formula``."""
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        word = stripped.split()[0]
        return word if word in ("base", "universe", "hilbert", "nd") else "formula"
    return "formula"


# Printing

_IMP, _OR, _AND, _NOT, _ATOM = 1, 2, 3, 4, 5


def print_term(t):
    return t.name


def print_atom(atom):
    if not atom.args:
        return atom.pred.name
    return f"{atom.pred.name}({','.join(print_term(t) for t in atom.args)})"


def _binder(phi):
    keyword = {ForallI: "all", ExistsI: "ex", ForallP: "ALL", ExistsP: "EX"}[type(phi)]
    if isinstance(phi, PRED_BINDERS):
        return f"{keyword} {phi.var.name}:{phi.var.arity}."
    return f"{keyword} {phi.var.name}."


def _show(phi, prec=0, tail=True):
    if isinstance(phi, IND_BINDERS + PRED_BINDERS):
        text = f"{_binder(phi)} {_show(phi.body)}"
        return text if tail else f"({text})"
    if isinstance(phi, Not):
        return "~" + _show(phi.body, _NOT, tail)
    if isinstance(phi, Imp):
        text, level = f"{_show(phi.left, _OR, False)} -> {_show(phi.right, _IMP, True)}", _IMP
    elif isinstance(phi, Or):
        text, level = f"{_show(phi.left, _OR, False)} | {_show(phi.right, _AND, False)}", _OR
    elif isinstance(phi, And):
        text, level = f"{_show(phi.left, _AND, False)} & {_show(phi.right, _NOT, False)}", _AND
    elif isinstance(phi, Bot):
        text, level = "bot", _ATOM
    else:
        text, level = print_atom(phi), _ATOM
    return text if level >= prec else f"({text})"


def print_formula(phi):
    """Canonical text: right-associative ``->`` with minimal parentheses."""
    return _show(phi)


def print_rule(rule):
    premises = []
    for premise in rule.premises:
        if premise.hyps:
            hyps = ", ".join(sorted(print_atom(a) for a in premise.hyps))
            premises.append(f"([{hyps}] => {print_atom(premise.goal)})")
        else:
            premises.append(print_atom(premise.goal))
    head = ", ".join(premises)
    return f"{head} => {print_atom(rule.conclusion)}" if head else f"=> {print_atom(rule.conclusion)}"


def _rule_lines(rules, indent):
    return [f"{indent}{line}" for line in sorted(print_rule(r) for r in rules)]


def print_base(base):
    lines = [f"base {base.name} {{"]
    lines += _rule_lines(base.rules, "  ")
    if base.slice:
        lines.append("  slice " + ", ".join(sorted(print_atom(a) for a in base.slice)))
    lines.append("}")
    return "\n".join(lines)


def print_universe(universe, bases=()):
    """Universe block followed by any named bases."""
    lines = [f"universe {universe.name} {{", "  rules {"]
    lines += [f"    {print_rule(r)}" for r in universe.units]
    lines.append("  }")
    if universe.consts:
        lines.append("  slice_consts " + ", ".join(c.name for c in universe.consts))
    if universe.preds:
        lines.append("  slice_preds " + ", ".join(f"{p.name}:{p.arity}" for p in universe.preds))
    lines.append(f"  budget {universe.budget}")
    lines.append(f"  policy {universe.policy.value}")
    if universe.depth is not None:
        lines.append(f"  depth {universe.depth}")
    lines.append("}")
    for base in bases:
        lines.append(print_base(base))
    return "\n".join(lines)


def _quote(phi):
    return f'"{print_formula(phi)}"'


def _print_slot(value):
    return _quote(value) if isinstance(value, Formula) else _print_param(value)


def _print_step(number, step, previous):
    just = step.justification
    if isinstance(just, Axiom):
        head = f"{number}. axiom {just.tag}" + "".join(f" {n}={_print_slot(v)}" for n, v in just.slots)
        if just.slots and derived_formula(just, previous) == step.formula:
            return head
        return f"{head} {_quote(step.formula)}"
    if isinstance(just, Hyp):
        return f"{number}. hyp {_quote(step.formula)}"
    if isinstance(just, MP):
        head = f"{number}. mp {just.major} {just.minor}"
    elif isinstance(just, Gen1):
        head = f"{number}. gen1 {just.premise} {just.var.name}"
    else:
        head = f"{number}. gen2 {just.premise} {just.var.name}:{just.var.arity}"
    if derived_formula(just, previous) == step.formula:
        return head
    return f"{head} {_quote(step.formula)}"


def print_hilbert_proof(proof):
    hyps = ", ".join(print_formula(h) for h in proof.hyps)
    lines = [f'hilbert {proof.system} proof of {_quote(proof.conclusion)} from "{hyps}"']
    formulas = []
    for number, step in enumerate(proof.steps, start=1):
        lines.append(_print_step(number, step, formulas))
        formulas.append(step.formula)
    return "\n".join(lines)


def _print_param(param):
    if isinstance(param, (PVar, Pred)):
        return f"{param.name}:{param.arity}"
    return param.name


def _print_node(node, indent):
    parts = [node.rule]
    if node.label is not None:
        parts.append(f"[{node.label}]")
    if node.param is not None:
        parts.append(_print_param(node.param))
    parts.append(_quote(node.conclusion))
    head = f"{indent}({' '.join(parts)}"
    if not node.premises:
        return head + ")"
    children = [_print_node(child, indent + "  ") for child in node.premises]
    return head + "\n" + "\n".join(children) + ")"


def print_nd_proof(tree, system="NI"):
    return f"nd {system} proof\n{_print_node(tree, '')}"
