from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from muasp.asp import (
    AnswerSet,
    Atom,
    Constant,
    GroundingError,
    Integer,
    ParseError,
    Program,
    Rule,
    SafetyError,
    expand_ranges,
    ground,
    herbrand_universe,
    is_answer_set,
    is_consistent,
    least_model,
    parse_program,
    reduct,
    solve,
)
from muasp.asp.syntax import Variable
from oracles import ATOM_POOL, brute_force_answer_sets, naive_is_stable

CONTROLLER = """
device_ok :- test_ok.
device_fault :- not test_ok.
wait :- not wait, not sensor_input.
"""

TRAFFIC_LIGHT = (Path(__file__).parents[1] / "src/muasp/scenarios/traffic_light.lp").read_text()


def atoms(*names):
    return {Atom(n) for n in names}


def sets(answer_sets):
    return {frozenset(a.atoms) for a in answer_sets}


@st.composite
def ground_programs(draw, max_rules=6, max_atoms=4):
    pool = ATOM_POOL[: draw(st.integers(1, max_atoms))]
    subset = st.lists(st.sampled_from(pool), max_size=len(pool), unique=True).map(tuple)
    rules = []
    for _ in range(draw(st.integers(0, max_rules))):
        head = draw(st.one_of(st.none(), st.sampled_from(pool)))
        pos, neg = draw(subset), draw(subset)
        if head is None and not (pos or neg):
            continue
        rules.append(Rule(head, pos, neg))
    return Program(tuple(rules))


class TestParse:
    def test_single_rule(self):
        p = parse_program("device_ok :- test_ok.")
        assert len(p) == 1
        (r,) = p.rules
        assert r.head == Atom("device_ok")
        assert r.pos_body == (Atom("test_ok"),)
        assert r.neg_body == ()

    def test_empty_text(self):
        assert parse_program("") == Program(())
        assert parse_program("% only a comment\n") == Program(())

    def test_missing_dot(self):
        with pytest.raises(ParseError) as exc:
            parse_program("p :- q")
        assert exc.value.line == 1
        assert exc.value.column == 7

    def test_error_position_on_later_line(self):
        with pytest.raises(ParseError) as exc:
            parse_program("p.\nq :- ?r.")
        assert (exc.value.line, exc.value.column) == (2, 6)

    def test_unsafe_rule_names_variable(self):
        with pytest.raises(SafetyError) as exc:
            parse_program("p(X) :- not q(X).")
        assert exc.value.variable == "X"

    def test_arithmetic_binding_is_safe(self):
        p = parse_program("p(Y) :- q(X), Y = X + 1.")
        assert p.rules[0].builtins[0].op == "="

    def test_unbound_comparison_is_unsafe(self):
        with pytest.raises(SafetyError) as exc:
            parse_program("p(X) :- q(X), X < Y.")
        assert exc.value.variable == "Y"

    def test_escaped_underscore_normalised(self):
        assert parse_program("want\\_go(c1).") == parse_program("want_go(c1).")

    def test_terms(self):
        (r,) = parse_program("tl(g,TL,ns,1) :- tln(TL).").rules
        assert r.head.args == (Constant("g"), Variable("TL"), Constant("ns"), Integer(1))

    def test_negative_integer(self):
        (r,) = parse_program("p(-3).").rules
        assert r.head.args == (Integer(-3),)

    def test_constraint(self):
        (r,) = parse_program(":- not a.").rules
        assert r.head is None and r.neg_body == (Atom("a"),)

    @pytest.mark.parametrize("text", [CONTROLLER, TRAFFIC_LIGHT, "p(X) :- q(X,Y), Y = X - (1 - Z), r(Z).", "a :- b, X != c, q(X), X > -2."])
    def test_roundtrip(self, text):
        p = parse_program(text)
        assert parse_program(str(p)) == p

    @given(ground_programs())
    def test_roundtrip_random(self, p):
        assert parse_program(str(p)) == p


class TestExpandRanges:
    def test_time_range(self):
        p = expand_ranges(parse_program("time(1..5)."))
        assert p == parse_program("time(1). time(2). time(3). time(4). time(5).")

    def test_singleton(self):
        assert expand_ranges(parse_program("time(3..3).")) == parse_program("time(3).")

    def test_inverted(self):
        with pytest.raises(GroundingError):
            expand_ranges(parse_program("time(5..1)."))

    def test_range_in_rule_body(self):
        with pytest.raises(GroundingError):
            expand_ranges(parse_program("p :- time(1..3)."))

    def test_other_rules_untouched(self):
        p = parse_program("q(a). p(X) :- q(X).")
        assert expand_ranges(p) == p


class TestHerbrandUniverse:
    def test_single_constant(self):
        assert herbrand_universe(parse_program("p(a). q(X) :- p(X).")) == {Constant("a")}

    def test_empty(self):
        assert herbrand_universe(Program()) == set()

    def test_traffic_light_with_requests(self):
        text = TRAFFIC_LIGHT + "car(c1). car(c2). car(c3). car(c4). car(c5). want_go(c1,t1,ns,2). want_go(c4,t1,ns,4)."
        universe = herbrand_universe(expand_ranges(parse_program(text)))
        # read off the program text by hand
        expected = {Constant(c) for c in ("t1", "g", "r", "ns", "ew", "c1", "c2", "c3", "c4", "c5")}
        expected |= {Integer(i) for i in range(1, 6)}
        assert universe == expected


class TestGround:
    def test_next_relation(self):
        g = ground(parse_program("time(1..5). next(Y,X) :- time(X), time(Y), Y = X + 1."))
        heads = [str(r.head) for r in g.rules if r.head.predicate == "next"]
        assert heads == ["next(2,1)", "next(3,2)", "next(4,3)", "next(5,4)"]
        assert all(r.is_ground() for r in g.rules)

    def test_open_predicate_ranges_over_universe(self):
        g = ground(parse_program("p(X) :- q(X). r(a)."))
        p_rules = [r for r in g.rules if r.head.predicate == "p"]
        assert p_rules == [Rule(Atom("p", (Constant("a"),)), (Atom("q", (Constant("a"),)),))]

    def test_inequality_filters_pairs(self):
        g = ground(parse_program("lane(ns). lane(ew). cross(L1,L2) :- lane(L1), lane(L2), L1 != L2."))
        pairs = {tuple(map(str, r.head.args)) for r in g.rules if r.head.predicate == "cross"}
        assert pairs == {("ns", "ew"), ("ew", "ns")}

    def test_arithmetic_binding_outside_universe(self):
        g = ground(parse_program("q(5). p(Y) :- q(X), Y = X + 1."))
        assert Atom("p", (Integer(6),)) in {r.head for r in g.rules}
        assert Integer(6) not in herbrand_universe(parse_program("q(5). p(Y) :- q(X), Y = X + 1."))

    def test_arithmetic_on_constant(self):
        with pytest.raises(GroundingError):
            ground(parse_program("q(a). p(Y) :- q(X), Y = X + 1."))

    def test_overflow(self):
        with pytest.raises(GroundingError):
            ground(parse_program("q(2147483647). p(Y) :- q(X), Y = X + 1."))

    def test_unsafe_program_object(self):
        rule = Rule(Atom("p", (Variable("X"),)), (), (Atom("q", (Variable("X"),)),))
        with pytest.raises(GroundingError):
            ground(Program((rule,)))

    def test_instances_map_back_to_source(self):
        source = parse_program(TRAFFIC_LIGHT + "car(c1). want_go(c1,t1,ns,2).")
        expanded = expand_ranges(source)
        for g in ground(source).rules:
            assert any(_instance_of(g, r) for r in expanded.rules), str(g)

    def test_ground_program_is_returned_unchanged(self):
        p = parse_program(CONTROLLER)
        assert ground(p) == p


def _instance_of(g: Rule, r: Rule) -> bool:
    """Brute-force check that some substitution maps ``r`` onto ``g``."""
    if (g.head is None) != (r.head is None) or len(g.pos_body) != len(r.pos_body):
        return False
    if len(g.neg_body) != len(r.neg_body):
        return False
    subst = {}
    pairs = list(zip(r.pos_body + r.neg_body, g.pos_body + g.neg_body))
    if r.head is not None:
        pairs.append((r.head, g.head))
    for pattern, inst in pairs:
        if pattern.predicate != inst.predicate or pattern.arity != inst.arity:
            return False
        for t, v in zip(pattern.args, inst.args):
            if isinstance(t, Variable):
                if subst.setdefault(t.name, v) != v:
                    return False
            elif t != v:
                return False
    from muasp.asp.grounding import compare, evaluate

    return all(compare(b.op, evaluate(b.lhs, subst), evaluate(b.rhs, subst)) for b in r.builtins)


class TestReduct:
    def test_empty_interpretation(self):
        assert reduct(parse_program("p :- not q."), set()) == parse_program("p.")

    def test_blocked(self):
        assert reduct(parse_program("p :- not q."), atoms("q")) == Program()

    def test_wait_rule_blocked(self):
        gp = parse_program("wait :- not wait, not sensor_input.")
        assert reduct(gp, atoms("wait")) == Program()

    def test_constraint_becomes_definite(self):
        red = reduct(parse_program(":- a, not b."), set())
        (r,) = red.rules
        assert r.head is not None and r.pos_body == (Atom("a"),) and not r.neg_body

    @given(ground_programs(), st.sets(st.sampled_from(ATOM_POOL)))
    def test_idempotent_on_definite(self, p, i):
        definite = Program(tuple(Rule(r.head, r.pos_body) for r in p.rules if r.head is not None))
        assert reduct(definite, i) == definite


class TestLeastModel:
    def test_chain(self):
        assert least_model(parse_program("p. q :- p.")) == atoms("p", "q")

    def test_empty(self):
        assert least_model(Program()) == set()

    def test_unfounded_loop(self):
        assert least_model(parse_program("a :- b. b :- a.")) == set()

    def test_rejects_negation(self):
        with pytest.raises(ValueError):
            least_model(parse_program("a :- not b."))


class TestIsAnswerSet:
    gp = parse_program(CONTROLLER + "test_ok. sensor_input.")

    def test_oracle_agrees(self):
        expected = brute_force_answer_sets(self.gp)
        assert expected == {frozenset(atoms("test_ok", "sensor_input", "device_ok"))}

    def test_true_candidate(self):
        assert is_answer_set(self.gp, atoms("test_ok", "sensor_input", "device_ok"))

    def test_false_candidate(self):
        candidate = atoms("test_ok", "sensor_input", "device_fault")
        assert not naive_is_stable(self.gp, candidate)
        assert not is_answer_set(self.gp, candidate)

    @pytest.mark.parametrize("i", [set(), {Atom("p")}])
    def test_odd_loop(self, i):
        assert not is_answer_set(parse_program("p :- not p."), i)

    def test_constraint_violation(self):
        assert not is_answer_set(parse_program("a. :- a."), atoms("a"))


class TestSolve:
    def test_two_answer_sets(self):
        result = solve(parse_program("p :- not q. q :- not p."))
        assert sets(result) == {frozenset(atoms("p")), frozenset(atoms("q"))}
        assert len(result) == 2

    def test_enumeration_order_false_branch_first(self):
        # atoms sorted [p, q]; p=false is explored first
        result = solve(parse_program("p :- not q. q :- not p."))
        assert [a.atoms for a in result] == [frozenset(atoms("q")), frozenset(atoms("p"))]

    def test_controller_without_input_is_inconsistent(self):
        assert solve(parse_program(CONTROLLER)) == []

    def test_fact(self):
        assert solve(parse_program("p.")) == [AnswerSet(frozenset(atoms("p")))]

    def test_constraint_atoms_hidden(self):
        (a,) = solve(parse_program("a. :- not a. :- b."))
        assert a.atoms == frozenset(atoms("a"))

    def test_traffic_light_unique(self):
        text = TRAFFIC_LIGHT + "car(c1). want_go(c1,t1,ns,2)."
        (a,) = solve(parse_program(text))
        assert parse_program("wait(c1,t1,ns,2). go(c1,t1,ns,3).").rules[0].head in a

    def test_limit(self):
        assert len(solve(parse_program("p :- not q. q :- not p."), limit=1)) == 1

    @settings(max_examples=300)
    @given(ground_programs())
    def test_matches_brute_force(self, p):
        assert sets(solve(p)) == brute_force_answer_sets(p)

    @given(ground_programs())
    def test_antichain(self, p):
        found = sets(solve(p))
        assert not any(x < y for x in found for y in found)

    @given(ground_programs())
    def test_models_satisfy_rules(self, p):
        for a in solve(p):
            for r in p.rules:
                body = set(r.pos_body) <= a.atoms and not a.atoms & set(r.neg_body)
                if body:
                    assert r.head is not None and r.head in a

    @given(ground_programs())
    def test_deterministic(self, p):
        assert solve(p) == solve(p)


class TestConsistency:
    def test_controller_with_sensor(self):
        assert is_consistent(parse_program(CONTROLLER + "sensor_input."))

    def test_underivable_gate(self):
        assert not is_consistent(parse_program(":- not a."))

    def test_satisfied_gate(self):
        assert is_consistent(parse_program("a. :- not a."))
