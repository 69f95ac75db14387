from rmtt.kernel import (
    Const,
    Declaration,
    Lam,
    SortApp,
    Var,
    check_context,
    check_signature,
    compose_subst,
    contexts_isomorphic,
    enumerate_contexts,
    enumerate_framework_contexts,
    enumerate_substitutions,
    enumerate_terms,
    hom_equal,
    identity_subst,
    polynomial_object,
    pretty,
    print_signature,
    slice_constant_names,
    slice_theory,
)
from rmtt.kernel.contexts import free_theory_on_context


def ext(sig, name="o"):
    return sig.extended([Declaration(name, (), SortApp("Ty"))])


def test_enumerate_contexts_depth1(tthg):
    sig = ext(tthg)
    ctxs = enumerate_contexts(sig, 1)
    assert ctxs == [(), (SortApp("El", (Const("o"),)),)]
    assert enumerate_contexts(tthg, 1) == [()]
    assert enumerate_contexts(sig, 0) == [()]


def test_depth2_includes_identity_contexts(etth1):
    sig = ext(etth1)
    ctxs = enumerate_contexts(sig, 2, type_size=5)
    shapes = {tuple(pretty(t) for t in c) for c in ctxs}
    assert ("El(o)", "El(Id(o, tt, ?0))") not in shapes  # tt is not of type El(o)
    assert any(
        len(c) == 2 and "Id(o" in pretty(c[1]) for c in ctxs
    ), sorted(shapes)


def test_hom_equal_basics(itth):
    ctx = (SortApp("El", (Const("Unit"),)),)
    s = (Var(0),)
    assert hom_equal(itth, s, s)
    t = (Const("tt"),)
    assert not hom_equal(itth, s, t)


def test_hom_equal_rule_convertible(etth1):
    # two substitutions differing by surjective pairing are identified
    B = Lam(SortApp("El", (Const("Unit"),)), Const("Unit"))
    sigty = SortApp("El", (Const("Sig", (Const("Unit"), B)),))
    src = (sigty,)
    s1 = (Var(0),)
    s2 = (Const("pair", (Const("Unit"), B,
                         Const("fst", (Const("Unit"), B, Var(0))),
                         Const("snd", (Const("Unit"), B, Var(0))))),)
    assert hom_equal(etth1, s1, s2)


def test_substitution_composition_associative(itth):
    sig = ext(itth)
    A = (SortApp("El", (Const("o"),)),)
    subs = enumerate_substitutions(sig, A, A, 3)
    for f in subs:
        assert hom_equal(sig, compose_subst(sig, f, identity_subst(A)), f)
        assert hom_equal(sig, compose_subst(sig, identity_subst(A), f), f)


def test_slice_theory_unrolls_telescope(tthg):
    sl = slice_theory(tthg, (SortApp("Ty"),))
    names = slice_constant_names(tthg, sl)
    assert len(names) == 1
    assert sl.decls[names[0]].target == SortApp("Ty")
    sl2 = slice_theory(tthg, (SortApp("Ty"), SortApp("El", (Var(0),))))
    names2 = slice_constant_names(tthg, sl2)
    assert len(names2) == 2
    assert sl2.decls[names2[1]].target == SortApp("El", (Const(names2[0]),))


def test_slice_at_empty_context_is_marker_only(tthg):
    sl = slice_theory(tthg, ())
    assert sl.items == tthg.items
    assert any("empty context" in n for n in sl.notes)


def test_slice_twice_commutes_with_concatenation(tthg):
    a = (SortApp("Ty"),)
    b = (SortApp("Ty"), SortApp("El", (Var(0),)))
    once = slice_theory(slice_theory(tthg, a, prefix="p"),
                        (SortApp("El", (Const("p0"),)),), prefix="q")
    both = slice_theory(tthg, b, prefix="r")
    shapes = lambda sig: [
        (d.telescope, d.target if isinstance(d.target, str) else "term")
        for d in sig.declarations()
    ]
    assert len(shapes(once)) == len(shapes(both))


def test_slice_universal_property(tthg):
    # morphisms out of the slice correspond to (morphism, section) pairs
    from rmtt.homotopy import extension_morphisms

    sig = ext(tthg)
    sl = slice_theory(sig, (SortApp("El", (Const("o"),)),), prefix="s")
    theory = sig.extended([
        Declaration("c1", (), SortApp("El", (Const("o"),))),
        Declaration("c2", (), SortApp("El", (Const("o"),))),
    ])
    # maps out of the slice over sig = choices of a section of El(o)
    maps = extension_morphisms(sig, sl, theory, size=2)
    sections = enumerate_terms(theory, (), SortApp("El", (Const("o"),)), 2)
    assert len(maps) == len(sections)


def test_polynomial_object_shapes(tthg):
    assert polynomial_object(tthg, 0, "unit") == ()
    assert polynomial_object(tthg, 0, "Ty") == (SortApp("Ty"),)
    assert polynomial_object(tthg, 0, "El") == (
        SortApp("Ty"),
        SortApp("El", (Var(0),)),
    )
    ctx = polynomial_object(tthg, 2, "El")
    assert len(ctx) == 4
    check_context(tthg, ctx)
    # the theory freely generated by it validates
    free = free_theory_on_context(tthg, ctx)
    assert check_signature(print_signature(free)).ok


def test_polynomial_object_unit_equals_shifted_ty(tthg):
    assert polynomial_object(tthg, 1, "unit") == polynomial_object(tthg, 0, "Ty")


def test_framework_contexts_include_sort_entries(tthg):
    ctxs = enumerate_framework_contexts(tthg, 1)
    assert (SortApp("Ty"),) in ctxs


def test_context_isomorphism_detection(itth):
    sig = ext(itth)
    a = (SortApp("El", (Const("o"),)),)
    assert contexts_isomorphic(sig, a, a)
    b = (SortApp("El", (Const("Unit"),)),)
    assert not contexts_isomorphic(sig, a, b)
