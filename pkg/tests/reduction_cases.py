"""Golden single-step reductions: (rule, context, before, after), each after computed by hand."""

PRINCIPAL_CASES = [
    ("ax", "z: 1, w: bot", "new x (w <-> x | x(). z[])", "w(). z[]"),
    ("tensor-par", "z: 1",
     "new x (x[y].(y[] | x[]) | x(y). y(). x(). z[])",
     "new y (y[] | new x (x[] | y(). x(). z[]))"),
    ("plus-with", "z: 1",
     "new x:+{l: 1, r: 1} (x[l]. x[] | case x { l. x(). z[]; r. x(). z[] })",
     "new x (x[] | x(). z[])"),
    ("bang-query", "z: 1",
     "new x (!x(y). y[] | ?x[a]. a(). z[])",
     "new a (a[] | a(). z[])"),
    ("weaken", "z: 1", "new x (!x(y). y[] | z[])", "z[]"),
    ("contract", "z: 1",
     "new x (!x(y). y[] | ?x[a]. ?x[b]. a(). b(). z[])",
     "new x (!x(y). y[] | new v (!v(u). u[] | ?v[a]. ?x[b]. a(). b(). z[]))"),
    ("exists-forall", "z: 1",
     "new x:ex X. ~X * X (x[1]. x[y].(y(). z[] | x[]) | x(X). x(y). y <-> x)",
     "new x (x[y].(y(). z[] | x[]) | x(y). y <-> x)"),
    ("one-bot", "z: 1", "new x (x[] | x(). z[])", "z[]"),
]

COMMUTING_CASES = [
    ("comm-out-left", "w: 1 * 1",
     "new x (w[y].(x(). y[] | w[]) | x[])",
     "w[y].(new x (x(). y[] | x[]) | w[])"),
    ("comm-out-right", "w: 1 * 1",
     "new x (w[y].(y[] | x(). w[]) | x[])",
     "w[y].(y[] | new x (x(). w[] | x[]))"),
    ("comm-in", "w: bot | bot, z: 1",
     "new x (w(a). a(). w(). x[] | x(). z[])",
     "w(a). new x (a(). w(). x[] | x(). z[])"),
    ("comm-inject", "w: +{l: 1, r: bot}",
     "new x (w[l]. x(). w[] | x[])",
     "w[l]. new x (x(). w[] | x[])"),
    ("comm-case", "w: &{l: 1, r: 1}",
     "new x (case w { l. x(). w[]; r. x(). w[] } | x[])",
     "case w { l. new x (x(). w[] | x[]); r. new x (x(). w[] | x[]) }"),
    ("comm-bang", "w: !1",
     "new x (!w(y). ?x[v]. v(). y[] | !x(u). u[])",
     "!w(y). new x (?x[v]. v(). y[] | !x(u). u[])"),
    ("comm-query", "w: ?1",
     "new x (?w[y]. x(). y[] | x[])",
     "?w[y]. new x (x(). y[] | x[])"),
    ("comm-sendtype", "w: ex X. X",
     "new x (w[1]. x(). w[] | x[])",
     "w[1]. new x (x(). w[] | x[])"),
    ("comm-recvtype", "w: all X. 1",
     "new x (w(X). x(). w[] | x[])",
     "w(X). new x (x(). w[] | x[])"),
    ("comm-bot", "w: bot, z: 1",
     "new x (w(). x[] | x(). z[])",
     "w(). new x (x[] | x(). z[])"),
]

CASES = PRINCIPAL_CASES + COMMUTING_CASES


def run_case(case):
    """Fire one step; returns (rule fired, reduct matches, both ends typecheck)."""
    from sessc.cp import cp_typecheck
    from sessc.engine import equiv, find_step
    from sessc.errors import CheckError
    from sessc.parser import parse_cp, parse_process

    _, ctx_text, before, after = case
    p, ctx = parse_cp(f"ctx {ctx_text}. {before}")
    step = find_step(p)
    if step is None:
        return None, False, False
    try:
        cp_typecheck(ctx, p)
        cp_typecheck(ctx, step.result)
        typed = True
    except CheckError:
        typed = False
    return step.rule, equiv(step.result, parse_process(after)), typed
