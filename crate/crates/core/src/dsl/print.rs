//! Canonical text rendering. Output reparses to an equal tree.

use std::fmt::Write;

use super::ast::*;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn literal(l: &Literal) -> String {
    match l {
        Literal::Int(n) => n.to_string(),
        Literal::Bool(b) => b.to_string(),
        Literal::Str(s) => escape(s),
        Literal::Object(o) => o.clone(),
    }
}

pub fn expr(e: &Expr) -> String {
    fn sub(e: &Expr) -> String {
        match e {
            Expr::Bin(..) => format!("({})", expr(e)),
            _ => expr(e),
        }
    }
    match e {
        Expr::Lit(l, _) => literal(l),
        Expr::Name(n, _) => n.clone(),
        Expr::Count(k, _) => format!("#{k}"),
        Expr::Not(e, _) => format!("not ({})", expr(e)),
        Expr::Neg(e, _) => format!("-({})", expr(e)),
        Expr::Bin(op, l, r) => format!("{} {} {}", sub(l), op.symbol(), sub(r)),
    }
}

fn type_ref(t: &TypeRef) -> &str {
    match t {
        TypeRef::Int => "int",
        TypeRef::Bool => "bool",
        TypeRef::Str => "string",
        TypeRef::Class(c) => c,
    }
}

fn attr(out: &mut String, a: &AttrDecl, indent: &str) {
    let _ = write!(out, "{indent}attr {}: {}", a.name, type_ref(&a.ty));
    match &a.domain {
        Some(Domain::Range(lo, hi)) => {
            let _ = write!(out, " in {lo}..{hi}");
        }
        Some(Domain::Values(vs)) => {
            let vs: Vec<String> = vs.iter().map(literal).collect();
            let _ = write!(out, " in {{{}}}", vs.join(", "));
        }
        None => {}
    }
    out.push('\n');
}

fn local_name(qualified: &str) -> &str {
    qualified.rsplit("::").next().unwrap_or(qualified)
}

pub fn class_model(m: &ClassModelAst) -> String {
    let mut out = String::new();
    for p in &m.packages {
        let parts: Vec<&str> = p.name.split("::").collect();
        for part in &parts {
            let _ = write!(out, "package {part} {{ ");
        }
        out.push_str(&"}".repeat(parts.len()));
        out.push('\n');
    }
    for c in &m.classes {
        let parts: Vec<&str> = c.package.as_deref().map(|p| p.split("::").collect()).unwrap_or_default();
        for part in &parts {
            let _ = write!(out, "package {part} {{ ");
        }
        if c.is_abstract {
            out.push_str("abstract ");
        }
        let _ = writeln!(out, "class {} {{", local_name(&c.name));
        for a in &c.attributes {
            attr(&mut out, a, "  ");
        }
        for o in &c.operations {
            let params: Vec<&str> = o.params.iter().map(type_ref).collect();
            let _ = write!(out, "  op {}({})", o.name, params.join(", "));
            if let Some(r) = &o.result {
                let _ = write!(out, ": {}", type_ref(r));
            }
            out.push('\n');
        }
        out.push('}');
        out.push_str(&" }".repeat(parts.len()));
        out.push('\n');
    }
    for a in &m.associations {
        let op = match a.kind {
            AssocKind::Plain => "--",
            AssocKind::Aggregate => "o--",
            AssocKind::Composition => "*--",
        };
        let _ = write!(
            out,
            "assoc {} {}[{}] {op} {}[{}]",
            a.name, a.left.class, a.left.mult, a.right.class, a.right.mult
        );
        if !a.attributes.is_empty() {
            out.push_str(" {\n");
            for at in &a.attributes {
                attr(&mut out, at, "  ");
            }
            out.push('}');
        }
        out.push('\n');
    }
    for g in &m.generalizations {
        let _ = writeln!(out, "gen {} < {}", g.sub, g.sup);
    }
    for k in &m.constraints {
        let _ = writeln!(out, "constraint {} on {}: {}", k.name, k.class, expr(&k.expr));
    }
    out
}

fn pattern(p: &Pattern) -> String {
    match p {
        Pattern::Bind(b) => b.clone(),
        Pattern::Lit(l) => literal(l),
        Pattern::Wild => "_".into(),
    }
}

fn state_node(out: &mut String, n: &StateNode, depth: usize) {
    let indent = "  ".repeat(depth);
    let name = if n.anonymous { String::new() } else { format!(" {}", n.name) };
    match &n.kind {
        StateKind::Simple => {
            let _ = writeln!(out, "{indent}state{name}");
        }
        StateKind::Or { initial, children } => {
            let _ = writeln!(out, "{indent}state{name} {{");
            scope(out, initial.as_deref(), children, depth + 1);
            let _ = writeln!(out, "{indent}}}");
        }
        StateKind::And { regions } => {
            let _ = writeln!(out, "{indent}and{name} {{");
            for r in regions {
                let rname = if r.anonymous { String::new() } else { format!(" {}", r.name) };
                let _ = writeln!(out, "{indent}  region{rname} {{");
                if let StateKind::Or { initial, children } = &r.kind {
                    scope(out, initial.as_deref(), children, depth + 2);
                }
                let _ = writeln!(out, "{indent}  }}");
            }
            let _ = writeln!(out, "{indent}}}");
        }
    }
}

fn scope(out: &mut String, initial: Option<&str>, children: &[StateNode], depth: usize) {
    if let Some(i) = initial {
        let _ = writeln!(out, "{}initial {i}", "  ".repeat(depth));
    }
    for c in children {
        state_node(out, c, depth);
    }
}

pub fn state_diagram(d: &StateDiagramAst) -> String {
    let mut out = String::new();
    if let Some(owner) = &d.owner {
        let _ = write!(out, "statechart {owner}");
        match d.unhandled {
            Some(UnhandledPolicy::Ignore) => out.push_str(" unhandled ignore"),
            Some(UnhandledPolicy::Chaos) => out.push_str(" unhandled chaos"),
            None => {}
        }
        out.push('\n');
    }
    scope(&mut out, d.initial.as_deref(), &d.states, 0);
    for t in &d.transitions {
        let _ = write!(out, "trans {} -> {}", t.source, t.target);
        if let Some(ev) = &t.event {
            let _ = write!(out, " on {}", ev.selector);
            if !ev.params.is_empty() {
                let ps: Vec<String> = ev.params.iter().map(pattern).collect();
                let _ = write!(out, "({})", ps.join(", "));
            }
        }
        if let Some(g) = &t.guard {
            let _ = write!(out, " [{}]", expr(g));
        }
        if !t.sends.is_empty() {
            let sends: Vec<String> = t
                .sends
                .iter()
                .map(|s| {
                    let target = match &s.target {
                        SendTarget::Name(n) => n.clone(),
                        SendTarget::New(c) => format!("new {c}"),
                    };
                    let args: Vec<String> = s.args.iter().map(expr).collect();
                    format!("{target}!{}({})", s.selector, args.join(", "))
                })
                .collect();
            let _ = write!(out, " / {}", sends.join(", "));
        }
        out.push('\n');
    }
    out
}

pub fn sequence_diagram(d: &SequenceDiagramAst) -> String {
    let mut out = format!("seq {}\n", d.name);
    for l in &d.lifelines {
        let _ = writeln!(out, "lifeline {}: {}", l.role, l.class);
    }
    for i in &d.interactions {
        let _ = write!(out, "msg {} -> {} {}", i.from, i.to, i.selector);
        if !i.args.is_empty() {
            let args: Vec<String> = i
                .args
                .iter()
                .map(|a| match a {
                    ArgPattern::Lit(l) => literal(l),
                    ArgPattern::Wild => "_".into(),
                })
                .collect();
            let _ = write!(out, "({})", args.join(", "));
        }
        out.push('\n');
    }
    out
}

pub fn snapshot(s: &SnapshotAst) -> String {
    let mut out = String::new();
    if let Some(n) = &s.name {
        let _ = writeln!(out, "snapshot {n}");
    }
    for o in &s.objects {
        let name = if o.anonymous { "" } else { o.name.as_str() };
        let binds: Vec<String> = o
            .bindings
            .iter()
            .map(|b| format!("{} = {}", b.attr, literal(&b.value)))
            .collect();
        let _ = writeln!(out, "obj {name}: {} {{ {} }}", o.class, binds.join("; "));
    }
    for l in &s.links {
        let op = if l.bidirectional { "--" } else { "->" };
        let _ = writeln!(out, "link {} {} {op} {}", l.assoc, l.from, l.to);
    }
    out
}
