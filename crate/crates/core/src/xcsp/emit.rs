use std::borrow::Cow;
use std::fmt::Write as _;

use super::text::write_condition;
use crate::model::{
    split_array_name, Cell, CondOp, Condition, ConstraintKind, Domain, Instance, ObjectiveBody, Occurs, Operand,
    Sense, Transition, VarId,
};

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

struct Emitter<'a> {
    inst: &'a Instance,
    out: String,
}

/// Writes an instance as a document. Variables and constraints appear in
/// id order; array cells named `base[i]..` are regrouped into `<array>`.
/// The instance should pass validation.
pub fn emit_instance(inst: &Instance) -> String {
    let mut e = Emitter { inst, out: String::new() };
    let ty = if inst.objective.is_some() { "COP" } else { "CSP" };
    let _ = writeln!(e.out, "<instance format=\"XCSP3\" type=\"{ty}\">");
    e.variables();
    e.out.push_str("  <constraints>\n");
    for c in &inst.constraints {
        let body = constraint_xml(&c.kind, &|v| Cow::Borrowed(inst.variables[v].name.as_str()));
        if c.tags.is_empty() {
            let _ = writeln!(e.out, "    {body}");
        } else {
            let _ = writeln!(e.out, "    <block class=\"{}\">\n      {body}\n    </block>", escape(&c.tags.join(" ")));
        }
    }
    e.out.push_str("  </constraints>\n");
    if let Some(obj) = &inst.objective {
        let tag = match obj.sense {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        };
        e.out.push_str("  <objectives>\n");
        match &obj.body {
            ObjectiveBody::Expr(x) => {
                let mut s = String::new();
                x.write_with(&mut s, &|v| Cow::Borrowed(inst.variables[v].name.as_str()));
                let _ = writeln!(e.out, "    <{tag}> {s} </{tag}>");
            }
            ObjectiveBody::WeightedSum { scope, coeffs } => {
                let _ = writeln!(
                    e.out,
                    "    <{tag} type=\"sum\">\n      <list> {} </list>\n      <coeffs> {} </coeffs>\n    </{tag}>",
                    e.names(scope),
                    join(coeffs)
                );
            }
        }
        e.out.push_str("  </objectives>\n");
    }
    e.out.push_str("</instance>\n");
    e.out
}

impl Emitter<'_> {
    fn names(&self, vars: &[VarId]) -> String {
        vars.iter().map(|&v| self.inst.variables[v].name.as_str()).collect::<Vec<_>>().join(" ")
    }

    fn variables(&mut self) {
        let vars = &self.inst.variables;
        self.out.push_str("  <variables>\n");
        let mut i = 0;
        while i < vars.len() {
            let (base, idx) = split_array_name(&vars[i].name).unwrap_or((vars[i].name.as_str(), Vec::new()));
            if idx.is_empty() {
                let _ = writeln!(self.out, "    <var id=\"{}\"> {} </var>", escape(&vars[i].name), vars[i].domain);
                i += 1;
                continue;
            }
            let mut cells: Vec<(Vec<usize>, &Domain, &str)> = Vec::new();
            let mut j = i;
            while j < vars.len() {
                match split_array_name(&vars[j].name) {
                    Some((b, ix)) if b == base && ix.len() == idx.len() => {
                        cells.push((ix, &vars[j].domain, vars[j].name.as_str()))
                    }
                    _ => break,
                }
                j += 1;
            }
            let mut sizes = vec![0usize; idx.len()];
            for (ix, _, _) in &cells {
                for (s, &k) in sizes.iter_mut().zip(ix) {
                    *s = (*s).max(k + 1);
                }
            }
            let size_attr: String = sizes.iter().map(|s| format!("[{s}]")).collect();
            let full = cells.len() == sizes.iter().product::<usize>();
            if full && cells.iter().all(|c| c.1 == cells[0].1) {
                let _ = writeln!(self.out, "    <array id=\"{base}\" size=\"{size_attr}\"> {} </array>", cells[0].1);
            } else {
                let _ = writeln!(self.out, "    <array id=\"{base}\" size=\"{size_attr}\">");
                let mut groups: Vec<(&Domain, Vec<&str>)> = Vec::new();
                for (_, d, name) in &cells {
                    match groups.iter_mut().find(|g| g.0 == *d) {
                        Some(g) => g.1.push(name),
                        None => groups.push((d, vec![name])),
                    }
                }
                for (d, names) in groups {
                    let _ = writeln!(self.out, "      <domain for=\"{}\"> {d} </domain>", names.join(" "));
                }
                self.out.push_str("    </array>\n");
            }
            i = j;
        }
        self.out.push_str("  </variables>\n");
    }
}

fn tuples(rows: &[Vec<String>]) -> String {
    rows.iter().map(|r| format!("({})", r.join(","))).collect()
}

fn cell(c: &Cell) -> String {
    match c {
        Cell::Star => "*".to_string(),
        Cell::Val(v) => v.to_string(),
    }
}

fn transitions(ts: &[Transition]) -> String {
    tuples(&ts.iter().map(|t| vec![t.from.clone(), t.value.to_string(), t.to.clone()]).collect::<Vec<_>>())
}

/// Single-element serialization of one constraint, naming variables
/// through `name`.
pub fn constraint_xml<'n>(kind: &ConstraintKind, name: &dyn Fn(VarId) -> Cow<'n, str>) -> String {
    use ConstraintKind::*;
    let l = |vs: &[VarId]| {
        let mut s = String::with_capacity(vs.len() * 8);
        for (i, &v) in vs.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&name(v));
        }
        s
    };
    let cond = |c: &Condition| format!("<condition> {} </condition>", write_condition(c, name));
    match kind {
        Intension(e) => {
            let mut s = String::new();
            e.write_with(&mut s, name);
            format!("<intension> {s} </intension>")
        }
        Extension { scope, tuples: ts, positive } => {
            let tag = if *positive { "supports" } else { "conflicts" };
            let body = if scope.len() == 1 {
                ts.iter().map(|t| cell(&t[0])).collect::<Vec<_>>().join(" ")
            } else {
                tuples(&ts.iter().map(|t| t.iter().map(cell).collect()).collect::<Vec<_>>())
            };
            format!("<extension><list> {} </list><{tag}> {body} </{tag}></extension>", l(scope))
        }
        Regular { scope, automaton } => format!(
            "<regular><list> {} </list><transitions> {} </transitions><start> {} </start><final> {} </final></regular>",
            l(scope),
            transitions(&automaton.transitions),
            automaton.start,
            automaton.finals.join(" ")
        ),
        Mdd { scope, transitions: ts } => {
            format!("<mdd><list> {} </list><transitions> {} </transitions></mdd>", l(scope), transitions(ts))
        }
        AllDifferent { scope, except } if except.is_empty() => format!("<allDifferent> {} </allDifferent>", l(scope)),
        AllDifferent { scope, except } => {
            format!("<allDifferent><list> {} </list><except> {} </except></allDifferent>", l(scope), join(except))
        }
        AllDifferentMatrix { matrix } => format!(
            "<allDifferent><matrix> {} </matrix></allDifferent>",
            tuples(&matrix.iter().map(|r| r.iter().map(|&v| name(v).into_owned()).collect()).collect::<Vec<_>>())
        ),
        AllDifferentList { lists } => {
            let inner: String = lists.iter().map(|x| format!("<list> {} </list>", l(x))).collect();
            format!("<allDifferent>{inner}</allDifferent>")
        }
        AllEqual { scope } => format!("<allEqual> {} </allEqual>", l(scope)),
        Ordered { scope, op, lengths } => {
            let lens = lengths.as_ref().map(|ls| format!("<lengths> {} </lengths>", join(ls))).unwrap_or_default();
            format!("<ordered><list> {} </list>{lens}<operator> {} </operator></ordered>", l(scope), op.name())
        }
        Lex { lists, op } => {
            let inner: String = lists.iter().map(|x| format!("<list> {} </list>", l(x))).collect();
            format!("<lex>{inner}<operator> {} </operator></lex>", op.name())
        }
        Precedence { scope, values } => {
            format!("<precedence><list> {} </list><values> {} </values></precedence>", l(scope), join(values))
        }
        Sum { scope, coeffs, condition } => {
            let cs = if coeffs.iter().all(|&c| c == 1) {
                String::new()
            } else {
                format!("<coeffs> {} </coeffs>", join(coeffs))
            };
            format!("<sum><list> {} </list>{cs}{}</sum>", l(scope), cond(condition))
        }
        Count { scope, values, condition } => format!(
            "<count><list> {} </list><values> {} </values>{}</count>",
            l(scope),
            join(values),
            cond(condition)
        ),
        NValues { scope, condition } => format!("<nValues><list> {} </list>{}</nValues>", l(scope), cond(condition)),
        Cardinality { scope, values, occurs } => {
            let occ: Vec<String> = occurs
                .iter()
                .map(|o| match o {
                    Occurs::Value(k) => k.to_string(),
                    Occurs::Interval(a, b) => format!("{a}..{b}"),
                    Occurs::Var(v) => name(*v).into_owned(),
                })
                .collect();
            format!(
                "<cardinality><list> {} </list><values> {} </values><occurs> {} </occurs></cardinality>",
                l(scope),
                join(values),
                occ.join(" ")
            )
        }
        Maximum { scope, condition } => format!("<maximum><list> {} </list>{}</maximum>", l(scope), cond(condition)),
        Minimum { scope, condition } => format!("<minimum><list> {} </list>{}</minimum>", l(scope), cond(condition)),
        Element { list, index, condition } => {
            let tail = match (&condition.op, &condition.rhs) {
                (CondOp::Eq, Operand::Value(v)) => format!("<value> {v} </value>"),
                (CondOp::Eq, Operand::Var(v)) => format!("<value> {} </value>", name(*v)),
                _ => cond(condition),
            };
            format!("<element><list> {} </list><index> {} </index>{tail}</element>", l(list), name(*index))
        }
        Channel { list, other: None } => format!("<channel> {} </channel>", l(list)),
        Channel { list, other: Some(o) } => {
            format!("<channel><list> {} </list><list> {} </list></channel>", l(list), l(o))
        }
        NoOverlap { origins, lengths } => {
            if origins.iter().all(|o| o.len() == 1) && lengths.iter().all(|x| x.len() == 1) {
                let os: Vec<VarId> = origins.iter().map(|o| o[0]).collect();
                let ls: Vec<i64> = lengths.iter().map(|x| x[0]).collect();
                format!("<noOverlap><origins> {} </origins><lengths> {} </lengths></noOverlap>", l(&os), join(&ls))
            } else {
                let os = tuples(&origins.iter().map(|o| o.iter().map(|&v| name(v).into_owned()).collect()).collect::<Vec<_>>());
                let ls = tuples(&lengths.iter().map(|x| x.iter().map(|v| v.to_string()).collect()).collect::<Vec<_>>());
                format!("<noOverlap><origins> {os} </origins><lengths> {ls} </lengths></noOverlap>")
            }
        }
        Cumulative { origins, lengths, heights, condition } => format!(
            "<cumulative><origins> {} </origins><lengths> {} </lengths><heights> {} </heights>{}</cumulative>",
            l(origins),
            join(lengths),
            join(heights),
            cond(condition)
        ),
        BinPacking { scope, sizes, condition } => format!(
            "<binPacking><list> {} </list><sizes> {} </sizes>{}</binPacking>",
            l(scope),
            join(sizes),
            cond(condition)
        ),
        Knapsack { scope, weights, profits, weight_condition, profit_condition } => format!(
            "<knapsack><list> {} </list><weights> {} </weights><profits> {} </profits>{}{}</knapsack>",
            l(scope),
            join(weights),
            join(profits),
            cond(weight_condition),
            cond(profit_condition)
        ),
        Circuit { scope } => format!("<circuit> {} </circuit>", l(scope)),
        Instantiation { scope, values } => format!(
            "<instantiation><list> {} </list><values> {} </values></instantiation>",
            l(scope),
            join(values)
        ),
        Slide { scope, offset, pattern, .. } => {
            let inner = constraint_xml(pattern, &|v| Cow::Owned(format!("%{v}")));
            format!("<slide><list offset=\"{offset}\"> {} </list>{inner}</slide>", l(scope))
        }
    }
}
