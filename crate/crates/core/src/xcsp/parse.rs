use std::borrow::Cow;
use std::fmt;

use roxmltree::{Document, Node};
use rustc_hash::FxHashMap;

use super::text::{parse_condition, parse_int, parse_intension, parse_range, parse_tuples};
use super::Profile;
use crate::model::{
    split_array_name, validate_instance, Automaton, Cell, Condition, ConstraintKind, Domain, Expr, Instance,
    ObjectiveBody, Occurs, OrderOp, Severity, Transition, VarId,
};

/// A problem found while reading a document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    /// Byte offset of the offending element (0 when unknown).
    pub offset: usize,
    /// Slash-separated element path, e.g. `instance/constraints/sum`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} at byte {} ({}): {}", self.offset, self.path, self.message)
    }
}

/// Result of [`parse_instance_report`]: the instance when no error occurred,
/// and every diagnostic (errors and warnings).
#[derive(Clone, Debug)]
pub struct ParseOutcome {
    pub instance: Option<Instance>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

/// Reads a document; any error diagnostic aborts construction.
pub fn parse_instance(text: &str, profile: Profile) -> Result<Instance, Vec<ParseDiagnostic>> {
    let out = parse_instance_report(text, profile);
    match out.instance {
        Some(inst) => Ok(inst),
        None => Err(out.diagnostics.into_iter().filter(|d| d.severity == Severity::Error).collect()),
    }
}

pub fn parse_instance_report(text: &str, profile: Profile) -> ParseOutcome {
    let doc = match Document::parse(text) {
        Ok(d) => d,
        Err(e) => {
            let pos = e.pos();
            let offset = text
                .split_inclusive('\n')
                .take(pos.row.saturating_sub(1) as usize)
                .map(str::len)
                .sum::<usize>()
                + pos.col.saturating_sub(1) as usize;
            return ParseOutcome {
                instance: None,
                diagnostics: vec![ParseDiagnostic {
                    severity: Severity::Error,
                    offset,
                    path: String::new(),
                    message: format!("malformed markup: {e}"),
                }],
            };
        }
    };
    let mut r = Reader {
        inst: Instance::new(),
        names: FxHashMap::default(),
        arrays: FxHashMap::default(),
        diags: Vec::new(),
        profile,
        args: None,
        origins: Vec::new(),
    };
    r.document(doc.root_element());
    if !r.has_errors() {
        for issue in validate_instance(&r.inst) {
            let (offset, path) = issue
                .constraint
                .and_then(|c| r.origins.get(c).copied())
                .and_then(|start| doc.descendants().find(|n| n.is_element() && n.range().start == start))
                .map_or_else(|| (0, "instance".to_string()), |n| (n.range().start, path_of(n)));
            r.diags.push(ParseDiagnostic {
                severity: issue.severity,
                offset,
                path,
                message: format!("{:?}: {}", issue.rule, issue.message),
            });
        }
    }
    let instance = if r.has_errors() { None } else { Some(r.inst) };
    ParseOutcome { instance, diagnostics: r.diags }
}

fn path_of(node: Node) -> String {
    let mut parts: Vec<String> = node
        .ancestors()
        .filter(|n| n.is_element())
        .map(|n| match n.attribute("id") {
            Some(id) => format!("{}[{id}]", n.tag_name().name()),
            None => n.tag_name().name().to_string(),
        })
        .collect();
    parts.reverse();
    parts.join("/")
}

fn diag(node: Node, message: impl Into<String>) -> ParseDiagnostic {
    ParseDiagnostic { severity: Severity::Error, offset: node.range().start, path: path_of(node), message: message.into() }
}

type PResult<T> = Result<T, ParseDiagnostic>;

fn elements<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(|n| n.is_element())
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    elements(node).find(|n| n.tag_name().name() == name)
}

fn children<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Vec<Node<'a, 'i>> {
    elements(node).filter(|n| n.tag_name().name() == name).collect()
}

fn req<'a, 'i>(node: Node<'a, 'i>, name: &str) -> PResult<Node<'a, 'i>> {
    child(node, name).ok_or_else(|| diag(node, format!("missing <{name}>")))
}

/// Index selector inside a variable reference.
#[derive(Clone, Copy, Debug)]
enum Sel {
    One(usize),
    Span(usize, usize),
    All,
}

fn parse_selectors(s: &str) -> Option<Vec<Sel>> {
    let mut out = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let body = rest.strip_prefix('[')?;
        let close = body.find(']')?;
        let inner = &body[..close];
        out.push(if inner.is_empty() {
            Sel::All
        } else if let Some((a, b)) = inner.split_once("..") {
            Sel::Span(a.parse().ok()?, b.parse().ok()?)
        } else {
            Sel::One(inner.parse().ok()?)
        });
        rest = &body[close + 1..];
    }
    Some(out)
}

/// Row-major enumeration of the index vectors selected by `sels`.
fn enumerate_cells(sels: &[Sel], sizes: &[usize]) -> Result<Vec<Vec<usize>>, String> {
    let mut ranges = Vec::with_capacity(sels.len());
    for (d, (sel, &size)) in sels.iter().zip(sizes).enumerate() {
        let r = match *sel {
            Sel::One(i) => i..=i,
            Sel::Span(a, b) => a..=b,
            Sel::All => 0..=size.wrapping_sub(1),
        };
        if size == 0 || *r.end() >= size {
            return Err(format!("index out of bounds in dimension {d}"));
        }
        ranges.push(r);
    }
    let mut out = vec![Vec::new()];
    for r in ranges {
        let mut next = Vec::with_capacity(out.len() * (r.end() + 1 - r.start()));
        for prefix in &out {
            for i in r.clone() {
                let mut p = prefix.clone();
                p.push(i);
                next.push(p);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Row-major flat offsets of the cells selected by `sels`.
fn selected_offsets(sels: &[Sel], sizes: &[usize]) -> Result<Vec<usize>, String> {
    let mut out = vec![0usize];
    for (d, (sel, &size)) in sels.iter().zip(sizes).enumerate() {
        let (lo, hi) = match *sel {
            Sel::One(i) => (i, i),
            Sel::Span(a, b) => (a, b),
            Sel::All => (0, size.wrapping_sub(1)),
        };
        if size == 0 || hi >= size {
            return Err(format!("index out of bounds in dimension {d}"));
        }
        if lo == hi {
            out.iter_mut().for_each(|o| *o = *o * size + lo);
        } else {
            out = out.iter().flat_map(|&o| (lo..=hi).map(move |i| o * size + i)).collect();
        }
    }
    Ok(out)
}

fn window_ref(tok: &str) -> Option<usize> {
    tok.strip_prefix('%')?.parse().ok()
}

/// Flat offset of a reference made only of single indices, such as
/// `[2][3]`; `None` when the selectors have another form.
fn exact_offset(s: &str, sizes: &[usize]) -> Option<Result<usize, String>> {
    let mut rest = s;
    let mut offset = 0usize;
    let mut d = 0;
    while !rest.is_empty() {
        let body = rest.strip_prefix('[')?;
        let close = body.find(']')?;
        let i: usize = body[..close].parse().ok()?;
        let &size = sizes.get(d)?;
        if i >= size {
            return Some(Err(format!("index out of bounds in dimension {d}")));
        }
        offset = offset * size + i;
        d += 1;
        rest = &body[close + 1..];
    }
    (d == sizes.len()).then_some(Ok(offset))
}

fn cell_name(base: &str, idx: &[usize]) -> String {
    let mut s = base.to_string();
    for i in idx {
        s.push_str(&format!("[{i}]"));
    }
    s
}

fn parse_domain(text: &str) -> Result<Domain, String> {
    let mut ranges = Vec::new();
    for tok in text.split_whitespace() {
        if let Some(r) = parse_range(tok) {
            if r.0 > r.1 {
                return Err(format!("empty range {tok:?}"));
            }
            ranges.push(r);
        } else if let Some(v) = parse_int(tok) {
            ranges.push((v, v));
        } else {
            return Err(format!("domain token {tok:?} is neither an integer nor a range"));
        }
    }
    Domain::new(&ranges).map_err(|_| "empty domain".to_string())
}

/// Shape of a declared array and the variable of each cell in row-major
/// order; cells without a domain are absent.
struct ArrayCells {
    sizes: Vec<usize>,
    cells: Vec<Option<VarId>>,
}

struct Reader {
    inst: Instance,
    names: FxHashMap<String, VarId>,
    arrays: FxHashMap<String, ArrayCells>,
    diags: Vec<ParseDiagnostic>,
    profile: Profile,
    /// Arguments of the group currently being expanded, and the index where
    /// `%...` starts.
    args: Option<(Vec<String>, usize)>,
    /// Offset of the element each constraint came from.
    origins: Vec<usize>,
}

impl Reader {
    fn has_errors(&self) -> bool {
        self.diags.iter().any(|d| d.severity == Severity::Error)
    }

    fn document(&mut self, root: Node) {
        if root.tag_name().name() != "instance" {
            self.diags.push(diag(root, "root element must be <instance>"));
            return;
        }
        if let Some(f) = root.attribute("format") {
            if f != "XCSP3" {
                self.diags.push(diag(root, format!("unsupported format {f:?}")));
            }
        }
        let declared = root.attribute("type");
        if !matches!(declared, Some("CSP") | Some("COP")) {
            self.diags.push(diag(root, "attribute type must be CSP or COP"));
        }
        let mut seen_objectives = false;
        for node in elements(root) {
            match node.tag_name().name() {
                "variables" => self.variables(node),
                "constraints" => self.constraints_in(node, &[]),
                "objectives" => {
                    seen_objectives = true;
                    if let Err(d) = self.objectives(node) {
                        self.diags.push(d);
                    }
                }
                other => self.diags.push(diag(node, format!("unsupported element <{other}>"))),
            }
        }
        match declared {
            Some("CSP") if seen_objectives => self.diags.push(diag(root, "CSP instance with <objectives>")),
            Some("COP") if !seen_objectives => self.diags.push(diag(root, "COP instance without <objectives>")),
            _ => {}
        }
    }

    fn text<'a>(&self, node: Node<'a, '_>) -> PResult<Cow<'a, str>> {
        let mut parts = node.children().filter(|n| n.is_text()).map(|n| n.text().unwrap_or(""));
        let raw = match (parts.next(), parts.next()) {
            (None, _) => Cow::Borrowed(""),
            (Some(only), None) => Cow::Borrowed(only),
            (Some(a), Some(b)) => Cow::Owned([a, b].into_iter().chain(parts).collect()),
        };
        match &self.args {
            None => Ok(raw),
            Some((args, rest)) => substitute(&raw, args, *rest).map(Cow::Owned).map_err(|m| diag(node, m)),
        }
    }

    fn declare(&mut self, node: Node, name: String, domain: Domain) {
        if self.names.contains_key(&name) {
            self.diags.push(diag(node, format!("duplicate variable {name}")));
            return;
        }
        let id = self.inst.add_var(name.clone(), domain);
        self.names.insert(name, id);
    }

    fn variables(&mut self, node: Node) {
        for v in elements(node) {
            let res = match v.tag_name().name() {
                "var" => self.var(v),
                "array" => self.array(v),
                other => Err(diag(v, format!("unsupported element <{other}>"))),
            };
            if let Err(d) = res {
                self.diags.push(d);
            }
        }
    }

    fn check_type(node: Node) -> PResult<()> {
        match node.attribute("type") {
            None | Some("integer") => Ok(()),
            Some(t) => Err(diag(node, format!("unsupported variable type {t:?}"))),
        }
    }

    fn var(&mut self, node: Node) -> PResult<()> {
        Self::check_type(node)?;
        let id = node.attribute("id").ok_or_else(|| diag(node, "missing id"))?;
        match split_array_name(id) {
            Some((_, idx)) if idx.is_empty() => {}
            _ => return Err(diag(node, format!("invalid variable id {id:?}"))),
        }
        if self.arrays.contains_key(id) {
            return Err(diag(node, format!("id {id} already names an array")));
        }
        let domain = parse_domain(&self.text(node)?).map_err(|m| diag(node, m))?;
        self.declare(node, id.to_string(), domain);
        Ok(())
    }

    fn array(&mut self, node: Node) -> PResult<()> {
        Self::check_type(node)?;
        let id = node.attribute("id").ok_or_else(|| diag(node, "missing id"))?;
        match split_array_name(id) {
            Some((_, idx)) if idx.is_empty() => {}
            _ => return Err(diag(node, format!("invalid array id {id:?}"))),
        }
        if self.arrays.contains_key(id) || self.names.contains_key(id) {
            return Err(diag(node, format!("duplicate id {id}")));
        }
        let size_attr = node.attribute("size").ok_or_else(|| diag(node, "missing size"))?;
        let sizes: Vec<usize> = parse_selectors(size_attr.trim())
            .and_then(|s| s.into_iter().map(|x| if let Sel::One(n) = x { Some(n) } else { None }).collect())
            .filter(|s: &Vec<usize>| !s.is_empty() && s.iter().all(|&n| n > 0))
            .ok_or_else(|| diag(node, format!("invalid size {size_attr:?}")))?;
        let all = enumerate_cells(&vec![Sel::All; sizes.len()], &sizes).map_err(|m| diag(node, m))?;
        let mut domains: Vec<Option<Domain>> = vec![None; all.len()];
        let flat = |idx: &[usize]| idx.iter().zip(&sizes).fold(0usize, |acc, (&i, &s)| acc * s + i);
        let doms = children(node, "domain");
        if doms.is_empty() {
            let d = parse_domain(&self.text(node)?).map_err(|m| diag(node, m))?;
            domains.iter_mut().for_each(|slot| *slot = Some(d.clone()));
        } else {
            if elements(node).count() != doms.len() {
                return Err(diag(node, "an array may only contain <domain> elements"));
            }
            for dn in doms {
                let d = parse_domain(&self.text(dn)?).map_err(|m| diag(dn, m))?;
                let targets = dn.attribute("for").ok_or_else(|| diag(dn, "missing for"))?;
                for tok in targets.split_whitespace() {
                    if tok == "others" {
                        domains.iter_mut().filter(|s| s.is_none()).for_each(|s| *s = Some(d.clone()));
                        continue;
                    }
                    let sels = tok
                        .strip_prefix(id)
                        .and_then(parse_selectors)
                        .filter(|s| s.len() == sizes.len())
                        .ok_or_else(|| diag(dn, format!("invalid cell reference {tok:?}")))?;
                    for idx in enumerate_cells(&sels, &sizes).map_err(|m| diag(dn, m))? {
                        let slot = &mut domains[flat(&idx)];
                        if slot.is_some() {
                            return Err(diag(dn, format!("cell {} given two domains", cell_name(id, &idx))));
                        }
                        *slot = Some(d.clone());
                    }
                }
            }
        }
        let mut cells = Vec::with_capacity(all.len());
        for (idx, d) in all.iter().zip(domains) {
            cells.push(d.map(|d| {
                let name = cell_name(id, idx);
                self.declare(node, name.clone(), d);
                self.names[&name]
            }));
        }
        self.arrays.insert(id.to_string(), ArrayCells { sizes, cells });
        Ok(())
    }

    /// Appends the variables of one reference token (`x`, `x[2][3]`, `x[]`,
    /// `x[0..2][]`) in row-major order. Wildcards skip absent cells.
    fn expand_into(&self, tok: &str, local: bool, out: &mut Vec<VarId>) -> Result<(), String> {
        if local {
            let i = window_ref(tok).ok_or_else(|| format!("expected a window reference %i, found {tok:?}"))?;
            out.push(i);
            return Ok(());
        }
        let Some(open) = tok.find('[') else {
            out.push(*self.names.get(tok).ok_or_else(|| format!("unknown variable {tok}"))?);
            return Ok(());
        };
        let base = &tok[..open];
        let array = self.arrays.get(base).ok_or_else(|| format!("unknown array {base}"))?;
        if let Some(offset) = exact_offset(&tok[open..], &array.sizes) {
            out.push(array.cells[offset?].ok_or_else(|| format!("undefined cell {tok}"))?);
            return Ok(());
        }
        let sels = parse_selectors(&tok[open..]).ok_or_else(|| format!("malformed reference {tok:?}"))?;
        if sels.len() != array.sizes.len() {
            return Err(format!("{tok} has {} indices, array has {}", sels.len(), array.sizes.len()));
        }
        out.extend(selected_offsets(&sels, &array.sizes)?.into_iter().filter_map(|o| array.cells[o]));
        Ok(())
    }

    /// A token naming exactly one variable.
    fn resolve_one(&self, tok: &str, local: bool) -> Option<VarId> {
        if local {
            return window_ref(tok);
        }
        match tok.find('[') {
            None => self.names.get(tok).copied(),
            Some(open) => {
                let array = self.arrays.get(&tok[..open])?;
                array.cells[exact_offset(&tok[open..], &array.sizes)?.ok()?]
            }
        }
    }

    fn list_from_text(&self, node: Node, text: &str, local: bool) -> PResult<Vec<VarId>> {
        let mut out = Vec::new();
        for tok in text.split_whitespace() {
            self.expand_into(tok, local, &mut out).map_err(|m| diag(node, m))?;
        }
        Ok(out)
    }

    fn list(&self, node: Node, local: bool) -> PResult<Vec<VarId>> {
        let text = self.text(node)?;
        self.list_from_text(node, &text, local)
    }

    /// The `<list>` child, or the element's own text when it has none.
    fn main_list(&self, node: Node, local: bool) -> PResult<Vec<VarId>> {
        match child(node, "list") {
            Some(l) => self.list(l, local),
            None => self.list(node, local),
        }
    }

    fn ints(&self, node: Node) -> PResult<Vec<i64>> {
        self.text(node)?
            .split_whitespace()
            .map(|t| parse_int(t).ok_or_else(|| diag(node, format!("{t:?} is not an integer"))))
            .collect()
    }

    fn condition(&self, node: Node, local: bool) -> PResult<Condition> {
        let text = self.text(node)?;
        parse_condition(&text, &|s: &str| self.resolve_one(s, local)).map_err(|e| diag(node, e.message))
    }

    fn operator(&self, node: Node) -> PResult<OrderOp> {
        let n = req(node, "operator")?;
        let t = self.text(n)?;
        OrderOp::from_name(t.trim()).ok_or_else(|| diag(n, format!("unknown operator {:?}", t.trim())))
    }

    /// Matrix given as `(a,b)(c,d)` rows or as a two-dimensional reference.
    fn matrix(&self, node: Node) -> PResult<Vec<Vec<VarId>>> {
        let text = self.text(node)?;
        if text.trim_start().starts_with('(') {
            let rows = parse_tuples(&text).map_err(|m| diag(node, m))?;
            return rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|t| self.resolve_one(t, false).ok_or_else(|| diag(node, format!("unknown variable {t}"))))
                        .collect()
                })
                .collect();
        }
        let vars = self.list_from_text(node, &text, false)?;
        let mut rows: Vec<(usize, Vec<VarId>)> = Vec::new();
        for v in vars {
            let first = split_array_name(&self.inst.variables[v].name)
                .and_then(|(_, idx)| idx.first().copied())
                .ok_or_else(|| diag(node, "matrix reference must be two-dimensional"))?;
            match rows.last_mut() {
                Some((r, row)) if *r == first => row.push(v),
                _ => rows.push((first, vec![v])),
            }
        }
        Ok(rows.into_iter().map(|(_, r)| r).collect())
    }

    fn constraints_in(&mut self, node: Node, tags: &[String]) {
        for c in elements(node) {
            let mut tags = tags.to_vec();
            if let Some(class) = c.attribute("class") {
                tags.extend(class.split_whitespace().map(str::to_string));
            }
            match c.tag_name().name() {
                "block" => self.constraints_in(c, &tags),
                "group" => self.group(c, &tags),
                _ => self.post(c, &tags),
            }
        }
    }

    fn post(&mut self, node: Node, tags: &[String]) {
        match self.constraint(node, false) {
            Ok(kinds) => {
                for k in kinds {
                    if !self.profile.allows(&k) {
                        self.diags.push(diag(
                            node,
                            format!("<{}> is not supported by the {} profile", k.name(), self.profile.name()),
                        ));
                        continue;
                    }
                    let tag_refs: Vec<&str> = tags.iter().map(String::as_str).collect();
                    self.inst.post_tagged(k, &tag_refs);
                    self.origins.push(node.range().start);
                }
            }
            Err(d) => self.diags.push(d),
        }
    }

    fn group(&mut self, node: Node, tags: &[String]) {
        let mut templates = elements(node).filter(|n| n.tag_name().name() != "args");
        let Some(template) = templates.next() else {
            self.diags.push(diag(node, "group without a template"));
            return;
        };
        if templates.next().is_some() {
            self.diags.push(diag(node, "group with more than one template"));
            return;
        }
        let template_text: String =
            template.descendants().filter(|n| n.is_text()).map(|n| n.text().unwrap_or("")).collect();
        let rest_from = max_placeholder(&template_text).map_or(0, |m| m + 1);
        for a in children(node, "args") {
            let args = match self.text(a) {
                Ok(t) => t.split_whitespace().map(str::to_string).collect(),
                Err(d) => {
                    self.diags.push(d);
                    continue;
                }
            };
            self.args = Some((args, rest_from));
            self.post(template, tags);
            self.args = None;
        }
    }

    fn objectives(&mut self, node: Node) -> PResult<()> {
        let objs: Vec<Node> = elements(node).collect();
        if objs.len() != 1 {
            return Err(diag(node, "exactly one objective is supported"));
        }
        let o = objs[0];
        let minimize = match o.tag_name().name() {
            "minimize" => true,
            "maximize" => false,
            other => return Err(diag(o, format!("unsupported element <{other}>"))),
        };
        let body = match o.attribute("type") {
            None | Some("expression") => {
                let text = self.text(o)?;
                ObjectiveBody::Expr(
                    parse_intension(&text, &|s: &str| self.resolve_one(s, false)).map_err(|e| diag(o, e.message))?,
                )
            }
            Some("sum") => {
                let scope = self.main_list(o, false)?;
                let coeffs = match child(o, "coeffs") {
                    Some(c) => self.ints(c)?,
                    None => vec![1; scope.len()],
                };
                ObjectiveBody::WeightedSum { scope, coeffs }
            }
            Some(t) => return Err(diag(o, format!("unsupported objective type {t:?}"))),
        };
        if minimize {
            self.inst.minimize(body);
        } else {
            self.inst.maximize(body);
        }
        Ok(())
    }

    fn cells(&self, node: Node, tuple: &[String]) -> PResult<Vec<Cell>> {
        tuple
            .iter()
            .map(|t| {
                if t == "*" {
                    Ok(Cell::Star)
                } else {
                    parse_int(t).map(Cell::Val).ok_or_else(|| diag(node, format!("invalid tuple cell {t:?}")))
                }
            })
            .collect()
    }

    fn transitions(&self, node: Node) -> PResult<Vec<Transition>> {
        let text = self.text(node)?;
        parse_tuples(&text)
            .map_err(|m| diag(node, m))?
            .into_iter()
            .map(|t| match t.as_slice() {
                [from, v, to] => parse_int(v)
                    .map(|v| Transition::new(from.clone(), v, to.clone()))
                    .ok_or_else(|| diag(node, format!("invalid transition value {v:?}"))),
                _ => Err(diag(node, "transitions are (from,value,to) triples")),
            })
            .collect()
    }

    /// Parses one constraint element into one or more constraints (only the
    /// matrix form of lex yields two).
    fn constraint(&self, node: Node, local: bool) -> PResult<Vec<ConstraintKind>> {
        use ConstraintKind as K;
        let name = node.tag_name().name();
        let one = |k: ConstraintKind| Ok(vec![k]);
        match name {
            "intension" => {
                let src = child(node, "function").unwrap_or(node);
                let text = self.text(src)?;
                let e = parse_intension(&text, &|s: &str| self.resolve_one(s, local)).map_err(|e| diag(node, e.message))?;
                one(K::Intension(e))
            }
            "extension" => {
                let scope = self.list(req(node, "list")?, local)?;
                let (tn, positive) = match (child(node, "supports"), child(node, "conflicts")) {
                    (Some(s), None) => (s, true),
                    (None, Some(c)) => (c, false),
                    _ => return Err(diag(node, "extension needs exactly one of <supports> or <conflicts>")),
                };
                let text = self.text(tn)?;
                let tuples = if scope.len() == 1 && !text.trim_start().starts_with('(') {
                    let mut out = Vec::new();
                    for tok in text.split_whitespace() {
                        if tok == "*" {
                            out.push(vec![Cell::Star]);
                        } else if let Some((lo, hi)) = parse_range(tok) {
                            if hi.saturating_sub(lo) > 1_000_000 {
                                return Err(diag(tn, format!("range {tok} too large for a table")));
                            }
                            out.extend((lo..=hi).map(|v| vec![Cell::Val(v)]));
                        } else {
                            out.push(vec![Cell::Val(
                                parse_int(tok).ok_or_else(|| diag(tn, format!("invalid value {tok:?}")))?,
                            )]);
                        }
                    }
                    out
                } else {
                    let raw = parse_tuples(&text).map_err(|m| diag(tn, m))?;
                    raw.iter().map(|t| self.cells(tn, t)).collect::<PResult<_>>()?
                };
                one(K::Extension { scope, tuples, positive })
            }
            "regular" => {
                let scope = self.list(req(node, "list")?, local)?;
                let transitions = self.transitions(req(node, "transitions")?)?;
                let start = self.text(req(node, "start")?)?.trim().to_string();
                let finals = self.text(req(node, "final")?)?.split_whitespace().map(str::to_string).collect();
                one(K::Regular { scope, automaton: Automaton { start, finals, transitions } })
            }
            "mdd" => {
                let scope = self.list(req(node, "list")?, local)?;
                let transitions = self.transitions(req(node, "transitions")?)?;
                one(K::Mdd { scope, transitions })
            }
            "allDifferent" => {
                if let Some(m) = child(node, "matrix") {
                    return one(K::AllDifferentMatrix { matrix: self.matrix(m)? });
                }
                let lists = children(node, "list");
                if lists.len() > 1 {
                    let lists = lists.iter().map(|l| self.list(*l, local)).collect::<PResult<_>>()?;
                    return one(K::AllDifferentList { lists });
                }
                let scope = self.main_list(node, local)?;
                let except = match child(node, "except") {
                    Some(e) => self.ints(e)?,
                    None => Vec::new(),
                };
                one(K::AllDifferent { scope, except })
            }
            "allEqual" => one(K::AllEqual { scope: self.main_list(node, local)? }),
            "ordered" => {
                let scope = self.list(req(node, "list")?, local)?;
                let lengths = child(node, "lengths").map(|l| self.ints(l)).transpose()?;
                one(K::Ordered { scope, op: self.operator(node)?, lengths })
            }
            "lex" => {
                let op = self.operator(node)?;
                if let Some(m) = child(node, "matrix") {
                    let rows = self.matrix(m)?;
                    let width = rows.first().map_or(0, Vec::len);
                    if rows.iter().any(|r| r.len() != width) {
                        return Err(diag(m, "matrix rows have different lengths"));
                    }
                    let cols = (0..width).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
                    return Ok(vec![K::Lex { lists: rows, op }, K::Lex { lists: cols, op }]);
                }
                let lists = children(node, "list").iter().map(|l| self.list(*l, local)).collect::<PResult<_>>()?;
                one(K::Lex { lists, op })
            }
            "precedence" => {
                let scope = self.list(req(node, "list")?, local)?;
                one(K::Precedence { scope, values: self.ints(req(node, "values")?)? })
            }
            "sum" => {
                let scope = self.main_list(node, local)?;
                let coeffs = match child(node, "coeffs") {
                    Some(c) => self.ints(c)?,
                    None => vec![1; scope.len()],
                };
                one(K::Sum { scope, coeffs, condition: self.condition(req(node, "condition")?, local)? })
            }
            "count" => {
                let scope = self.list(req(node, "list")?, local)?;
                let values = self.ints(req(node, "values")?)?;
                one(K::Count { scope, values, condition: self.condition(req(node, "condition")?, local)? })
            }
            "nValues" => {
                let scope = self.main_list(node, local)?;
                one(K::NValues { scope, condition: self.condition(req(node, "condition")?, local)? })
            }
            "cardinality" => {
                let scope = self.list(req(node, "list")?, local)?;
                let values = self.ints(req(node, "values")?)?;
                let on = req(node, "occurs")?;
                let mut occurs = Vec::new();
                for tok in self.text(on)?.split_whitespace() {
                    occurs.push(if let Some((lo, hi)) = parse_range(tok) {
                        Occurs::Interval(lo, hi)
                    } else if let Some(v) = parse_int(tok) {
                        Occurs::Value(v)
                    } else {
                        Occurs::Var(
                            self.resolve_one(tok, local).ok_or_else(|| diag(on, format!("unknown variable {tok}")))?,
                        )
                    });
                }
                one(K::Cardinality { scope, values, occurs })
            }
            "maximum" | "minimum" => {
                let scope = self.main_list(node, local)?;
                let condition = self.condition(req(node, "condition")?, local)?;
                one(if name == "maximum" { K::Maximum { scope, condition } } else { K::Minimum { scope, condition } })
            }
            "element" => {
                let ln = req(node, "list")?;
                if ln.attribute("startIndex").is_some_and(|s| s.trim() != "0") {
                    return Err(diag(ln, "only startIndex 0 is supported"));
                }
                let list = self.list(ln, local)?;
                let inode = req(node, "index")?;
                let it = self.text(inode)?;
                let index = self
                    .resolve_one(it.trim(), local)
                    .ok_or_else(|| diag(inode, format!("index must be a variable, found {:?}", it.trim())))?;
                let condition = match (child(node, "value"), child(node, "condition")) {
                    (Some(v), None) => {
                        let t = self.text(v)?;
                        let t = t.trim();
                        match parse_int(t) {
                            Some(c) => Condition::value(crate::model::CondOp::Eq, c),
                            None => Condition::var(
                                crate::model::CondOp::Eq,
                                self.resolve_one(t, local).ok_or_else(|| diag(v, format!("unknown variable {t}")))?,
                            ),
                        }
                    }
                    (None, Some(c)) => self.condition(c, local)?,
                    _ => return Err(diag(node, "element needs exactly one of <value> or <condition>")),
                };
                one(K::Element { list, index, condition })
            }
            "channel" => {
                let lists = children(node, "list");
                match lists.len() {
                    0 => one(K::Channel { list: self.list(node, local)?, other: None }),
                    1 => one(K::Channel { list: self.list(lists[0], local)?, other: None }),
                    2 => one(K::Channel {
                        list: self.list(lists[0], local)?,
                        other: Some(self.list(lists[1], local)?),
                    }),
                    _ => Err(diag(node, "channel takes one or two lists")),
                }
            }
            "noOverlap" => {
                let on = req(node, "origins")?;
                let ln = req(node, "lengths")?;
                let ot = self.text(on)?;
                let lt = self.text(ln)?;
                let (origins, lengths) = if ot.trim_start().starts_with('(') {
                    let origins = parse_tuples(&ot)
                        .map_err(|m| diag(on, m))?
                        .iter()
                        .map(|t| {
                            t.iter()
                                .map(|s| self.resolve_one(s, local).ok_or_else(|| diag(on, format!("unknown variable {s}"))))
                                .collect::<PResult<Vec<_>>>()
                        })
                        .collect::<PResult<Vec<_>>>()?;
                    let lengths = parse_tuples(&lt)
                        .map_err(|m| diag(ln, m))?
                        .iter()
                        .map(|t| {
                            t.iter()
                                .map(|s| parse_int(s).ok_or_else(|| diag(ln, format!("length {s:?} is not an integer"))))
                                .collect::<PResult<Vec<_>>>()
                        })
                        .collect::<PResult<Vec<_>>>()?;
                    (origins, lengths)
                } else {
                    let origins = self.list_from_text(on, &ot, local)?.into_iter().map(|v| vec![v]).collect();
                    let lengths = self.ints(ln)?.into_iter().map(|l| vec![l]).collect();
                    (origins, lengths)
                };
                one(K::NoOverlap { origins, lengths })
            }
            "cumulative" => {
                let origins = self.list(req(node, "origins")?, local)?;
                let lengths = self.ints(req(node, "lengths")?)?;
                let heights = self.ints(req(node, "heights")?)?;
                let condition = self.condition(req(node, "condition")?, local)?;
                one(K::Cumulative { origins, lengths, heights, condition })
            }
            "binPacking" => {
                let scope = self.list(req(node, "list")?, local)?;
                let sizes = self.ints(req(node, "sizes")?)?;
                one(K::BinPacking { scope, sizes, condition: self.condition(req(node, "condition")?, local)? })
            }
            "knapsack" => {
                let scope = self.list(req(node, "list")?, local)?;
                let weights = self.ints(req(node, "weights")?)?;
                let profits = self.ints(req(node, "profits")?)?;
                let conds = children(node, "condition");
                if conds.len() != 2 {
                    return Err(diag(node, "knapsack needs a weight and a profit <condition>"));
                }
                one(K::Knapsack {
                    scope,
                    weights,
                    profits,
                    weight_condition: self.condition(conds[0], local)?,
                    profit_condition: self.condition(conds[1], local)?,
                })
            }
            "circuit" => {
                if let Some(l) = child(node, "list") {
                    if l.attribute("startIndex").is_some_and(|s| s.trim() != "0") {
                        return Err(diag(l, "only startIndex 0 is supported"));
                    }
                }
                one(K::Circuit { scope: self.main_list(node, local)? })
            }
            "instantiation" => {
                let scope = self.list(req(node, "list")?, local)?;
                one(K::Instantiation { scope, values: self.ints(req(node, "values")?)? })
            }
            "slide" => {
                if local {
                    return Err(diag(node, "nested slide"));
                }
                if node.attribute("circular").is_some_and(|c| c.trim() == "true") {
                    return Err(diag(node, "circular slide is not supported"));
                }
                let ln = req(node, "list")?;
                let offset = match ln.attribute("offset") {
                    Some(o) => o.trim().parse::<usize>().map_err(|_| diag(ln, format!("invalid offset {o:?}")))?,
                    None => 1,
                };
                let scope = self.list(ln, false)?;
                let mut patterns = elements(node).filter(|n| n.tag_name().name() != "list");
                let pn = patterns.next().ok_or_else(|| diag(node, "slide without a pattern"))?;
                if patterns.next().is_some() {
                    return Err(diag(node, "slide with more than one pattern"));
                }
                if !matches!(pn.tag_name().name(), "intension" | "extension") {
                    return Err(diag(pn, "slide pattern must be intension or extension"));
                }
                let pattern = self.constraint(pn, true)?.pop().expect("one pattern constraint");
                let arity = pattern.scope().last().map_or(0, |&m| m + 1);
                one(K::Slide { scope, arity, offset, pattern: Box::new(pattern) })
            }
            other => Err(diag(node, format!("unsupported constraint element <{other}>"))),
        }
    }
}

/// Highest explicit `%i` index in a template.
fn max_placeholder(text: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut max: Option<usize> = None;
    for (i, _) in text.match_indices('%') {
        let digits: String = bytes[i + 1..].iter().take_while(|b| b.is_ascii_digit()).map(|&b| b as char).collect();
        if let Ok(k) = digits.parse::<usize>() {
            max = Some(max.map_or(k, |m| m.max(k)));
        }
    }
    max
}

/// Replaces `%i` by the i-th argument and `%...` by the arguments from
/// `rest_from` on.
fn substitute(text: &str, args: &[String], rest_from: usize) -> Result<String, String> {
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            if text[i + 1..].starts_with("...") {
                out.push_str(&args.get(rest_from..).unwrap_or(&[]).join(" "));
                i += 4;
                continue;
            }
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > start {
                let k: usize = text[start..j].parse().map_err(|_| "bad argument index".to_string())?;
                let a = args.get(k).ok_or_else(|| format!("argument %{k} missing"))?;
                out.push_str(a);
                i = j;
                continue;
            }
            return Err("stray '%' in group template".to_string());
        }
        let ch = text[i..].chars().next().unwrap();
        out.push(ch);
        i += ch.len_utf8();
    }
    Ok(out)
}

/// Convenience: parses an intension expression against the variable names
/// of an instance, including array cell references.
pub fn parse_intension_in(inst: &Instance, text: &str) -> Result<Expr, super::text::TextError> {
    let names: FxHashMap<&str, VarId> = inst.variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    parse_intension(text, &|s: &str| names.get(s).copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CondOp, Op, TAG_SYMMETRY_BREAKING};

    fn parse(body: &str, ty: &str) -> Result<Instance, Vec<ParseDiagnostic>> {
        parse_instance(&format!("<instance format=\"XCSP3\" type=\"{ty}\">{body}</instance>"), Profile::Main)
    }

    #[test]
    fn var_with_range() {
        let inst = parse("<variables><var id=\"x\"> 0..9 </var></variables>", "CSP").unwrap();
        assert_eq!(inst.variables[0].name, "x");
        assert_eq!(inst.variables[0].domain, Domain::range(0, 9));
    }

    #[test]
    fn starred_supports() {
        let inst = parse(
            "<variables><var id=\"x\">0..3</var><var id=\"y\">0..3</var></variables>\
             <constraints><extension><list>x y</list><supports> (1,*)(2,3) </supports></extension></constraints>",
            "CSP",
        )
        .unwrap();
        let k = &inst.constraints[0].kind;
        assert!(k.is_starred());
        assert_eq!(
            *k,
            ConstraintKind::Extension {
                scope: vec![0, 1],
                tuples: vec![vec![Cell::Val(1), Cell::Star], vec![Cell::Val(2), Cell::Val(3)]],
                positive: true
            }
        );
    }

    #[test]
    fn arrays_and_references() {
        let inst = parse(
            "<variables><array id=\"x\" size=\"[2][3]\"><domain for=\"x[0][]\">0 1</domain>\
             <domain for=\"x[1][0] x[1][2]\">5..6</domain></array></variables>\
             <constraints><sum><list>x[][]</list><condition>(le,9)</condition></sum>\
             <allEqual>x[1][]</allEqual></constraints>",
            "CSP",
        )
        .unwrap();
        let names: Vec<&str> = inst.variables.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["x[0][0]", "x[0][1]", "x[0][2]", "x[1][0]", "x[1][2]"]);
        assert_eq!(inst.constraints[1].kind, ConstraintKind::AllEqual { scope: vec![3, 4] });
        assert!(parse("<variables><array id=\"x\" size=\"[2]\">0</array></variables><constraints><allEqual>x[5]</allEqual></constraints>", "CSP").is_err());
    }

    #[test]
    fn groups_and_blocks() {
        let inst = parse(
            "<variables><array id=\"x\" size=\"[3]\">0..2</array></variables><constraints>\
             <block class=\"symmetry-breaking\"><group><intension>lt(%0,%1)</intension>\
             <args>x[0] x[1]</args><args>x[1] x[2]</args></group></block>\
             <group><sum><list>%...</list><condition>(eq,%0)</condition></sum><args>x[2] x[0] x[1]</args></group>\
             </constraints>",
            "CSP",
        )
        .unwrap();
        assert_eq!(inst.constraints.len(), 3);
        assert!(inst.constraints[1].has_tag(TAG_SYMMETRY_BREAKING));
        assert_eq!(inst.constraints[1].kind, ConstraintKind::Intension(Expr::binary(Op::Lt, Expr::Var(1), Expr::Var(2))));
        assert_eq!(
            inst.constraints[2].kind,
            ConstraintKind::Sum { scope: vec![0, 1], coeffs: vec![1, 1], condition: Condition::var(CondOp::Eq, 2) }
        );
    }

    #[test]
    fn objectives_and_types() {
        let vars = "<variables><var id=\"x\">0..3</var><var id=\"y\">0..3</var></variables>";
        let inst = parse(&format!("{vars}<objectives><minimize type=\"sum\"><list>x y</list><coeffs>2 3</coeffs></minimize></objectives>"), "COP").unwrap();
        assert_eq!(inst.objective.unwrap().body, ObjectiveBody::WeightedSum { scope: vec![0, 1], coeffs: vec![2, 3] });
        assert!(parse(&format!("{vars}<objectives><maximize>x</maximize></objectives>"), "CSP").is_err());
        assert!(parse(vars, "COP").is_err());
    }

    #[test]
    fn errors_name_the_element() {
        let errs = parse("<variables><var id=\"x\">0..a</var></variables>", "CSP").unwrap_err();
        assert!(errs[0].path.ends_with("var[x]"), "{}", errs[0]);
        let errs = parse("<variables><var id=\"x\">0</var></variables><constraints><foo/></constraints>", "CSP").unwrap_err();
        assert!(errs[0].message.contains("<foo>"));
        let errs = parse_instance("<instance", Profile::Main).unwrap_err();
        assert!(errs[0].message.contains("malformed"));
    }

    #[test]
    fn mini_profile_rejects_globals() {
        let doc = "<instance format=\"XCSP3\" type=\"CSP\"><variables><var id=\"x\">0..3</var><var id=\"y\">0..3</var></variables>\
                   <constraints><allEqual>x y</allEqual></constraints></instance>";
        assert!(parse_instance(doc, Profile::Main).is_ok());
        let errs = parse_instance(doc, Profile::Mini).unwrap_err();
        assert!(errs[0].message.contains("mini"));
    }

    #[test]
    fn substitution() {
        let args: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        assert_eq!(substitute("eq(%1,%0) %...", &args, 2).unwrap(), "eq(b,a) c d");
        assert_eq!(max_placeholder("eq(%1,%0) %..."), Some(1));
        assert!(substitute("%7", &args, 0).is_err());
    }
}
