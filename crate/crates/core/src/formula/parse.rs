use super::{ArraySize, Atom, Formula, FormulaError, Sort, TermId, TermKind};

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug)]
enum Sexp {
    Symbol(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Symbol(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn syntax(pos: Pos, msg: impl Into<String>) -> FormulaError {
    FormulaError::Syntax {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

fn sort_err(pos: Pos, msg: impl Into<String>) -> FormulaError {
    FormulaError::Sort {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

fn decl_err(pos: Pos, msg: impl Into<String>) -> FormulaError {
    FormulaError::Declaration {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

fn read_sexps(text: &str) -> Result<Vec<Sexp>, FormulaError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        let here = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                stack.push((Vec::new(), here));
            }
            ')' => {
                chars.next();
                col += 1;
                let (items, start) = stack.pop().ok_or_else(|| syntax(here, "unbalanced ')'"))?;
                let list = Sexp::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            _ => {
                let mut tok = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    tok.push(c);
                    chars.next();
                    col += 1;
                }
                let sym = Sexp::Symbol(tok, here);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(sym),
                    None => return Err(syntax(here, "expected '(' at top level")),
                }
            }
        }
    }
    if let Some((_, start)) = stack.pop() {
        return Err(syntax(start, "unclosed '('"));
    }
    Ok(top)
}

fn as_int(s: &Sexp) -> Option<i64> {
    match s {
        Sexp::Symbol(tok, _) => tok.parse().ok(),
        _ => None,
    }
}

fn expect_int(s: &Sexp) -> Result<i64, FormulaError> {
    as_int(s).ok_or_else(|| syntax(s.pos(), "expected an integer"))
}

fn expect_name(s: &Sexp) -> Result<&str, FormulaError> {
    match s {
        Sexp::Symbol(tok, _) if tok.parse::<i64>().is_err() => Ok(tok),
        _ => Err(syntax(s.pos(), "expected a name")),
    }
}

fn arity(items: &[Sexp], n: usize, pos: Pos, head: &str) -> Result<(), FormulaError> {
    if items.len() != n + 1 {
        return Err(syntax(pos, format!("'{head}' expects {n} arguments, got {}", items.len() - 1)));
    }
    Ok(())
}

struct Parser {
    f: Formula,
}

impl Parser {
    fn check_fresh(&self, name: &str, pos: Pos) -> Result<(), FormulaError> {
        if self.f.is_declared(name) {
            return Err(decl_err(pos, format!("{name} declared twice")));
        }
        Ok(())
    }

    fn term(&mut self, s: &Sexp) -> Result<TermId, FormulaError> {
        match s {
            Sexp::Symbol(tok, pos) => {
                if let Ok(v) = tok.parse::<i64>() {
                    return Ok(self.f.terms.constant(v));
                }
                self.f.symbol(tok).ok_or_else(|| FormulaError::Undeclared {
                    line: pos.line,
                    col: pos.col,
                    what: "symbol",
                    name: tok.clone(),
                })
            }
            Sexp::List(items, pos) => {
                let head = match items.first() {
                    Some(Sexp::Symbol(h, _)) => h.as_str(),
                    _ => return Err(syntax(*pos, "expected an operator")),
                };
                match head {
                    "select" => {
                        arity(items, 2, *pos, head)?;
                        let a = self.container(&items[1], "select")?;
                        let i = self.int_term(&items[2])?;
                        Ok(self.f.terms.select(a, i))
                    }
                    "store" => {
                        arity(items, 3, *pos, head)?;
                        let a = self.container(&items[1], "store")?;
                        if let TermKind::Uniform { size: None, .. } = self.f.terms.kind(a) {
                            return Err(sort_err(items[1].pos(), "store on a uniform array without size"));
                        }
                        let i = self.int_term(&items[2])?;
                        let e = self.int_term(&items[3])?;
                        Ok(self.f.terms.store(a, i, e))
                    }
                    "size" => {
                        arity(items, 1, *pos, head)?;
                        let a = self.array_term(&items[1])?;
                        if self.f.array_size(a).is_none() {
                            return Err(sort_err(items[1].pos(), "size of an unsized array"));
                        }
                        Ok(self.f.terms.size_of(a))
                    }
                    "delete" => {
                        arity(items, 2, *pos, head)?;
                        let m = self.term(&items[1])?;
                        if self.f.terms.sort(m) != Sort::Map {
                            return Err(sort_err(items[1].pos(), "delete expects a map"));
                        }
                        let k = self.int_term(&items[2])?;
                        Ok(self.f.terms.delete(m, k))
                    }
                    _ => Err(syntax(*pos, format!("unknown term operator '{head}'"))),
                }
            }
        }
    }

    fn sorted(&mut self, s: &Sexp, want: Sort) -> Result<TermId, FormulaError> {
        let t = self.term(s)?;
        let got = self.f.terms.sort(t);
        if got != want {
            return Err(sort_err(s.pos(), format!("expected {want} term, found {got}")));
        }
        Ok(t)
    }

    fn int_term(&mut self, s: &Sexp) -> Result<TermId, FormulaError> {
        self.sorted(s, Sort::Int)
    }

    fn array_term(&mut self, s: &Sexp) -> Result<TermId, FormulaError> {
        if let Sexp::Symbol(tok, pos) = s {
            if tok.parse::<i64>().is_err() && !self.f.is_declared(tok) {
                return Err(FormulaError::Undeclared {
                    line: pos.line,
                    col: pos.col,
                    what: "array",
                    name: tok.clone(),
                });
            }
        }
        self.sorted(s, Sort::Array)
    }

    /// An array or a map, as accepted by `select` and `store`.
    fn container(&mut self, s: &Sexp, op: &str) -> Result<TermId, FormulaError> {
        if let Sexp::Symbol(tok, pos) = s {
            if tok.parse::<i64>().is_err() && !self.f.is_declared(tok) {
                return Err(FormulaError::Undeclared {
                    line: pos.line,
                    col: pos.col,
                    what: "array",
                    name: tok.clone(),
                });
            }
        }
        let t = self.term(s)?;
        if self.f.terms.sort(t) == Sort::Int {
            return Err(sort_err(s.pos(), format!("{op} expects an array, found int")));
        }
        Ok(t)
    }

    fn sized_array(&mut self, s: &Sexp) -> Result<TermId, FormulaError> {
        let a = self.array_term(s)?;
        if self.f.array_size(a).is_none() {
            return Err(sort_err(s.pos(), "array comparison needs a sized array"));
        }
        Ok(a)
    }

    fn linear_sum(&mut self, s: &Sexp, out: &mut Vec<(i64, TermId)>) -> Result<(), FormulaError> {
        if let Sexp::List(items, pos) = s {
            match items.first() {
                Some(Sexp::Symbol(h, _)) if h == "+" => {
                    for it in &items[1..] {
                        self.linear_sum(it, out)?;
                    }
                    return Ok(());
                }
                Some(Sexp::Symbol(h, _)) if h == "*" => {
                    arity(items, 2, *pos, "*")?;
                    let c = expect_int(&items[1])?;
                    let t = self.int_term(&items[2])?;
                    out.push((c, t));
                    return Ok(());
                }
                _ => {}
            }
        }
        let t = self.int_term(s)?;
        out.push((1, t));
        Ok(())
    }

    fn statement(&mut self, s: &Sexp) -> Result<(), FormulaError> {
        let (items, pos) = match s {
            Sexp::List(items, pos) => (items, *pos),
            Sexp::Symbol(_, pos) => return Err(syntax(*pos, "expected '('")),
        };
        let head = match items.first() {
            Some(Sexp::Symbol(h, _)) => h.as_str(),
            _ => return Err(syntax(pos, "expected a keyword")),
        };
        match head {
            "declare-int" => {
                arity(items, 3, pos, head)?;
                let name = expect_name(&items[1])?;
                self.check_fresh(name, items[1].pos())?;
                let (lo, hi) = (expect_int(&items[2])?, expect_int(&items[3])?);
                if lo > hi {
                    return Err(decl_err(pos, format!("empty range {lo}..{hi} for {name}")));
                }
                self.f.declare_int(name, lo, hi);
            }
            "declare-array" => {
                if items.len() != 3 && items.len() != 5 {
                    return Err(syntax(pos, "'declare-array' expects NAME SIZE [LO HI]"));
                }
                let name = expect_name(&items[1])?;
                self.check_fresh(name, items[1].pos())?;
                let size = match &items[2] {
                    Sexp::List(sz, p) => {
                        match sz.first() {
                            Some(Sexp::Symbol(h, _)) if h == "bounded" => {}
                            _ => return Err(syntax(*p, "expected (bounded INT)")),
                        }
                        arity(sz, 1, *p, "bounded")?;
                        let max = expect_int(&sz[1])?;
                        if max < 1 || max > u32::MAX as i64 {
                            return Err(decl_err(*p, "bounded size must be at least 1"));
                        }
                        ArraySize::Bounded(max as u32)
                    }
                    other => {
                        let n = expect_int(other)?;
                        if n < 1 || n > u32::MAX as i64 {
                            return Err(decl_err(other.pos(), "array size must be at least 1"));
                        }
                        ArraySize::Fixed(n as u32)
                    }
                };
                let elems = if items.len() == 5 {
                    let (lo, hi) = (expect_int(&items[3])?, expect_int(&items[4])?);
                    if lo > hi {
                        return Err(decl_err(pos, format!("empty element range {lo}..{hi}")));
                    }
                    Some((lo, hi))
                } else {
                    None
                };
                self.f.declare_array(name, size, elems);
            }
            "declare-uniform-array" => {
                if items.len() != 3 && items.len() != 4 {
                    return Err(syntax(pos, "'declare-uniform-array' expects NAME TERM [SIZE]"));
                }
                let name = expect_name(&items[1])?;
                self.check_fresh(name, items[1].pos())?;
                let elem = self.int_term(&items[2])?;
                let size = if items.len() == 4 {
                    let n = expect_int(&items[3])?;
                    if n < 1 || n > u32::MAX as i64 {
                        return Err(decl_err(items[3].pos(), "array size must be at least 1"));
                    }
                    Some(n as u32)
                } else {
                    None
                };
                self.f.declare_uniform(name, elem, size);
            }
            "declare-map" => {
                arity(items, 5, pos, head)?;
                let name = expect_name(&items[1])?;
                self.check_fresh(name, items[1].pos())?;
                let keys = (expect_int(&items[2])?, expect_int(&items[3])?);
                let values = (expect_int(&items[4])?, expect_int(&items[5])?);
                if keys.0 < 0 || keys.0 > keys.1 {
                    return Err(decl_err(pos, "map keys must be a non-empty range of naturals"));
                }
                if values.0 > values.1 {
                    return Err(decl_err(pos, "empty map value range"));
                }
                self.f.declare_map(name, keys, values);
            }
            "=" | "distinct" => {
                arity(items, 2, pos, head)?;
                let a = self.int_term(&items[1])?;
                let b = self.int_term(&items[2])?;
                self.f.push(if head == "=" { Atom::Eq(a, b) } else { Atom::Diff(a, b) });
            }
            "=a" | "distinct-a" => {
                arity(items, 2, pos, head)?;
                let a = self.sized_array(&items[1])?;
                let b = self.sized_array(&items[2])?;
                self.f.push(if head == "=a" {
                    Atom::ArrayEq(a, b)
                } else {
                    Atom::ArrayDiff(a, b)
                });
            }
            "leq" => {
                arity(items, 2, pos, head)?;
                let mut coeffs = Vec::new();
                self.linear_sum(&items[1], &mut coeffs)?;
                let bound = expect_int(&items[2])?;
                self.f.push(Atom::LinearLeq { coeffs, bound });
            }
            "mul" => {
                arity(items, 3, pos, head)?;
                let x = self.int_term(&items[1])?;
                let y = self.int_term(&items[2])?;
                let z = self.int_term(&items[3])?;
                self.f.push(Atom::Mul { x, y, z });
            }
            "keys" | "not-keys" => {
                arity(items, 2, pos, head)?;
                let map = self.term(&items[1])?;
                if self.f.terms.sort(map) != Sort::Map {
                    return Err(sort_err(items[1].pos(), format!("{head} expects a map")));
                }
                let key = self.int_term(&items[2])?;
                self.f.push(Atom::Keys {
                    map,
                    key,
                    present: head == "keys",
                });
            }
            "diff-array" => {
                arity(items, 3, pos, head)?;
                let a = self.sized_array(&items[1])?;
                let b = self.sized_array(&items[2])?;
                let witness = self.int_term(&items[3])?;
                let lhs = self.f.terms.select(a, witness);
                let rhs = self.f.terms.select(b, witness);
                self.f.push(Atom::DiffArray {
                    a,
                    b,
                    witness,
                    lhs,
                    rhs,
                });
            }
            _ => return Err(syntax(pos, format!("unknown statement '{head}'"))),
        }
        Ok(())
    }
}

/// Parses the s-expression input format into a [`Formula`].
pub fn parse(text: &str) -> Result<Formula, FormulaError> {
    let mut p = Parser { f: Formula::new() };
    for s in read_sexps(text)? {
        p.statement(&s)?;
    }
    p.f.freeze_default_elems();
    Ok(p.f)
}
