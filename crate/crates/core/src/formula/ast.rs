use std::collections::BTreeSet;
use std::fmt;

/// Element terms: variables, the i-th element under `<`, or `logn`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Lit(usize),
    /// ⌈log₂ n⌉ read as an element index.
    LogN,
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn needs_order(&self) -> bool {
        !matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Lit(i) => write!(f, "{i}"),
            Term::LogN => f.write_str("logn"),
        }
    }
}

/// Formulas of FO + IFP + log-bounded second-order quantifiers.
///
/// `Rel` names a signature relation (or, before [`super::resolve`], possibly a
/// free relation variable); `RelVar` names a relation variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Rel {
        name: String,
        args: Vec<Term>,
    },
    RelVar {
        name: String,
        args: Vec<Term>,
    },
    Eq(Term, Term),
    Less(Term, Term),
    /// `Bit(y, x)`: bit `x` of the binary expansion of `y` is 1.
    Bit(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    /// `[IFP_{vars, relvar} body](args)`
    Ifp {
        vars: Vec<String>,
        relvar: String,
        body: Box<Formula>,
        args: Vec<Term>,
    },
    /// `∃^{log^k} var:arity . body`
    ExistsLog {
        k: u32,
        var: String,
        arity: usize,
        body: Box<Formula>,
    },
    ForallLog {
        k: u32,
        var: String,
        arity: usize,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn rel(name: impl Into<String>, args: impl IntoIterator<Item = Term>) -> Formula {
        Formula::Rel {
            name: name.into(),
            args: args.into_iter().collect(),
        }
    }

    pub fn relvar(name: impl Into<String>, args: impl IntoIterator<Item = Term>) -> Formula {
        Formula::RelVar {
            name: name.into(),
            args: args.into_iter().collect(),
        }
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall(var.into(), Box::new(body))
    }

    /// Left-nested conjunction; `None` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    pub fn disjunction(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::or)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(
            self,
            Formula::Rel { .. }
                | Formula::RelVar { .. }
                | Formula::Eq(..)
                | Formula::Less(..)
                | Formula::Bit(..)
        )
    }

    pub fn contains_log_quantifier(&self) -> bool {
        match self {
            Formula::ExistsLog { .. } | Formula::ForallLog { .. } => true,
            _ => self.children().any(Formula::contains_log_quantifier),
        }
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Box<dyn Iterator<Item = &Formula> + '_> {
        match self {
            Formula::Rel { .. }
            | Formula::RelVar { .. }
            | Formula::Eq(..)
            | Formula::Less(..)
            | Formula::Bit(..) => Box::new(std::iter::empty()),
            Formula::Not(a)
            | Formula::Exists(_, a)
            | Formula::Forall(_, a)
            | Formula::Ifp { body: a, .. }
            | Formula::ExistsLog { body: a, .. }
            | Formula::ForallLog { body: a, .. } => Box::new(std::iter::once(a.as_ref())),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                Box::new([a.as_ref(), b.as_ref()].into_iter())
            }
        }
    }

    /// Terms appearing directly in this node (atoms and IFP arguments).
    pub fn terms(&self) -> &[Term] {
        match self {
            Formula::Rel { args, .. } | Formula::RelVar { args, .. } => args,
            Formula::Eq(a, _) | Formula::Less(a, _) | Formula::Bit(a, _) => {
                std::slice::from_ref(a)
            }
            Formula::Ifp { args, .. } => args,
            _ => &[],
        }
    }

    fn for_each_term<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        match self {
            Formula::Eq(a, b) | Formula::Less(a, b) | Formula::Bit(a, b) => {
                f(a);
                f(b);
            }
            _ => self.terms().iter().for_each(&mut *f),
        }
        for c in self.children() {
            c.for_each_term(f);
        }
    }

    /// Every element variable name occurring anywhere, bound or free.
    pub fn element_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_binders(&mut out);
        self.for_each_term(&mut |t| {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        });
        out
    }

    fn collect_binders(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                out.insert(v.clone());
            }
            Formula::Ifp { vars, .. } => out.extend(vars.iter().cloned()),
            _ => {}
        }
        for c in self.children() {
            c.collect_binders(out);
        }
    }

    /// Every relation or relation-variable name occurring anywhere.
    pub fn relation_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_relation_names(&mut out);
        out
    }

    fn collect_relation_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Rel { name, .. } | Formula::RelVar { name, .. } => {
                out.insert(name.clone());
            }
            Formula::Ifp { relvar, .. } => {
                out.insert(relvar.clone());
            }
            Formula::ExistsLog { var, .. } | Formula::ForallLog { var, .. } => {
                out.insert(var.clone());
            }
            _ => {}
        }
        for c in self.children() {
            c.collect_relation_names(out);
        }
    }

    /// Free element variables.
    pub fn free_element_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_elems(&mut Vec::new(), &mut out);
        out
    }

    fn free_elems<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<String>) {
        let mut note = |t: &Term, bound: &Vec<&str>| {
            if let Term::Var(v) = t {
                if !bound.contains(&v.as_str()) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::Eq(a, b) | Formula::Less(a, b) | Formula::Bit(a, b) => {
                note(a, bound);
                note(b, bound);
            }
            Formula::Rel { args, .. } | Formula::RelVar { args, .. } => {
                args.iter().for_each(|t| note(t, bound));
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v);
                body.free_elems(bound, out);
                bound.pop();
            }
            Formula::Ifp {
                vars, body, args, ..
            } => {
                args.iter().for_each(|t| note(t, bound));
                let depth = bound.len();
                bound.extend(vars.iter().map(String::as_str));
                body.free_elems(bound, out);
                bound.truncate(depth);
            }
            _ => {
                for c in self.children() {
                    c.free_elems(bound, out);
                }
            }
        }
    }

    /// Splits `∃^{log^k1} X1 … ∃^{log^km} Xm ψ` into its prefix and `ψ`.
    pub fn existential_log_prefix(&self) -> (Vec<LogBinder>, &Formula) {
        let mut prefix = Vec::new();
        let mut cur = self;
        while let Formula::ExistsLog {
            k,
            var,
            arity,
            body,
        } = cur
        {
            prefix.push(LogBinder {
                k: *k,
                var: var.clone(),
                arity: *arity,
            });
            cur = body;
        }
        (prefix, cur)
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Exists(..)
            | Formula::Forall(..)
            | Formula::ExistsLog { .. }
            | Formula::ForallLog { .. } => 0,
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            _ => 4,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let paren = self.precedence() < ctx;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Formula::Rel { name, args } | Formula::RelVar { name, args } => {
                write!(f, "{name}(")?;
                write_terms(f, args)?;
                f.write_str(")")?;
            }
            Formula::Eq(a, b) => write!(f, "{a}={b}")?,
            Formula::Less(a, b) => write!(f, "{a}<{b}")?,
            Formula::Bit(a, b) => write!(f, "BIT({a},{b})")?,
            Formula::Not(a) => {
                f.write_str("!")?;
                a.write_prec(f, 4)?;
            }
            Formula::And(a, b) => {
                a.write_prec(f, 3)?;
                f.write_str(" & ")?;
                b.write_prec(f, 4)?;
            }
            Formula::Or(a, b) => {
                a.write_prec(f, 2)?;
                f.write_str(" | ")?;
                b.write_prec(f, 3)?;
            }
            Formula::Implies(a, b) => {
                a.write_prec(f, 2)?;
                f.write_str(" -> ")?;
                b.write_prec(f, 1)?;
            }
            Formula::Exists(v, body) => {
                write!(f, "E{v}. ")?;
                body.write_prec(f, 0)?;
            }
            Formula::Forall(v, body) => {
                write!(f, "A{v}. ")?;
                body.write_prec(f, 0)?;
            }
            Formula::Ifp {
                vars,
                relvar,
                body,
                args,
            } => {
                write!(f, "ifp[{relvar}({}) <- ", vars.join(","))?;
                body.write_prec(f, 0)?;
                f.write_str("](")?;
                write_terms(f, args)?;
                f.write_str(")")?;
            }
            Formula::ExistsLog {
                k,
                var,
                arity,
                body,
            } => {
                write!(f, "E2log[{k}] {var}:{arity}. ")?;
                body.write_prec(f, 0)?;
            }
            Formula::ForallLog {
                k,
                var,
                arity,
                body,
            } => {
                write!(f, "A2log[{k}] {var}:{arity}. ")?;
                body.write_prec(f, 0)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[Term]) -> fmt::Result {
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

/// Prints in the concrete grammar accepted by [`super::parse_formula`].
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LogBinder {
    pub k: u32,
    pub var: String,
    pub arity: usize,
}
